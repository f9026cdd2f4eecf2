#pragma once

#include "mvr/manifold.hpp"

namespace mvr {

/// Unit sphere S^n in R^{n+1} with the round metric.
class Sphere final : public Manifold {
 public:
  explicit Sphere(int n) {
    if (n <= 0) throw ArgumentError("sphere dimension must be positive");
    desc_.kind = ManifoldKind::sphere;
    desc_.parameter = n;
    desc_.ambient_dim = n + 1;
    desc_.intrinsic_dim = n;
  }

  const ManifoldDescriptor& descriptor() const override { return desc_; }

  Point exp(const Point& p, const Tangent& v) const override {
    const double theta = v.norm();
    if (theta == 0.0) return p;
    Point q = std::cos(theta) * p + detail::sinc(theta) * v;
    return q / q.norm();
  }

  LogResult log_checked(const Point& p, const Point& q) const override {
    const double c = p.dot(q);
    Tangent w = q - c * p;
    const double s = w.norm();
    const double theta = std::atan2(s, c);
    if (s < 1e-15) {
      if (c > 0) return {Tangent::Zero(p.size()), false};
      // Antipode: every direction is minimizing. Use a fixed one.
      return {kPi * antipodal_direction(p), true};
    }
    return {(theta / s) * w, false};
  }

  double inner(const Point&, const Tangent& v, const Tangent& w) const override {
    return v.dot(w);
  }

  double dist(const Point& p, const Point& q) const override {
    const double chord = (q - p).norm();
    if (chord < 1.0) return 2.0 * std::asin(0.5 * chord);
    return std::atan2((q - p.dot(q) * p).norm(), p.dot(q));
  }

  Tangent transport(const Point& p, const Point& q, const Tangent& v) const override {
    const LogResult a = log_checked(p, q);
    if (a.non_unique) throw CutLocusError("sphere transport between antipodal points");
    const double theta2 = a.v.squaredNorm();
    if (theta2 == 0.0) return project_tangent(q, v);
    const Tangent b = log(q, p);
    return project_tangent(q, v - (a.v.dot(v) / theta2) * (a.v + b));
  }

  Point project(const Point& x) const override { return x / x.norm(); }
  Tangent project_tangent(const Point& p, const Tangent& v) const override {
    return v - p.dot(v) * p;
  }
  double constraint_violation(const Point& x) const override {
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
    return std::abs(x.norm() - 1.0);
  }

  std::vector<Tangent> tangent_basis(const Point& p) const override {
    const int d = desc_.ambient_dim;
    int skip = 0;
    p.cwiseAbs().maxCoeff(&skip);
    std::vector<Tangent> basis;
    for (int i = 0; i < d; ++i) {
      if (i == skip) continue;
      Tangent e = project_tangent(p, Tangent::Unit(d, i));
      for (const Tangent& b : basis) e -= b.dot(e) * b;
      basis.push_back(e / e.norm());
    }
    return basis;
  }

  Point base_point() const override { return Point::Unit(desc_.ambient_dim, desc_.ambient_dim - 1); }

  // Jacobi fields: along the geodesic the tangential part scales linearly
  // and the normal part by sin(t L) / sin(L).
  Tangent diff_geopoint_second(const Point& p, const Point& q, double t,
                               const Tangent& eta) const override {
    const Tangent v = log(p, q);
    const double len = v.norm();
    if (len < 1e-12) return t * eta;
    const Tangent e = v / len;
    const Tangent e1 = -std::sin(len) * p + std::cos(len) * e;
    const Tangent et = -std::sin(t * len) * p + std::cos(t * len) * e;
    const double tang = eta.dot(e1);
    const Tangent normal = eta - tang * e1;
    return t * tang * et + detail::sin_ratio(len, t) * normal;
  }

  Tangent diff_log_second(const Point& p, const Point& q, const Tangent& eta) const override {
    const Tangent v = log(p, q);
    const double len = v.norm();
    if (len < 1e-12) return eta;
    const Tangent e = v / len;
    const Tangent e1 = -std::sin(len) * p + std::cos(len) * e;
    const double tang = eta.dot(e1);
    const Tangent normal = eta - tang * e1;
    return tang * e + detail::a_over_sin(len) * normal;
  }

  Tangent diff_log_first(const Point& p, const Point& q, const Tangent& xi) const override {
    const Tangent v = log(p, q);
    const double len = v.norm();
    if (len < 1e-12) return -xi;
    const Tangent e = v / len;
    const double tang = xi.dot(e);
    const Tangent normal = xi - tang * e;
    return -tang * e - detail::a_cot(len) * normal;
  }

  Tangent diff_exp(const Point& p, const Tangent& v, const Tangent& w) const override {
    const double len = v.norm();
    if (len < 1e-12) return w;
    const Tangent e = v / len;
    const Tangent e1 = -std::sin(len) * p + std::cos(len) * e;
    const double tang = w.dot(e);
    const Tangent normal = w - tang * e;
    return tang * e1 + detail::sinc(len) * normal;
  }

 private:
  Tangent antipodal_direction(const Point& p) const {
    int k = 0;
    p.cwiseAbs().minCoeff(&k);
    Tangent e = project_tangent(p, Tangent::Unit(p.size(), k));
    return e / e.norm();
  }

  ManifoldDescriptor desc_;
};

}  // namespace mvr
