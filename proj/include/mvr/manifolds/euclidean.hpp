#pragma once

#include "mvr/manifold.hpp"

namespace mvr {

/// Flat space R^d. Every map is affine so the differentials are exact.
class Euclidean final : public Manifold {
 public:
  explicit Euclidean(int d) {
    if (d <= 0) throw ArgumentError("euclidean dimension must be positive");
    desc_.kind = ManifoldKind::euclidean;
    desc_.parameter = d;
    desc_.ambient_dim = d;
    desc_.intrinsic_dim = d;
  }

  const ManifoldDescriptor& descriptor() const override { return desc_; }

  Point exp(const Point& p, const Tangent& v) const override { return p + v; }
  LogResult log_checked(const Point& p, const Point& q) const override { return {q - p, false}; }
  double inner(const Point&, const Tangent& v, const Tangent& w) const override { return v.dot(w); }
  double dist(const Point& p, const Point& q) const override { return (q - p).norm(); }
  Point geopoint(const Point& p, const Point& q, double t) const override {
    return p + t * (q - p);
  }
  Tangent transport(const Point&, const Point&, const Tangent& v) const override { return v; }

  Point project(const Point& x) const override { return x; }
  Tangent project_tangent(const Point&, const Tangent& v) const override { return v; }
  double constraint_violation(const Point& x) const override {
    return x.allFinite() ? 0.0 : std::numeric_limits<double>::infinity();
  }

  std::vector<Tangent> tangent_basis(const Point&) const override {
    std::vector<Tangent> basis;
    for (int i = 0; i < desc_.parameter; ++i) basis.push_back(Tangent::Unit(desc_.parameter, i));
    return basis;
  }
  Point base_point() const override { return Point::Zero(desc_.parameter); }

  Tangent diff_geopoint_second(const Point&, const Point&, double t,
                               const Tangent& eta) const override {
    return t * eta;
  }
  Tangent diff_log_second(const Point&, const Point&, const Tangent& eta) const override {
    return eta;
  }
  Tangent diff_log_first(const Point&, const Point&, const Tangent& xi) const override {
    return -xi;
  }
  Tangent diff_exp(const Point&, const Tangent&, const Tangent& w) const override { return w; }

 private:
  ManifoldDescriptor desc_;
};

}  // namespace mvr
