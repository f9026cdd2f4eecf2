#pragma once

#include "mvr/manifold.hpp"

namespace mvr {

/// Unit circle stored as a single angle in [-pi, pi). Tangents are scalars.
class Circle final : public Manifold {
 public:
  Circle() {
    desc_.kind = ManifoldKind::circle;
    desc_.ambient_dim = 1;
    desc_.intrinsic_dim = 1;
  }

  const ManifoldDescriptor& descriptor() const override { return desc_; }

  Point exp(const Point& p, const Tangent& v) const override {
    return Point::Constant(1, wrap_angle(p[0] + v[0]));
  }

  // Antipodal pairs resolve toward the positive direction.
  LogResult log_checked(const Point& p, const Point& q) const override {
    double d = wrap_angle(q[0] - p[0]);
    bool tie = false;
    if (std::abs(std::abs(d) - kPi) < 1e-14) {
      d = kPi;
      tie = true;
    }
    return {Tangent::Constant(1, d), tie};
  }

  double inner(const Point&, const Tangent& v, const Tangent& w) const override {
    return v[0] * w[0];
  }
  double dist(const Point& p, const Point& q) const override {
    return std::abs(wrap_angle(q[0] - p[0]));
  }
  Tangent transport(const Point&, const Point&, const Tangent& v) const override { return v; }

  Point project(const Point& x) const override { return Point::Constant(1, wrap_angle(x[0])); }
  Tangent project_tangent(const Point&, const Tangent& v) const override { return v; }
  double constraint_violation(const Point& x) const override {
    if (!std::isfinite(x[0])) return std::numeric_limits<double>::infinity();
    return std::abs(wrap_angle(x[0]) - x[0]);
  }

  std::vector<Tangent> tangent_basis(const Point&) const override {
    return {Tangent::Constant(1, 1.0)};
  }
  Point base_point() const override { return Point::Zero(1); }

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
