#pragma once

#include "mvr/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace mvr {

/// Ambient coordinates of a manifold point.
using Point = Eigen::VectorXd;
/// Ambient coordinates of a tangent vector; the base point is implied by
/// context and always passed alongside.
using Tangent = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

enum class ManifoldKind { euclidean, circle, sphere, rotations3, spd, product };

struct ManifoldDescriptor {
  ManifoldKind kind = ManifoldKind::euclidean;
  /// d for euclidean(d), n for sphere(n) and spd(n); unused otherwise.
  int parameter = 0;
  int ambient_dim = 0;
  int intrinsic_dim = 0;
  /// Flattened factors of a product; empty for the other kinds.
  std::vector<ManifoldDescriptor> factors;

  std::string to_string() const {
    switch (kind) {
      case ManifoldKind::euclidean:
        return "euclidean:" + std::to_string(parameter);
      case ManifoldKind::circle:
        return "circle";
      case ManifoldKind::sphere:
        return "sphere:" + std::to_string(parameter);
      case ManifoldKind::rotations3:
        return "so3";
      case ManifoldKind::spd:
        return "spd:" + std::to_string(parameter);
      case ManifoldKind::product: {
        std::string s = "product(";
        for (std::size_t i = 0; i < factors.size(); ++i) {
          if (i) s += ",";
          s += factors[i].to_string();
        }
        return s + ")";
      }
    }
    return "?";
  }

  friend bool operator==(const ManifoldDescriptor& a, const ManifoldDescriptor& b) {
    return a.kind == b.kind && a.parameter == b.parameter &&
           a.ambient_dim == b.ambient_dim && a.factors == b.factors;
  }
  friend bool operator!=(const ManifoldDescriptor& a, const ManifoldDescriptor& b) {
    return !(a == b);
  }
};

/// log together with a flag telling whether the input pair sat on the cut
/// locus, in which case a deterministic branch was picked.
struct LogResult {
  Tangent v;
  bool non_unique = false;
};

/// A complete Riemannian manifold embedded in some ambient coordinate space.
///
/// All operations are pure; instances are immutable and may be shared across
/// threads. Points and tangents are plain coordinate vectors and the caller is
/// responsible for pairing each tangent with its base point.
///
/// The differential methods have central finite-difference defaults so every
/// manifold is differentiable out of the box; concrete geometries override
/// them with closed-form Jacobi fields.
class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual const ManifoldDescriptor& descriptor() const = 0;
  int ambient_dim() const { return descriptor().ambient_dim; }
  int intrinsic_dim() const { return descriptor().intrinsic_dim; }

  virtual Point exp(const Point& p, const Tangent& v) const = 0;
  virtual LogResult log_checked(const Point& p, const Point& q) const = 0;
  Tangent log(const Point& p, const Point& q) const { return log_checked(p, q).v; }

  virtual double inner(const Point& p, const Tangent& v, const Tangent& w) const = 0;
  double norm(const Point& p, const Tangent& v) const {
    return std::sqrt(std::max(0.0, inner(p, v, v)));
  }
  virtual double dist(const Point& p, const Point& q) const { return norm(p, log(p, q)); }

  /// Point at parameter t on the geodesic from p (t = 0) to q (t = 1); t may
  /// lie outside [0, 1].
  virtual Point geopoint(const Point& p, const Point& q, double t) const {
    return exp(p, t * log(p, q));
  }
  Point midpoint(const Point& p, const Point& q) const { return geopoint(p, q, 0.5); }

  /// Parallel transport of v from T_p to T_q along the minimizing geodesic.
  virtual Tangent transport(const Point& p, const Point& q, const Tangent& v) const = 0;

  /// Nearest valid point (re-normalization, polar factor, eigenvalue clip).
  virtual Point project(const Point& x) const = 0;
  virtual Tangent project_tangent(const Point& p, const Tangent& v) const = 0;
  /// How far x is from satisfying the manifold constraint.
  virtual double constraint_violation(const Point& x) const = 0;
  virtual double tangent_violation(const Point& p, const Tangent& v) const {
    return (project_tangent(p, v) - v).norm();
  }

  /// Orthonormal basis of T_p with respect to the metric, in a deterministic
  /// order.
  virtual std::vector<Tangent> tangent_basis(const Point& p) const = 0;

  /// Fixed reference point (origin, north pole, identity).
  virtual Point base_point() const = 0;

  Tangent zero_tangent() const { return Tangent::Zero(ambient_dim()); }

  /// Random tangent at p with i.i.d. N(0, sigma^2) coordinates in the
  /// orthonormal tangent basis.
  Tangent random_tangent(const Point& p, std::mt19937_64& rng, double sigma) const {
    std::normal_distribution<double> normal(0.0, sigma);
    Tangent v = zero_tangent();
    for (const Tangent& e : tangent_basis(p)) v += normal(rng) * e;
    return v;
  }

  /// Random point exp(base_point, v) with v Gaussian of scale sigma.
  Point random_point(std::mt19937_64& rng, double sigma) const {
    const Point b = base_point();
    return exp(b, random_tangent(b, rng, sigma));
  }

  // --- differentials -------------------------------------------------------

  /// d/dq of q -> [p, q]_t applied to eta in T_q; result in T_{[p,q]_t}.
  virtual Tangent diff_geopoint_second(const Point& p, const Point& q, double t,
                                       const Tangent& eta) const {
    return fd_diff_geopoint_second(p, q, t, eta);
  }
  /// d/dp of p -> [p, q]_t applied to xi in T_p.
  Tangent diff_geopoint_first(const Point& p, const Point& q, double t,
                              const Tangent& xi) const {
    return diff_geopoint_second(q, p, 1.0 - t, xi);
  }
  /// d/dq of q -> log_p(q) applied to eta in T_q; result in T_p.
  virtual Tangent diff_log_second(const Point& p, const Point& q, const Tangent& eta) const {
    return fd_diff_log_second(p, q, eta);
  }
  /// Covariant derivative of the field p -> log_p(q) along xi in T_p.
  virtual Tangent diff_log_first(const Point& p, const Point& q, const Tangent& xi) const {
    return fd_diff_log_first(p, q, xi);
  }
  /// d/dv of v -> exp_p(v) at v applied to w in T_p; result in T_{exp_p v}.
  virtual Tangent diff_exp(const Point& p, const Tangent& v, const Tangent& w) const {
    return fd_diff_exp(p, v, w);
  }

  // Central finite differences, step 1e-5 along the unit direction.

  Tangent fd_diff_geopoint_second(const Point& p, const Point& q, double t,
                                  const Tangent& eta) const {
    const double n = norm(q, eta);
    if (n == 0.0) return zero_tangent();
    const Tangent e = eta / n;
    const Point c = geopoint(p, q, t);
    const Point plus = geopoint(p, exp(q, kFdStep * e), t);
    const Point minus = geopoint(p, exp(q, -kFdStep * e), t);
    return project_tangent(c, (log(c, plus) - log(c, minus)) * (n / (2 * kFdStep)));
  }

  Tangent fd_diff_log_second(const Point& p, const Point& q, const Tangent& eta) const {
    const double n = norm(q, eta);
    if (n == 0.0) return zero_tangent();
    const Tangent e = eta / n;
    const Tangent plus = log(p, exp(q, kFdStep * e));
    const Tangent minus = log(p, exp(q, -kFdStep * e));
    return project_tangent(p, (plus - minus) * (n / (2 * kFdStep)));
  }

  Tangent fd_diff_log_first(const Point& p, const Point& q, const Tangent& xi) const {
    const double n = norm(p, xi);
    if (n == 0.0) return zero_tangent();
    const Tangent e = xi / n;
    const Point pp = exp(p, kFdStep * e);
    const Point pm = exp(p, -kFdStep * e);
    const Tangent plus = transport(pp, p, log(pp, q));
    const Tangent minus = transport(pm, p, log(pm, q));
    return project_tangent(p, (plus - minus) * (n / (2 * kFdStep)));
  }

  Tangent fd_diff_exp(const Point& p, const Tangent& v, const Tangent& w) const {
    const double n = norm(p, w);
    if (n == 0.0) return zero_tangent();
    const Tangent e = w / n;
    const Point c = exp(p, v);
    const Point plus = exp(p, v + kFdStep * e);
    const Point minus = exp(p, v - kFdStep * e);
    return project_tangent(c, (log(c, plus) - log(c, minus)) * (n / (2 * kFdStep)));
  }

  /// Adjoint of a linear map L: T_in -> T_out, assembled from an orthonormal
  /// basis of T_in: L^*(w) = sum_l <w, L(xi_l)> xi_l.
  template <class LinearMap>
  Tangent adjoint(const Point& in_base, const Point& out_base, const Tangent& w,
                  LinearMap&& map) const {
    Tangent result = zero_tangent();
    if (w.isZero(0.0)) return result;
    for (const Tangent& xi : tangent_basis(in_base)) {
      result += inner(out_base, w, map(xi)) * xi;
    }
    return result;
  }

  static constexpr double kFdStep = 1e-5;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double a) {
  const double two_pi = 2.0 * kPi;
  double r = std::fmod(a + kPi, two_pi);
  if (r < 0) r += two_pi;
  r -= kPi;
  if (r >= kPi) r -= two_pi;
  return r;
}

/// Real-valued helpers used by several closed-form Jacobi fields.
namespace detail {

/// sin(a t) / sin(a), continuous at a = 0.
inline double sin_ratio(double a, double t) {
  if (std::abs(a) < 1e-8) return t * (1.0 - a * a * (t * t - 1.0) / 6.0);
  return std::sin(a * t) / std::sin(a);
}

/// sinh(a t) / sinh(a), continuous at a = 0.
inline double sinh_ratio(double a, double t) {
  if (std::abs(a) < 1e-8) return t * (1.0 + a * a * (t * t - 1.0) / 6.0);
  return std::sinh(a * t) / std::sinh(a);
}

/// a / sin(a), continuous at 0.
inline double a_over_sin(double a) {
  if (std::abs(a) < 1e-6) return 1.0 + a * a / 6.0;
  return a / std::sin(a);
}

/// sin(a) / a, continuous at 0.
inline double sinc(double a) {
  if (std::abs(a) < 1e-6) return 1.0 - a * a / 6.0;
  return std::sin(a) / a;
}

/// a / sinh(a), continuous at 0.
inline double a_over_sinh(double a) {
  if (std::abs(a) < 1e-6) return 1.0 - a * a / 6.0;
  return a / std::sinh(a);
}

/// sinh(a) / a, continuous at 0.
inline double sinhc(double a) {
  if (std::abs(a) < 1e-6) return 1.0 + a * a / 6.0;
  return std::sinh(a) / a;
}

/// a cot(a), continuous at 0.
inline double a_cot(double a) {
  if (std::abs(a) < 1e-6) return 1.0 - a * a / 3.0;
  return a * std::cos(a) / std::sin(a);
}

/// a coth(a), continuous at 0.
inline double a_coth(double a) {
  if (std::abs(a) < 1e-6) return 1.0 + a * a / 3.0;
  return a * std::cosh(a) / std::sinh(a);
}

}  // namespace detail

}  // namespace mvr
