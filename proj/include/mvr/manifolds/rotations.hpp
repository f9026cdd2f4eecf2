#pragma once

#include "mvr/manifold.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace mvr {

namespace so3 {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using RowMat3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;

inline Mat3 to_matrix(const Eigen::VectorXd& x) { return Eigen::Map<const RowMat3>(x.data()); }

inline Eigen::VectorXd to_coords(const Mat3& m) {
  Eigen::VectorXd x(9);
  Eigen::Map<RowMat3>(x.data()) = m;
  return x;
}

inline Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

/// Axial vector of the skew part of m.
inline Vec3 vee(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

/// Rodrigues formula.
inline Mat3 expm(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 k = hat(w);
  double a, b;
  if (theta < 1e-6) {
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 - theta * theta / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

struct LogVec {
  Vec3 w;
  bool non_unique = false;
};

/// Principal logarithm as an axis-angle vector; robust near angle pi.
inline LogVec logm(const Mat3& r) {
  const Vec3 s = vee(r);  // sin(theta) * axis
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double sn = s.norm();
  const double theta = std::atan2(sn, c);
  if (theta < kPi - 1e-4) {
    return {(theta < 1e-8 ? 1.0 + theta * theta / 6.0 : theta / std::sin(theta)) * s, false};
  }
  // Near pi the symmetric part carries the axis: a a^T = (sym(R) - c I) / (1 - c).
  const Mat3 b = (0.5 * (r + r.transpose()) - c * Mat3::Identity()) / (1.0 - c);
  int k = 0;
  b.diagonal().maxCoeff(&k);
  Vec3 axis = b.col(k) / std::sqrt(std::max(b(k, k), 1e-300));
  axis.normalize();
  bool tie = false;
  if (sn > 1e-12) {
    if (axis.dot(s) < 0) axis = -axis;
  } else {
    tie = true;
    for (int i = 0; i < 3; ++i) {
      if (std::abs(axis[i]) > 1e-9) {
        if (axis[i] < 0) axis = -axis;
        break;
      }
    }
  }
  return {theta * axis, tie};
}

}  // namespace so3

/// Rotation group SO(3), 3x3 matrices stored row-major in 9 coordinates.
/// Tangent vectors at R are R * Omega with Omega skew; the bi-invariant
/// metric is <A, B> = trace(A^T B) / 2 so that dist(I, R(theta)) = theta.
class Rotations3 final : public Manifold {
 public:
  Rotations3() {
    desc_.kind = ManifoldKind::rotations3;
    desc_.ambient_dim = 9;
    desc_.intrinsic_dim = 3;
  }

  const ManifoldDescriptor& descriptor() const override { return desc_; }

  Point exp(const Point& p, const Tangent& v) const override {
    const so3::Mat3 r = so3::to_matrix(p);
    return so3::to_coords(polar(r * so3::expm(body(r, v))));
  }

  LogResult log_checked(const Point& p, const Point& q) const override {
    const so3::Mat3 r = so3::to_matrix(p);
    const so3::LogVec l = so3::logm(r.transpose() * so3::to_matrix(q));
    return {so3::to_coords(r * so3::hat(l.w)), l.non_unique};
  }

  double inner(const Point&, const Tangent& v, const Tangent& w) const override {
    return 0.5 * v.dot(w);
  }

  double dist(const Point& p, const Point& q) const override {
    return so3::logm(so3::to_matrix(p).transpose() * so3::to_matrix(q)).w.norm();
  }

  Tangent transport(const Point& p, const Point& q, const Tangent& v) const override {
    const so3::Mat3 r = so3::to_matrix(p);
    const so3::LogVec l = so3::logm(r.transpose() * so3::to_matrix(q));
    if (l.non_unique) throw CutLocusError("rotation transport across the cut locus");
    return along(r, l.w, 1.0, so3::hat(body(r, v)));
  }

  Point project(const Point& x) const override { return so3::to_coords(polar(so3::to_matrix(x))); }

  Tangent project_tangent(const Point& p, const Tangent& v) const override {
    const so3::Mat3 r = so3::to_matrix(p);
    return so3::to_coords(r * so3::hat(body(r, v)));
  }

  double constraint_violation(const Point& x) const override {
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
    const so3::Mat3 r = so3::to_matrix(x);
    return (r.transpose() * r - so3::Mat3::Identity()).norm() + std::abs(r.determinant() - 1.0);
  }

  std::vector<Tangent> tangent_basis(const Point& p) const override {
    const so3::Mat3 r = so3::to_matrix(p);
    std::vector<Tangent> basis;
    for (int i = 0; i < 3; ++i) basis.push_back(so3::to_coords(r * so3::hat(so3::Vec3::Unit(i))));
    return basis;
  }

  Point base_point() const override { return so3::to_coords(so3::Mat3::Identity()); }

  // The bi-invariant metric has curvature 1/4 on planes containing the
  // geodesic direction, so normal Jacobi components follow sin(t L / 2).
  Tangent diff_geopoint_second(const Point& p, const Point& q, double t,
                               const Tangent& eta) const override {
    const so3::Mat3 r = so3::to_matrix(p);
    const so3::Vec3 x = so3::logm(r.transpose() * so3::to_matrix(q)).w;
    const so3::Vec3 y = back(r, x, eta);
    const double len = x.norm();
    so3::Vec3 out;
    if (len < 1e-12) {
      out = t * y;
    } else {
      const so3::Vec3 e = x / len;
      const double tang = y.dot(e);
      out = t * tang * e + detail::sin_ratio(0.5 * len, t) * (y - tang * e);
    }
    return along(r, x, t, so3::hat(out));
  }

  Tangent diff_log_second(const Point& p, const Point& q, const Tangent& eta) const override {
    const so3::Mat3 r = so3::to_matrix(p);
    const so3::Vec3 x = so3::logm(r.transpose() * so3::to_matrix(q)).w;
    const so3::Vec3 y = back(r, x, eta);
    return so3::to_coords(r * so3::hat(scale_normal(x, y, detail::a_over_sin(0.5 * x.norm()))));
  }

  Tangent diff_log_first(const Point& p, const Point& q, const Tangent& xi) const override {
    const so3::Mat3 r = so3::to_matrix(p);
    const so3::Vec3 x = so3::logm(r.transpose() * so3::to_matrix(q)).w;
    const so3::Vec3 y = body(r, xi);
    return so3::to_coords(r * so3::hat(-scale_normal(x, y, detail::a_cot(0.5 * x.norm()))));
  }

  Tangent diff_exp(const Point& p, const Tangent& v, const Tangent& w) const override {
    const so3::Mat3 r = so3::to_matrix(p);
    const so3::Vec3 x = body(r, v);
    const so3::Vec3 y = body(r, w);
    return along(r, x, 1.0, so3::hat(scale_normal(x, y, detail::sinc(0.5 * x.norm()))));
  }

 private:
  static so3::Mat3 polar(const so3::Mat3& m) {
    Eigen::JacobiSVD<so3::Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    so3::Mat3 u = svd.matrixU();
    const so3::Mat3 v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0) u.col(2) = -u.col(2);
    return u * v.transpose();
  }

  /// Axial vector of R^T v.
  static so3::Vec3 body(const so3::Mat3& r, const Tangent& v) {
    return so3::vee(r.transpose() * so3::to_matrix(v));
  }

  /// Parallel transport of R * Omega along t -> R exp(t X).
  static Tangent along(const so3::Mat3& r, const so3::Vec3& x, double t, const so3::Mat3& omega) {
    const so3::Mat3 h = so3::expm(0.5 * t * x);
    return so3::to_coords(r * h * omega * h);
  }

  /// Axial vector at R of the transport of eta back from R exp(X).
  static so3::Vec3 back(const so3::Mat3& r, const so3::Vec3& x, const Tangent& eta) {
    const so3::Mat3 h = so3::expm(-0.5 * x);
    return so3::vee(h * r.transpose() * so3::to_matrix(eta) * h);
  }

  /// Keeps the component of y along x, scales the rest by factor.
  static so3::Vec3 scale_normal(const so3::Vec3& x, const so3::Vec3& y, double factor) {
    const double len = x.norm();
    if (len < 1e-12) return y;
    const so3::Vec3 e = x / len;
    const double tang = y.dot(e);
    return tang * e + factor * (y - tang * e);
  }

  ManifoldDescriptor desc_;
};

}  // namespace mvr
