#pragma once

#include "mvr/manifold.hpp"

#include <Eigen/Dense>

namespace mvr {

/// Symmetric positive definite n x n matrices, row-major in n^2 coordinates,
/// with the affine-invariant metric <V, W>_P = trace(P^-1 V P^-1 W).
///
/// Most operations move to the identity by congruence with P^{-1/2}, where
/// the geodesic through X is t -> exp(t X) and parallel transport along it is
/// Y -> exp(t X / 2) Y exp(t X / 2).
class SPD final : public Manifold {
 public:
  using Mat = Eigen::MatrixXd;

  explicit SPD(int n) : n_(n) {
    if (n <= 0) throw ArgumentError("spd dimension must be positive");
    desc_.kind = ManifoldKind::spd;
    desc_.parameter = n;
    desc_.ambient_dim = n * n;
    desc_.intrinsic_dim = n * (n + 1) / 2;
  }

  const ManifoldDescriptor& descriptor() const override { return desc_; }

  Mat to_matrix(const Eigen::VectorXd& x) const {
    Mat m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = x[i * n_ + j];
    return m;
  }

  Eigen::VectorXd to_coords(const Mat& m) const {
    Eigen::VectorXd x(n_ * n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) x[i * n_ + j] = 0.5 * (m(i, j) + m(j, i));
    return x;
  }

  Point exp(const Point& p, const Tangent& v) const override {
    const Frame f(*this, p);
    return project(to_coords(f.out(apply(f.in(to_matrix(v)), [](double l) { return std::exp(l); }))));
  }

  LogResult log_checked(const Point& p, const Point& q) const override {
    const Frame f(*this, p);
    return {to_coords(f.out(log_at_identity(f, q))), false};
  }

  double inner(const Point& p, const Tangent& v, const Tangent& w) const override {
    // trace(L^-1 V L^-T L^-1 W L^-T) with P = L L^T; far better conditioned
    // than forming P^-1.
    const Eigen::LLT<Mat> c(to_matrix(p));
    auto whiten = [&](const Tangent& t) {
      const Mat a = c.matrixL().solve(to_matrix(t));
      return Mat(c.matrixL().solve(a.transpose()));
    };
    return (whiten(v).array() * whiten(w).array()).sum();
  }

  double dist(const Point& p, const Point& q) const override {
    // Generalized eigenvalues of (Q, P) are those of P^-1/2 Q P^-1/2.
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(to_matrix(q), to_matrix(p));
    return es.eigenvalues().array().log().matrix().norm();
  }

  Tangent transport(const Point& p, const Point& q, const Tangent& v) const override {
    // The transport is W -> E W E^T with E = P^1/2 (P^-1/2 Q P^-1/2)^1/2 P^-1/2.
    // Written as E = L_Q O L_P^-1 with Cholesky factors, O is orthogonal; we
    // snap the computed O to its polar factor so the map stays an isometry
    // for badly conditioned P and Q.
    const Frame f(*this, p);
    const Mat r = apply(f.in(to_matrix(q)), [](double l) { return std::sqrt(std::max(l, 0.0)); });
    const Mat e = f.sqrt_p * r * f.inv_sqrt_p;
    const Eigen::LLT<Mat> cp(to_matrix(p)), cq(to_matrix(q));
    const Mat lp = cp.matrixL(), lq = cq.matrixL();
    const Mat o_raw = cq.matrixL().solve(e * lp);
    const Eigen::JacobiSVD<Mat> svd(o_raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat o = svd.matrixU() * svd.matrixV().transpose();
    Mat w = cp.matrixL().solve(to_matrix(v));
    w = cp.matrixL().solve(Mat(w.transpose()));
    return to_coords(lq * o * w * o.transpose() * lq.transpose());
  }

  Point project(const Point& x) const override {
    Mat m = to_matrix(x);
    m = 0.5 * (m + m.transpose());
    return to_coords(apply(m, [](double l) { return std::max(l, 1e-12); }));
  }

  Tangent project_tangent(const Point&, const Tangent& v) const override {
    return to_coords(to_matrix(v));
  }

  double constraint_violation(const Point& x) const override {
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
    const Mat m = to_matrix(x);
    const double asym = (m - m.transpose()).norm();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    return asym + (lmin > 0 ? 0.0 : 1.0 - lmin);
  }

  std::vector<Tangent> tangent_basis(const Point& p) const override {
    const Frame f(*this, p);
    std::vector<Tangent> basis;
    for (int i = 0; i < n_; ++i) {
      for (int j = i; j < n_; ++j) {
        Mat e = Mat::Zero(n_, n_);
        if (i == j) {
          e(i, i) = 1.0;
        } else {
          e(i, j) = e(j, i) = std::sqrt(0.5);
        }
        basis.push_back(to_coords(f.out(e)));
      }
    }
    return basis;
  }

  Point base_point() const override { return to_coords(Mat::Identity(n_, n_)); }

  // Jacobi fields: in the eigenbasis of X the (i, j) component evolves with
  // curvature -(l_i - l_j)^2 / 4, giving sinh ratios.
  Tangent diff_geopoint_second(const Point& p, const Point& q, double t,
                               const Tangent& eta) const override {
    const Frame f(*this, p);
    const Mat x = log_at_identity(f, q);
    const Mat y = unalong(x, f.in(to_matrix(eta)));
    const Mat z = scale_modes(x, y, [t](double d) { return detail::sinh_ratio(0.5 * d, t); });
    return to_coords(f.out(along(x, t, z)));
  }

  Tangent diff_log_second(const Point& p, const Point& q, const Tangent& eta) const override {
    const Frame f(*this, p);
    const Mat x = log_at_identity(f, q);
    const Mat y = unalong(x, f.in(to_matrix(eta)));
    return to_coords(f.out(scale_modes(x, y, [](double d) { return detail::a_over_sinh(0.5 * d); })));
  }

  Tangent diff_log_first(const Point& p, const Point& q, const Tangent& xi) const override {
    const Frame f(*this, p);
    const Mat x = log_at_identity(f, q);
    const Mat y = f.in(to_matrix(xi));
    return to_coords(f.out(-scale_modes(x, y, [](double d) { return detail::a_coth(0.5 * d); })));
  }

  Tangent diff_exp(const Point& p, const Tangent& v, const Tangent& w) const override {
    const Frame f(*this, p);
    const Mat x = f.in(to_matrix(v));
    const Mat y = f.in(to_matrix(w));
    const Mat z = scale_modes(x, y, [](double d) { return detail::sinhc(0.5 * d); });
    return to_coords(f.out(along(x, 1.0, z)));
  }

 private:
  /// Congruence maps between T_P and T_I.
  struct Frame {
    Mat sqrt_p, inv_sqrt_p;
    Frame(const SPD& m, const Point& p) {
      Eigen::SelfAdjointEigenSolver<Mat> es(m.to_matrix(p));
      const Eigen::VectorXd l = es.eigenvalues().cwiseMax(1e-300);
      const Mat& u = es.eigenvectors();
      sqrt_p = u * l.cwiseSqrt().asDiagonal() * u.transpose();
      inv_sqrt_p = u * l.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
    }
    Mat in(const Mat& v) const { return inv_sqrt_p * v * inv_sqrt_p; }
    Mat out(const Mat& v) const { return sqrt_p * v * sqrt_p; }
  };

  template <class F>
  static Mat apply(const Mat& sym, F&& fn) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sym + sym.transpose()));
    const Eigen::VectorXd l = es.eigenvalues().unaryExpr(fn);
    return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
  }

  Mat log_at_identity(const Frame& f, const Point& q) const {
    return apply(f.in(to_matrix(q)), [](double l) { return std::log(std::max(l, 1e-300)); });
  }

  static Mat along(const Mat& x, double t, const Mat& y) {
    const Mat h = apply(x, [t](double l) { return std::exp(0.5 * t * l); });
    return h * y * h;
  }

  static Mat unalong(const Mat& x, const Mat& y) {
    const Mat h = apply(x, [](double l) { return std::exp(-0.5 * l); });
    return h * y * h;
  }

  /// Multiplies the (i, j) component of y in the eigenbasis of x by
  /// factor(|l_i - l_j|).
  template <class F>
  static Mat scale_modes(const Mat& x, const Mat& y, F&& factor) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (x + x.transpose()));
    const Mat& u = es.eigenvectors();
    const Eigen::VectorXd& l = es.eigenvalues();
    Mat c = u.transpose() * y * u;
    for (int i = 0; i < c.rows(); ++i)
      for (int j = 0; j < c.cols(); ++j) c(i, j) *= factor(std::abs(l[i] - l[j]));
    return u * c * u.transpose();
  }

  int n_;
  ManifoldDescriptor desc_;
};

}  // namespace mvr
