#pragma once

#include "mvr/higher_order.hpp"
#include "mvr/mumford_shah.hpp"

#include <Eigen/Dense>

namespace mvr {

/// K x N matrix with unit row sums acting on manifold signals through
/// weighted Riemannian centers of mass. Entries may be negative.
class ForwardOperator {
 public:
  ForwardOperator() = default;
  explicit ForwardOperator(Eigen::MatrixXd matrix, int bandwidth = -1)
      : matrix_(std::move(matrix)), bandwidth_(bandwidth) {
    if (matrix_.rows() == 0 || matrix_.cols() == 0) throw ArgumentError("empty operator");
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
      const double sum = matrix_.row(i).sum();
      if (!std::isfinite(sum) || std::abs(sum - 1.0) > 1e-12)
        throw ArgumentError("operator row " + std::to_string(i) + " does not sum to 1");
      Row r;
      std::vector<double> w;
      for (Eigen::Index j = 0; j < matrix_.cols(); ++j)
        if (matrix_(i, j) != 0.0) {
          r.cols.push_back(static_cast<int>(j));
          w.push_back(matrix_(i, j));
        }
      r.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      rows_.push_back(std::move(r));
    }
  }

  static ForwardOperator identity(int n) { return ForwardOperator(Eigen::MatrixXd::Identity(n, n), 0); }

  struct Row {
    std::vector<int> cols;
    Eigen::VectorXd weights;
  };

  int rows() const { return static_cast<int>(matrix_.rows()); }
  int cols() const { return static_cast<int>(matrix_.cols()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Row& row(int i) const { return rows_[i]; }
  int bandwidth() const { return bandwidth_; }
  bool is_identity() const { return matrix_.rows() == matrix_.cols() && matrix_.isIdentity(0.0); }

 private:
  Eigen::MatrixXd matrix_;
  int bandwidth_ = -1;
  std::vector<Row> rows_;
};

struct ForwardOptions {
  int max_iters = 1000;
  double tol = 1e-12;
};

namespace detail {

inline Point row_mean(const Manifold& m, const ForwardOperator::Row& row, const std::vector<Point>& pts, int index,
                      const Point* init = nullptr, const ForwardOptions& opt = {}) {
  if (pts.size() == 1) return pts[0];
  WeightedSample s{pts, row.weights};
  MeanOptions o;
  o.max_iters = opt.max_iters;
  o.tol = opt.tol;
  if (init) o.init = *init;
  try {
    return karcher_mean(m, s, o);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("mean of operator row " + std::to_string(index) + " did not converge",
                           e.last_iterate(), e.gradient_norm());
  }
}

}  // namespace detail

/// Component i is the weighted center of u with weights from row i.
inline Signal forward_apply(const ForwardOperator& a, const Signal& u, const ForwardOptions& opt = {}) {
  if (u.size() != a.cols()) throw ArgumentError("operator expects " + std::to_string(a.cols()) + " samples");
  Signal out(u.manifold, std::vector<Point>(a.rows()));
  parallel_for(a.rows(), [&](int i) {
    out[i] = detail::row_mean(u.M(), a.row(i), detail::gather(u, a.row(i).cols), i, nullptr, opt);
  }, 4);
  if (u.is_image && a.rows() == u.size()) {
    out.rows = u.rows;
    out.cols = u.cols;
    out.is_image = true;
  }
  return out;
}

namespace detail {

inline Eigen::MatrixXd gaussian_band(int n, double sigma, int width) {
  if (width < 1 || width % 2 == 0) throw ArgumentError("kernel width must be odd and positive");
  if (!(sigma > 0)) throw ArgumentError("sigma must be positive");
  const int h = width / 2;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double sum = 0;
    for (int o = -h; o <= h; ++o)
      if (i + o >= 0 && i + o < n) sum += std::exp(-o * o / (2 * sigma * sigma));
    for (int o = -h; o <= h; ++o)
      if (i + o >= 0 && i + o < n) k(i, i + o) = std::exp(-o * o / (2 * sigma * sigma)) / sum;
  }
  return k;
}

}  // namespace detail

/// Banded convolution with a sampled Gaussian of half width width / 2;
/// boundary rows are renormalized over their in-range entries.
inline ForwardOperator gaussian_kernel_operator(int n, double sigma, int width) {
  return ForwardOperator(detail::gaussian_band(n, sigma, width), width / 2);
}

/// Separable width x width Gaussian on a rows x cols image serialized row by
/// row.
inline ForwardOperator gaussian_kernel_operator_2d(int rows, int cols, double sigma, int width) {
  const Eigen::MatrixXd kr = detail::gaussian_band(rows, sigma, width);
  const Eigen::MatrixXd kc = detail::gaussian_band(cols, sigma, width);
  Eigen::MatrixXd k(rows * cols, rows * cols);
  for (int i = 0; i < rows; ++i)
    for (int a = 0; a < rows; ++a) k.block(i * cols, a * cols, cols, cols) = kr(i, a) * kc;
  // Renormalize rows exactly; the tensor product of unit-sum rows has unit
  // sum up to rounding.
  for (int i = 0; i < k.rows(); ++i) k.row(i) /= k.row(i).sum();
  return ForwardOperator(std::move(k), width / 2);
}

// --- data atoms ------------------------------------------------------------

struct DataAtomOptions {
  /// Condition number above which the implicit-function gradient gives way
  /// to finite differences through the mean.
  double max_condition = 1e8;
  InnerProxOptions inner{50};
  ForwardOptions mean;
};

namespace detail {

/// Gradient of (1/q) d(mean(w, u), f)^q with respect to every u_j by
/// differentiating sum_j w_j log_m(u_j) = 0.
inline double row_value_grad(const Manifold& m, const ForwardOperator::Row& row, const Point& f, double q,
                             const std::vector<Point>& u, int index, std::vector<Tangent>* grad,
                             const DataAtomOptions& opt) {
  const Point mean = row_mean(m, row, u, index, nullptr, opt.mean);
  const LogResult lf = m.log_checked(mean, f);
  if (lf.non_unique) throw CutLocusError("row mean is at the cut locus of its target", {index});
  const double d = m.norm(mean, lf.v);
  const double value = power(d, q) / q;
  if (!grad) return value;
  if (d == 0.0) return value;
  // Gradient at the mean.
  const Tangent gm = -std::pow(d, q - 2.0) * lf.v;
  const std::size_t n = u.size();
  if (n == 1) {
    (*grad)[0] += gm;
    return value;
  }
  const std::vector<Tangent> basis = m.tangent_basis(mean);
  const int dim = static_cast<int>(basis.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) {
    Tangent col = m.zero_tangent();
    for (std::size_t j = 0; j < n; ++j) col += row.weights[j] * m.diff_log_first(mean, u[j], basis[b]);
    for (int a = 0; a < dim; ++a) h(a, b) = m.inner(mean, basis[a], col);
  }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(h).singularValues();
  const bool well_posed = sv.size() > 0 && sv(sv.size() - 1) > 0 && sv(0) / sv(sv.size() - 1) <= opt.max_condition;
  if (well_posed) {
    Eigen::VectorXd c(dim);
    for (int a = 0; a < dim; ++a) c[a] = m.inner(mean, basis[a], gm);
    // dm = -H^{-1} sum_j w_j D2log[du_j], so grad_j = -w_j D2log^* H^{-T} gm.
    const Eigen::VectorXd yt = h.transpose().fullPivLu().solve(c);
    Tangent z = m.zero_tangent();
    for (int a = 0; a < dim; ++a) z += yt[a] * basis[a];
    for (std::size_t j = 0; j < n; ++j) {
      if (row.weights[j] == 0.0) continue;
      const Tangent adj = m.adjoint(u[j], mean, z, [&](const Tangent& eta) { return m.diff_log_second(mean, u[j], eta); });
      (*grad)[j] += -row.weights[j] * adj;
    }
    return value;
  }
  // Finite differences through the mean, warm started.
  const double step = Manifold::kFdStep;
  for (std::size_t j = 0; j < n; ++j) {
    for (const Tangent& e : m.tangent_basis(u[j])) {
      std::vector<Point> up = u, um = u;
      up[j] = m.exp(u[j], step * e);
      um[j] = m.exp(u[j], -step * e);
      const double vp = power(m.dist(row_mean(m, row, up, index, &mean, opt.mean), f), q) / q;
      const double vm = power(m.dist(row_mean(m, row, um, index, &mean, opt.mean), f), q) / q;
      (*grad)[j] += (vp - vm) / (2 * step) * e;
    }
  }
  return value;
}

inline Term row_term(const ForwardOperator& a, const Signal& f, int i, double q, const DataAtomOptions& opt) {
  auto row = std::make_shared<const ForwardOperator::Row>(a.row(i));
  auto target = std::make_shared<const Point>(f[i]);
  const Manifold* m = f.manifold.get();
  Term t;
  t.footprint = row->cols;
  t.value = [row, target, q, m, i, opt](const std::vector<Point>& u) {
    return row_value_grad(*m, *row, *target, q, u, i, nullptr, opt);
  };
  t.subgradient = [row, target, q, m, i, opt](const std::vector<Point>& u, std::vector<Tangent>& g) {
    row_value_grad(*m, *row, *target, q, u, i, &g, opt);
  };
  return t;
}

}  // namespace detail

/// D_i(u) = (1/q) d(mean(A_i, u), f_i)^q. The prox runs an inner subgradient
/// solve; the gradient goes through the implicit mean.
inline Atom data_atom(const ForwardOperator& a, const Signal& f, int i, double q, const DataAtomOptions& opt = {}) {
  if (f.size() != a.rows()) throw ArgumentError("data length must match the operator rows");
  if (i < 0 || i >= a.rows()) throw ArgumentError("row index out of range");
  if (q != 1.0 && q != 2.0) throw ArgumentError("data atoms support q in {1, 2}");
  Atom atom = make_term_atom("data/" + std::to_string(i), {detail::row_term(a, f, i, q, opt)}, AtomRole::data,
                             opt.inner);
  return atom;
}

/// All data atoms; the identity operator gets the closed-form pixelwise atom.
inline std::vector<Atom> data_atoms(const ForwardOperator& a, const Signal& f, double q,
                                    const DataAtomOptions& opt = {}) {
  if (a.is_identity()) return {make_data_atom(f, q)};
  std::vector<Atom> atoms;
  for (int i = 0; i < a.rows(); ++i) atoms.push_back(data_atom(a, f, i, q, opt));
  return atoms;
}

inline double data_residual(const ForwardOperator& a, const Signal& u, const Signal& f) {
  const Signal au = forward_apply(a, u);
  double s = 0;
  for (int i = 0; i < f.size(); ++i) {
    const double d = u.M().dist(au[i], f[i]);
    s += d * d;
  }
  return s;
}

// --- regularizers and driver -------------------------------------------------

enum class RegularizerKind { none, tv, tv_tv2, stgv, mumford_shah, potts };

struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::tv;
  /// First-order part (tv, tv_tv2).
  TVModel tv{1.0, 2.0, 1.0, false};
  /// Second-order weight and exponent for tv_tv2.
  double alpha2 = 0.0;
  double p2 = 1.0;
  TGVWeights tgv;
  MSModel ms;
  NeighborhoodSystem ns = NeighborhoodSystem::standard();
  InnerProxOptions inner;
};

/// Regularizer atoms acting on a signal shaped like `u`. For stgv they act
/// on the joint (u, tips) state.
inline std::vector<Atom> regularizer_atoms(const RegularizerSpec& spec, const Signal& u) {
  std::vector<Atom> atoms;
  switch (spec.kind) {
    case RegularizerKind::none: break;
    case RegularizerKind::tv:
    case RegularizerKind::tv_tv2: {
      atoms = tv_atoms(u, spec.tv);
      atoms.erase(atoms.begin());  // drop the pixelwise data atom
      if (spec.kind == RegularizerKind::tv_tv2 && spec.alpha2 > 0)
        for (Atom& a : make_term_atoms("tv2", tv2_terms(u, spec.alpha2, spec.p2), u.size(), AtomRole::regularizer,
                                       spec.inner))
          atoms.push_back(std::move(a));
      break;
    }
    case RegularizerKind::stgv: {
      const int joint = u.size() * (u.is_image ? 3 : 2);
      atoms = make_term_atoms("stgv", stgv_terms(u, spec.tgv), joint, AtomRole::regularizer, spec.inner);
      break;
    }
    case RegularizerKind::mumford_shah:
    case RegularizerKind::potts: {
      MSModel m = spec.ms;
      m.mode = spec.kind == RegularizerKind::potts ? MSMode::potts : MSMode::mumford_shah;
      atoms = ms_atoms(u, m, spec.ns);
      break;
    }
  }
  return atoms;
}

struct InverseOptions {
  DataAtomOptions data;
  TrajOptions traj;
  MeanMode mean = MeanMode::exact;
};

/// Runs one engine on data atoms plus regularizer atoms over state x0.
inline SolveResult solve_with_atoms(const std::vector<Atom>& data, const std::vector<Atom>& reg, const Signal& x0,
                                    const SolverSchedule& s, Engine engine, const InverseOptions& opt = {}) {
  switch (engine) {
    case Engine::cppa: {
      std::vector<Atom> all = data;
      all.insert(all.end(), reg.begin(), reg.end());
      return cppa(all, x0, s, &x0);
    }
    case Engine::pppa: {
      std::vector<Atom> all = data;
      all.insert(all.end(), reg.begin(), reg.end());
      return pppa(all, x0, s, opt.mean, &x0);
    }
    case Engine::fbs: return fbs(data, reg, x0, s, &x0);
    case Engine::fbs_traj: return fbs_traj(data, reg, x0, s, &x0, opt.traj);
  }
  throw ArgumentError("unknown engine");
}

/// Tikhonov-Phillips reconstruction sum_i D_i(u) + R(u). The iteration starts
/// at `init`, or at f when the operator is square. The result holds u only.
inline SolveResult solve_inverse(const ForwardOperator& a, const Signal& f, const RegularizerSpec& reg, double q,
                                 const SolverSchedule& s, Engine engine, const Signal* init = nullptr,
                                 const InverseOptions& opt = {}) {
  if (q == 1.0 && engine != Engine::cppa && engine != Engine::pppa)
    throw ArgumentError("q = 1 needs a proximal engine (cppa)");
  if (f.size() != a.rows()) throw ArgumentError("data length must match the operator rows");
  Signal u0;
  if (init) {
    if (init->size() != a.cols()) throw ArgumentError("initial signal has the wrong length");
    u0 = *init;
  } else if (a.rows() == a.cols()) {
    u0 = f;
  } else {
    throw ArgumentError("non-square operators need an initial signal");
  }
  std::vector<Atom> data = data_atoms(a, f, q, opt.data);
  if (reg.kind != RegularizerKind::stgv) {
    return solve_with_atoms(data, regularizer_atoms(reg, u0), u0, s, engine, opt);
  }
  // Joint state: the data atoms only read the u slots.
  const std::vector<Signal> tips = canonical_tips(u0);
  std::vector<const Signal*> ptrs;
  for (const Signal& t : tips) ptrs.push_back(&t);
  const Signal state = stgv_state(u0, ptrs);
  if (a.is_identity()) {
    std::vector<int> active(u0.size());
    std::iota(active.begin(), active.end(), 0);
    Signal target = state;
    for (int i = 0; i < f.size(); ++i) target[i] = f[i];
    data = {make_data_atom(target, q, active)};
  }
  SolveResult r = solve_with_atoms(data, regularizer_atoms(reg, u0), state, s, engine, opt);
  Signal u = u0;
  for (int i = 0; i < u.size(); ++i) u[i] = r.x[i];
  r.x = std::move(u);
  return r;
}

}  // namespace mvr
