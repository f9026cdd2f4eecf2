#pragma once

#include "mvr/atoms.hpp"
#include "mvr/stats.hpp"
#include "mvr/tv.hpp"

#include <array>
#include <limits>

namespace mvr {

enum class MSMode { mumford_shah, potts };

/// Univariate Mumford-Shah / Potts model. The jump height s and the jump
/// penalty are linked by gamma = alpha s^p / p; alpha is unused by the 1-D
/// Potts functional.
struct MSModel {
  double alpha = 1.0;
  double gamma = 1.0;
  double p = 2.0;
  double q = 2.0;
  MSMode mode = MSMode::potts;

  double jump_height() const { return std::pow(p * gamma / alpha, 1.0 / p); }

  void validate() const {
    if (!(gamma > 0)) throw ArgumentError("gamma must be positive");
    if (mode == MSMode::mumford_shah && !(alpha > 0)) throw ArgumentError("alpha must be positive");
    if (!(p >= 1) || !(q >= 1)) throw ArgumentError("exponents must be at least 1");
  }
};

struct NeighborhoodSystem {
  std::vector<std::array<int, 2>> directions;
  std::vector<double> weights;

  /// Axes plus both diagonals with the weights that make the discrete
  /// boundary length nearly isotropic.
  static NeighborhoodSystem standard() {
    const double w1 = std::sqrt(2.0) - 1.0;
    const double w2 = 1.0 - std::sqrt(2.0) / 2.0;
    return {{{1, 0}, {0, 1}, {1, 1}, {1, -1}}, {w1, w1, w2, w2}};
  }

  void validate() const {
    if (directions.empty() || directions.size() != weights.size())
      throw ArgumentError("neighborhood needs one weight per direction");
    for (std::size_t s = 0; s < directions.size(); ++s) {
      if (directions[s][0] == 0 && directions[s][1] == 0) throw ArgumentError("zero direction");
      if (!(weights[s] >= 0)) throw ArgumentError("direction weights must be nonnegative");
    }
  }
};

/// Generalized univariate data term (1/q) sum_t w_t sum_i d(x_i, z_{t,i})^q.
/// Plain denoising has a single target f with weight 1; the splitting scheme
/// adds the coupling target with weight mu.
struct LineData {
  ManifoldPtr manifold;
  std::vector<std::vector<Point>> targets;
  std::vector<double> weights;

  int size() const { return targets.empty() ? 0 : static_cast<int>(targets[0].size()); }

  static LineData single(const Signal& f) { return {f.manifold, {f.data}, {1.0}}; }
};

struct MSOptions {
  bool pruning = true;
  /// CPPA schedule for segment problems without a direct solver.
  SolverSchedule cppa{1.0, 1.0, 4000, 1e-12};
  int gs_max_iters = 20000;
  double gs_tol = 1e-12;
  /// Circle Mumford-Shah segments up to this length are solved globally by
  /// enumerating the lifts of the data.
  int circle_enumeration_max = 10;
};

struct SegmentFit {
  double error = 0;
  std::vector<Point> h;
};

inline constexpr double kJumpTol = 1e-12;

namespace detail {

inline double power(double d, double e) { return e == 2.0 ? d * d : e == 1.0 ? d : std::pow(d, e); }

inline double segment_data(const Manifold& m, const LineData& data, int l, const std::vector<Point>& h, double q) {
  double v = 0;
  for (std::size_t t = 0; t < data.targets.size(); ++t)
    for (std::size_t i = 0; i < h.size(); ++i)
      v += data.weights[t] * power(m.dist(h[i], data.targets[t][l + i]), q);
  return v / q;
}

inline double segment_objective(const Manifold& m, const LineData& data, int l, const std::vector<Point>& h,
                                const MSModel& model) {
  double v = segment_data(m, data, l, h, model.q);
  if (model.mode == MSMode::mumford_shah)
    for (std::size_t i = 0; i + 1 < h.size(); ++i) v += model.alpha / model.p * power(m.dist(h[i], h[i + 1]), model.p);
  return v;
}

/// Solves the symmetric tridiagonal system (diag, off) x = rhs in place.
inline void thomas(std::vector<double> diag, const std::vector<double>& off, std::vector<Eigen::VectorXd>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = off[i - 1] / diag[i - 1];
    diag[i] -= w * off[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
}

/// Quadratic segment problem in a vector space (or on a fixed lift of the
/// circle): (1/2) sum W_i |h_i - c_i|^2 + (alpha/2) sum |h_i - h_{i+1}|^2,
/// where c_i is the weighted target average.
inline std::vector<Eigen::VectorXd> quadratic_segment(const std::vector<Eigen::VectorXd>& weighted_rhs,
                                                      double total_weight, double alpha) {
  const std::size_t n = weighted_rhs.size();
  std::vector<double> diag(n, total_weight), off(n > 0 ? n - 1 : 0, -alpha);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    diag[i] += alpha;
    diag[i + 1] += alpha;
  }
  std::vector<Eigen::VectorXd> x = weighted_rhs;
  thomas(diag, off, x);
  return x;
}

inline std::vector<Point> euclidean_segment(const LineData& data, int l, int r, double alpha) {
  const double w = std::accumulate(data.weights.begin(), data.weights.end(), 0.0);
  std::vector<Eigen::VectorXd> rhs;
  for (int i = l; i <= r; ++i) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(data.targets[0][i].size());
    for (std::size_t t = 0; t < data.targets.size(); ++t) b += data.weights[t] * data.targets[t][i];
    rhs.push_back(std::move(b));
  }
  return quadratic_segment(rhs, w, alpha);
}

/// Global circle solve for one target: every lift of the data with unit
/// steps between neighbours gives a quadratic problem; the best lift wins.
inline std::vector<Point> circle_segment_enumerated(const LineData& data, int l, int r, double alpha) {
  const int n = r - l + 1;
  const double w = data.weights[0];
  std::vector<double> lifted(n);
  lifted[0] = data.targets[0][l][0];
  for (int i = 1; i < n; ++i)
    lifted[i] = lifted[i - 1] + wrap_angle(data.targets[0][l + i][0] - data.targets[0][l + i - 1][0]);
  auto energy = [&](const std::vector<Eigen::VectorXd>& h) {
    double v = 0;
    for (int i = 0; i < n; ++i) {
      const double d = wrap_angle(h[i][0] - lifted[i]);
      v += 0.5 * w * d * d;
      if (i + 1 < n) {
        const double e = wrap_angle(h[i + 1][0] - h[i][0]);
        v += 0.5 * alpha * e * e;
      }
    }
    return v;
  };
  std::vector<int> shift(n, 0);
  std::vector<Eigen::VectorXd> rhs(n, Eigen::VectorXd(1)), best;
  double best_val = std::numeric_limits<double>::infinity();
  long combos = 1;
  for (int i = 1; i < n; ++i) combos *= 3;
  for (long c = 0; c < combos; ++c) {
    long code = c;
    int k = 0;
    for (int i = 0; i < n; ++i) {
      if (i > 0) {
        k += static_cast<int>(code % 3) - 1;
        code /= 3;
      }
      rhs[i][0] = w * (lifted[i] + 2 * kPi * k);
    }
    auto h = quadratic_segment(rhs, w, alpha);
    const double v = energy(h);
    if (v < best_val) {
      best_val = v;
      best = std::move(h);
    }
  }
  std::vector<Point> out;
  for (auto& v : best) out.push_back(Point::Constant(1, wrap_angle(v[0])));
  return out;
}

/// Gauss-Seidel for p = q = 2: each sample takes the Riemannian gradient
/// step preconditioned by its local weight, which is exact coordinate
/// minimization in flat coordinates.
inline std::vector<Point> gauss_seidel_segment(const Manifold& m, const LineData& data, int l,
                                               std::vector<Point> h, double alpha, const MSOptions& opt) {
  const int n = static_cast<int>(h.size());
  const double w = std::accumulate(data.weights.begin(), data.weights.end(), 0.0);
  for (int it = 0; it < opt.gs_max_iters; ++it) {
    double gmax = 0;
    for (int i = 0; i < n; ++i) {
      Tangent g = m.zero_tangent();
      for (std::size_t t = 0; t < data.targets.size(); ++t) g += data.weights[t] * m.log(h[i], data.targets[t][l + i]);
      int deg = 0;
      if (i > 0) {
        g += alpha * m.log(h[i], h[i - 1]);
        ++deg;
      }
      if (i + 1 < n) {
        g += alpha * m.log(h[i], h[i + 1]);
        ++deg;
      }
      gmax = std::max(gmax, m.norm(h[i], g));
      h[i] = m.project(m.exp(h[i], g / (w + alpha * deg)));
    }
    if (gmax < opt.gs_tol) break;
  }
  return h;
}

/// Weighted data atom on a segment with target index offset l.
inline Atom segment_data_atom(const LineData& data, std::size_t t, int l, double q) {
  auto z = std::make_shared<const LineData>(data);
  Atom a;
  a.name = "data/" + std::to_string(t);
  a.role = AtomRole::data;
  a.evaluate = [z, t, l, q](const Signal& x) {
    double v = 0;
    for (int i = 0; i < x.size(); ++i) v += power(x.M().dist(x[i], z->targets[t][l + i]), q);
    return z->weights[t] * v / q;
  };
  a.prox = [z, t, l, q](Signal& x, double lambda) {
    for (int i = 0; i < x.size(); ++i) x[i] = prox_data(x.M(), x[i], z->targets[t][l + i], lambda * z->weights[t], q);
  };
  return a;
}

inline std::vector<Point> cppa_segment(const Manifold& m, const LineData& data, int l, std::vector<Point> h,
                                       const MSModel& model, const MSOptions& opt) {
  if (model.p != 1.0 && model.p != 2.0) throw ArgumentError("Mumford-Shah segments support p in {1, 2}");
  if (model.q != 1.0 && model.q != 2.0) throw ArgumentError("Mumford-Shah segments support q in {1, 2}");
  const int n = static_cast<int>(h.size());
  std::vector<Atom> atoms;
  for (std::size_t t = 0; t < data.targets.size(); ++t) atoms.push_back(segment_data_atom(data, t, l, model.q));
  PairKind kind;
  kind.penalty = model.p == 1.0 ? PairPenalty::tv : PairPenalty::quadratic;
  for (int parity = 0; parity < 2; ++parity) {
    std::vector<IndexPair> pairs;
    for (int i = parity; i + 1 < n; i += 2) pairs.push_back({i, i + 1});
    if (!pairs.empty()) atoms.push_back(make_pair_atom("pairs", std::move(pairs), model.alpha, kind));
  }
  Signal x0(data.manifold, std::move(h));
  (void)m;
  return cppa(atoms, x0, opt.cppa).x.data;
}

}  // namespace detail

/// Best approximation error on the inclusive 0-based sample range [l, r]:
/// a constant fit for Potts, an L^q-V^p fit for Mumford-Shah. `warm` seeds
/// the iterative solvers (one point for Potts, r - l + 1 points otherwise).
inline SegmentFit segment_error(const LineData& data, int l, int r, const MSModel& model,
                                const std::vector<Point>* warm = nullptr, const MSOptions& opt = {}) {
  const int n = data.size();
  if (!(0 <= l && l <= r && r < n)) throw ArgumentError("segment bounds out of range");
  const Manifold& m = *data.manifold;
  const int len = r - l + 1;
  SegmentFit fit;
  if (model.mode == MSMode::potts) {
    WeightedSample s;
    std::vector<double> w;
    for (std::size_t t = 0; t < data.targets.size(); ++t)
      for (int i = l; i <= r; ++i) {
        s.points.push_back(data.targets[t][i]);
        w.push_back(data.weights[t]);
      }
    s.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    Point c;
    if (s.points.size() == 1 || (len == 1 && data.targets.size() == 1)) {
      c = data.targets[0][l];
    } else {
      std::optional<Point> init;
      if (warm && !warm->empty()) init = warm->front();
      c = weighted_center(m, s, model.q, init);
    }
    fit.h.assign(len, c);
  } else if (len == 1 && data.targets.size() == 1) {
    fit.h = {data.targets[0][l]};
  } else if (model.p == 2.0 && model.q == 2.0 && m.descriptor().kind == ManifoldKind::euclidean) {
    fit.h = detail::euclidean_segment(data, l, r, model.alpha);
  } else if (model.p == 2.0 && model.q == 2.0 && m.descriptor().kind == ManifoldKind::circle &&
             data.targets.size() == 1 && len <= opt.circle_enumeration_max) {
    fit.h = detail::circle_segment_enumerated(data, l, r, model.alpha);
  } else {
    std::vector<Point> h;
    if (warm && static_cast<int>(warm->size()) == len) {
      h = *warm;
    } else {
      for (int i = l; i <= r; ++i) h.push_back(data.targets[0][i]);
    }
    if (model.p == 2.0 && model.q == 2.0) {
      fit.h = detail::gauss_seidel_segment(m, data, l, std::move(h), model.alpha, opt);
    } else {
      fit.h = detail::cppa_segment(m, data, l, std::move(h), model, opt);
    }
  }
  fit.error = detail::segment_objective(m, data, l, fit.h, model);
  if (!std::isfinite(fit.error)) throw NumericalError("segment error is not finite");
  return fit;
}

inline SegmentFit segment_error(const Signal& f, int l, int r, const MSModel& model,
                                const std::vector<Point>* warm = nullptr, const MSOptions& opt = {}) {
  return segment_error(LineData::single(f), l, r, model, warm, opt);
}

/// Truncated energy (1/q) sum d(x_i, f_i)^q + (alpha/p) sum min(s^p, d^p);
/// Potts mode charges gamma per index with x_i != x_{i+1}.
inline double line_energy(const std::vector<Point>& x, const LineData& data, const MSModel& model) {
  const Manifold& m = *data.manifold;
  if (static_cast<int>(x.size()) != data.size()) throw ArgumentError("signal length mismatch");
  double v = detail::segment_data(m, data, 0, x, model.q);
  const double sp = model.mode == MSMode::mumford_shah ? std::pow(model.jump_height(), model.p) : 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double d = m.dist(x[i], x[i + 1]);
    if (model.mode == MSMode::potts) {
      if (d > kJumpTol) v += model.gamma;
    } else {
      v += model.alpha / model.p * std::min(sp, detail::power(d, model.p));
    }
  }
  return v;
}

inline double ms_energy_1d(const Signal& x, const Signal& f, const MSModel& model) {
  require_same_shape(x, f);
  return line_energy(x.data, LineData::single(f), model);
}

struct DPResult {
  Signal x;
  /// Index i means a jump between samples i and i + 1.
  std::vector<int> jumps;
  double energy = 0;
};

/// Exact univariate solver: B_r = min_l B_{l-1} + gamma + eps_{l,r} with
/// B_0 = -gamma. The candidate l runs downward so each segment fit warm
/// starts from the next shorter one; the full prefix fit chains along r.
/// Pruning stops the l loop once the segment errors alone exceed the best
/// value, which never changes the computed candidates that can still win.
inline std::vector<Point> dp_solve_points(const LineData& data, const MSModel& model, const MSOptions& opt,
                                          std::vector<int>* boundaries, double* energy) {
  const int n = data.size();
  if (n < 1) throw ArgumentError("empty signal");
  const double gamma = model.gamma;
  std::vector<double> b(n + 1, 0.0);
  b[0] = -gamma;
  std::vector<int> start(n + 1, 0);
  std::vector<std::vector<Point>> best_fit(n + 1);
  std::vector<Point> prefix;
  auto extend = [&](const std::vector<Point>& h, const Point& p, bool front) {
    std::vector<Point> w;
    w.reserve(h.size() + 1);
    if (front) w.push_back(p);
    w.insert(w.end(), h.begin(), h.end());
    if (!front) w.push_back(p);
    return w;
  };
  for (int r = 1; r <= n; ++r) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<Point> chain;
    double lower = 0;
    auto consider = [&](int l, SegmentFit&& fit) {
      lower = fit.error;
      const double v = b[l - 1] + gamma + fit.error;
      if (v < best) {
        best = v;
        start[r] = l;
        best_fit[r] = std::move(fit.h);
      }
    };
    auto margin = [&] { return 1e-12 * (1.0 + std::abs(best)); };
    for (int l = r; l >= 2; --l) {
      if (opt.pruning && gamma + lower > best + margin()) break;
      std::vector<Point> warm;
      if (model.mode == MSMode::potts) {
        warm = chain.empty() ? std::vector<Point>{} : std::vector<Point>{chain.front()};
      } else if (!chain.empty()) {
        warm = extend(chain, data.targets[0][l - 1], true);
      }
      SegmentFit fit = segment_error(data, l - 1, r - 1, model, warm.empty() ? nullptr : &warm, opt);
      chain = fit.h;
      consider(l, std::move(fit));
    }
    if (!(opt.pruning && lower > best + margin())) {
      std::vector<Point> warm;
      if (!prefix.empty()) {
        warm = model.mode == MSMode::potts ? std::vector<Point>{prefix.front()}
                                           : extend(prefix, data.targets[0][r - 1], false);
      }
      SegmentFit fit = segment_error(data, 0, r - 1, model, warm.empty() ? nullptr : &warm, opt);
      prefix = fit.h;
      consider(1, std::move(fit));
    } else {
      // Keep the prefix chain identical to an unpruned run.
      std::vector<Point> warm;
      if (!prefix.empty()) {
        warm = model.mode == MSMode::potts ? std::vector<Point>{prefix.front()}
                                           : extend(prefix, data.targets[0][r - 1], false);
      }
      prefix = segment_error(data, 0, r - 1, model, warm.empty() ? nullptr : &warm, opt).h;
    }
    b[r] = best;
  }
  std::vector<Point> x(n);
  std::vector<int> bounds;
  for (int r = n; r > 0;) {
    const int l = start[r];
    for (int i = l; i <= r; ++i) x[i - 1] = best_fit[r][i - l];
    if (l > 1) bounds.push_back(l - 2);
    r = l - 1;
  }
  std::reverse(bounds.begin(), bounds.end());
  if (boundaries) *boundaries = std::move(bounds);
  if (energy) *energy = b[n];
  return x;
}

inline DPResult dp_solve_1d(const Signal& f, const MSModel& model, const MSOptions& opt = {}) {
  model.validate();
  if (f.size() < 1) throw ArgumentError("empty signal");
  DPResult res;
  std::vector<int> bounds;
  res.x = f;
  res.x.data = dp_solve_points(LineData::single(f), model, opt, &bounds, &res.energy);
  if (model.mode == MSMode::potts) {
    res.jumps = std::move(bounds);
  } else {
    const double s = model.jump_height();
    for (int i = 0; i + 1 < f.size(); ++i)
      if (f.M().dist(res.x[i], res.x[i + 1]) > s) res.jumps.push_back(i);
  }
  return res;
}

// --- multivariate --------------------------------------------------------

namespace detail {

/// Pixel index sequences along direction a, one per maximal line.
inline std::vector<std::vector<int>> image_lines(int rows, int cols, std::array<int, 2> a) {
  std::vector<std::vector<int>> lines;
  auto inside = [&](int i, int j) { return i >= 0 && i < rows && j >= 0 && j < cols; };
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      if (inside(i - a[0], j - a[1])) continue;
      std::vector<int> line;
      for (int u = i, v = j; inside(u, v); u += a[0], v += a[1]) line.push_back(u * cols + v);
      lines.push_back(std::move(line));
    }
  return lines;
}

}  // namespace detail

struct MSEnergyParts {
  double data = 0;
  double regularizer = 0;
  /// In-range pixel pairs counted as jumps (d > s, or d > 0 for Potts).
  int jumps = 0;
};

/// (1/q) d^q(x, f) + alpha sum_s omega_s Psi_{a_s}(x); Psi sums the
/// truncated power (Mumford-Shah) or the jump indicator (Potts) over all
/// in-range pixel pairs along a_s.
inline MSEnergyParts ms_energy_parts_2d(const Signal& x, const Signal& f, const MSModel& model,
                                        const NeighborhoodSystem& ns = NeighborhoodSystem::standard()) {
  require_same_shape(x, f);
  ns.validate();
  const Manifold& m = x.M();
  MSEnergyParts e;
  for (int i = 0; i < x.size(); ++i) e.data += detail::power(m.dist(x[i], f[i]), model.q) / model.q;
  const double s_height = model.mode == MSMode::mumford_shah ? model.jump_height() : 0;
  const double sp = std::pow(s_height, model.p);
  for (std::size_t s = 0; s < ns.directions.size(); ++s) {
    const auto a = ns.directions[s];
    double psi = 0;
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) {
        const int u = i + a[0], w = j + a[1];
        if (u < 0 || u >= x.rows || w < 0 || w >= x.cols) continue;
        const double d = m.dist(x.at(u, w), x.at(i, j));
        if (model.mode == MSMode::potts) {
          psi += d > kJumpTol ? 1.0 : 0.0;
          e.jumps += d > kJumpTol;
        } else {
          psi += std::min(sp, detail::power(d, model.p)) / model.p;
          e.jumps += d > s_height;
        }
      }
    e.regularizer += model.alpha * ns.weights[s] * psi;
  }
  return e;
}

inline double ms_energy_2d(const Signal& x, const Signal& f, const MSModel& model,
                           const NeighborhoodSystem& ns = NeighborhoodSystem::standard()) {
  const MSEnergyParts e = ms_energy_parts_2d(x, f, model, ns);
  return e.data + e.regularizer;
}

struct SplitOptions {
  int max_outer = 1000;
  /// Stop once max_s max_pixel d(x_s, x_{s+1}) drops below this.
  double tol = 1e-7;
  /// mu_k = mu0 k^(q+1); a nonpositive value selects 1e-2 alpha.
  double mu0 = 0;
  MSOptions dp;
};

struct SplitResult {
  Signal x;
  std::vector<Signal> splits;
  std::vector<double> disagreement;
  /// Energy of x_1 after every outer iteration, with its jump count.
  std::vector<TraceRow> trace;
  std::vector<int> jumps;
  int iterations = 0;
  bool converged = false;
};

/// Penalty splitting: one copy x_s per direction, each updated by exact
/// univariate solves along its lines with data f and coupling weight mu_k to
/// the previously updated copy (x_R for s = 1).
inline SplitResult splitting_solve_2d(const Signal& f, const MSModel& model,
                                      const NeighborhoodSystem& ns = NeighborhoodSystem::standard(),
                                      const SplitOptions& opt = {}) {
  if (!(model.alpha > 0)) throw ArgumentError("alpha must be positive");
  if (model.mode == MSMode::mumford_shah) model.validate();
  ns.validate();
  const int big_r = static_cast<int>(ns.directions.size());
  const double mu0 = opt.mu0 > 0 ? opt.mu0 : 1e-2 * model.alpha;
  const double s_height = model.mode == MSMode::mumford_shah ? model.jump_height() : 0;
  std::vector<std::vector<std::vector<int>>> lines;
  for (const auto& a : ns.directions) lines.push_back(detail::image_lines(f.rows, f.cols, a));
  SplitResult res;
  res.splits.assign(big_r, f);
  const Manifold& m = f.M();
  for (int k = 1; k <= opt.max_outer; ++k) {
    const double mu = mu0 * std::pow(static_cast<double>(k), model.q + 1.0);
    for (int s = 0; s < big_r; ++s) {
      const Signal& prev = res.splits[s == 0 ? big_r - 1 : s - 1];
      Signal next = res.splits[s];
      MSModel line_model = model;
      line_model.alpha = big_r * ns.weights[s] * model.alpha;
      line_model.gamma = model.mode == MSMode::potts
                             ? line_model.alpha
                             : line_model.alpha * std::pow(s_height, model.p) / model.p;
      const auto& ls = lines[s];
      parallel_for(static_cast<int>(ls.size()), [&](int li) {
        const auto& line = ls[li];
        LineData data{f.manifold, {{}, {}}, {1.0, mu}};
        for (int idx : line) {
          data.targets[0].push_back(f[idx]);
          data.targets[1].push_back(prev[idx]);
        }
        std::vector<Point> out;
        if (line_model.alpha == 0) {
          // No coupling along this direction: pointwise weighted centers.
          for (std::size_t i = 0; i < line.size(); ++i)
            out.push_back(segment_error(data, static_cast<int>(i), static_cast<int>(i), MSModel{1, 1, 2, model.q, MSMode::potts}, nullptr, opt.dp).h[0]);
        } else {
          out = dp_solve_points(data, line_model, opt.dp, nullptr, nullptr);
        }
        for (std::size_t i = 0; i < line.size(); ++i) next[line[i]] = out[i];
      }, 1);
      res.splits[s] = std::move(next);
    }
    double dis = 0;
    for (int s = 0; s < big_r; ++s) {
      const Signal& a = res.splits[s];
      const Signal& b = res.splits[(s + 1) % big_r];
      for (int i = 0; i < f.size(); ++i) dis = std::max(dis, m.dist(a[i], b[i]));
    }
    res.disagreement.push_back(dis);
    const MSEnergyParts e = ms_energy_parts_2d(res.splits[0], f, model, ns);
    res.trace.push_back({k, e.data, e.regularizer});
    res.jumps.push_back(e.jumps);
    res.iterations = k;
    if (dis <= opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.x = res.splits[0];
  return res;
}

// --- atoms for proximal engines -------------------------------------------

/// Pairwise atom for the truncated Mumford-Shah penalty weight*(1/p)min(s^p,
/// d^p) or the Potts penalty weight*[x_i != x_j]. The prox of a minimum of
/// two functions is the better of their proxes: the plain power prox versus
/// leaving the pair alone (constant cost), or for Potts merging to the
/// midpoint versus leaving it.
inline Atom make_ms_pair_atom(std::string name, std::vector<IndexPair> pairs, double weight, const MSModel& model) {
  auto shared = std::make_shared<const std::vector<IndexPair>>(std::move(pairs));
  const double sp = model.mode == MSMode::mumford_shah ? std::pow(model.jump_height(), model.p) : 0;
  auto penalty = [model, sp](double d) {
    if (model.mode == MSMode::potts) return d > kJumpTol ? 1.0 : 0.0;
    return std::min(sp, detail::power(d, model.p)) / model.p;
  };
  Atom a;
  a.name = std::move(name);
  for (auto [i, j] : *shared) {
    a.footprint.push_back(i);
    a.footprint.push_back(j);
  }
  a.evaluate = [shared, weight, penalty](const Signal& x) {
    double v = 0;
    for (auto [i, j] : *shared) v += penalty(x.M().dist(x[i], x[j]));
    return weight * v;
  };
  a.prox = [shared, weight, penalty, model](Signal& x, double lambda) {
    const Manifold& m = x.M();
    parallel_for(static_cast<int>(shared->size()), [&](int k) {
      const auto [i, j] = (*shared)[k];
      const double d = m.dist(x[i], x[j]);
      const double keep = lambda * weight * penalty(d);
      std::pair<Point, Point> moved;
      if (model.mode == MSMode::potts) {
        const Point c = m.midpoint(x[i], x[j]);
        moved = {c, c};
      } else if (model.p == 1.0) {
        moved = prox_pair(m, x[i], x[j], lambda, weight);
      } else if (model.p == 2.0) {
        moved = prox_pair_quadratic(m, x[i], x[j], lambda, weight);
      } else {
        throw ArgumentError("Mumford-Shah atoms support p in {1, 2}");
      }
      const double e1 = m.dist(moved.first, x[i]), e2 = m.dist(moved.second, x[j]);
      const double move = 0.5 * (e1 * e1 + e2 * e2) + lambda * weight * penalty(m.dist(moved.first, moved.second));
      if (move < keep) {
        x[i] = std::move(moved.first);
        x[j] = std::move(moved.second);
      }
    });
  };
  return a;
}

/// Regularizer atoms for Mumford-Shah / Potts: 1-D pairs by parity, images
/// by direction and parity along each line, weighted alpha * omega_s (1-D:
/// alpha for Mumford-Shah, gamma for Potts).
inline std::vector<Atom> ms_atoms(const Signal& shape, const MSModel& model,
                                  const NeighborhoodSystem& ns = NeighborhoodSystem::standard()) {
  std::vector<Atom> atoms;
  if (!shape.is_image) {
    const double w = model.mode == MSMode::potts ? model.gamma : model.alpha;
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<IndexPair> pairs;
      for (int i = parity; i + 1 < shape.size(); i += 2) pairs.push_back({i, i + 1});
      if (!pairs.empty()) atoms.push_back(make_ms_pair_atom("ms/" + std::to_string(parity), std::move(pairs), w, model));
    }
    return atoms;
  }
  ns.validate();
  for (std::size_t s = 0; s < ns.directions.size(); ++s) {
    if (ns.weights[s] == 0) continue;
    const auto ls = detail::image_lines(shape.rows, shape.cols, ns.directions[s]);
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<IndexPair> pairs;
      for (const auto& line : ls)
        for (std::size_t i = parity; i + 1 < line.size(); i += 2) pairs.push_back({line[i], line[i + 1]});
      if (!pairs.empty())
        atoms.push_back(make_ms_pair_atom("ms/" + std::to_string(s) + "/" + std::to_string(parity), std::move(pairs),
                                          model.alpha * ns.weights[s], model));
    }
  }
  return atoms;
}

}  // namespace mvr
