#pragma once

#include "mvr/manifolds.hpp"
#include "mvr/schedule.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace mvr {

/// Points with real weights. Weights may be negative (signed operator rows)
/// but must not sum to zero.
struct WeightedSample {
  std::vector<Point> points;
  Eigen::VectorXd weights;

  static WeightedSample uniform(std::vector<Point> pts) {
    WeightedSample s;
    const int n = static_cast<int>(pts.size());
    s.points = std::move(pts);
    s.weights = Eigen::VectorXd::Constant(n, n ? 1.0 / n : 0.0);
    return s;
  }
};

struct MeanOptions {
  int max_iters = 100;
  double tol = 1e-10;
  std::optional<Point> init;
  /// When false a non-converged run returns its last iterate instead of
  /// throwing.
  bool strict = true;

  static MeanOptions from(const SolverSchedule& s) {
    MeanOptions o;
    o.max_iters = s.max_iters;
    o.tol = s.tol;
    return o;
  }
};

namespace detail {

inline void check_sample(const WeightedSample& s) {
  if (s.points.empty()) throw ArgumentError("empty sample");
  if (static_cast<int>(s.points.size()) != s.weights.size())
    throw ArgumentError("sample and weight lengths differ");
}

inline int largest_weight(const WeightedSample& s) {
  int k = 0;
  s.weights.maxCoeff(&k);
  return k;
}

}  // namespace detail

/// Weighted objective sum_j w_j d(x, z_j)^q / q.
inline double center_objective(const Manifold& m, const WeightedSample& s, const Point& x, double q) {
  double v = 0;
  for (std::size_t j = 0; j < s.points.size(); ++j)
    v += s.weights[j] * std::pow(m.dist(x, s.points[j]), q) / q;
  return v;
}

/// Riemannian gradient direction of -1/2 sum w_j d^2 (normalized weights).
inline Tangent mean_field(const Manifold& m, const WeightedSample& s, const Point& x) {
  Tangent g = m.zero_tangent();
  const double total = s.weights.sum();
  for (std::size_t j = 0; j < s.points.size(); ++j) {
    if (s.weights[j] != 0.0) g += (s.weights[j] / total) * m.log(x, s.points[j]);
  }
  return g;
}

/// Weighted Karcher mean by gradient descent with unit step. Signed weights
/// use step halving until the objective decreases.
inline Point karcher_mean(const Manifold& m, const WeightedSample& s, const MeanOptions& opt = {}) {
  detail::check_sample(s);
  const double total = s.weights.sum();
  if (std::abs(total) < 1e-14) throw ArgumentError("weights sum to zero");
  if (s.points.size() == 1) return s.points[0];
  const bool signed_weights = (s.weights.array() < 0).any();
  Point h = opt.init ? *opt.init : s.points[detail::largest_weight(s)];
  double gnorm = 0;
  for (int it = 0; it <= opt.max_iters; ++it) {
    const Tangent g = mean_field(m, s, h);
    gnorm = m.norm(h, g);
    if (gnorm <= opt.tol) return h;
    if (it == opt.max_iters) break;
    if (!signed_weights) {
      h = m.project(m.exp(h, g));
      continue;
    }
    const double f0 = center_objective(m, s, h, 2.0) / total;
    double step = 1.0;
    Point next = m.project(m.exp(h, g));
    // Near the solution objective differences drown in rounding; a shrinking
    // gradient is then the better acceptance test.
    auto accept = [&](const Point& x) {
      return center_objective(m, s, x, 2.0) / total <= f0 || m.norm(x, mean_field(m, s, x)) < 0.5 * gnorm;
    };
    while (!accept(next) && step > 1e-12) {
      step *= 0.5;
      next = m.project(m.exp(h, step * g));
    }
    if (step <= 1e-12) break;
    h = next;
  }
  if (opt.strict) throw ConvergenceError("karcher_mean did not converge", h, gnorm);
  return h;
}

inline Point karcher_mean(const Manifold& m, const WeightedSample& s, const SolverSchedule& sched) {
  return karcher_mean(m, s, MeanOptions::from(sched));
}

struct MedianOptions {
  int max_iters = 2000;
  double tol = 1e-13;
  std::optional<Point> init;
};

/// Weighted intrinsic median (minimizer of sum w_j d(x, z_j)) for nonnegative
/// weights, via Weiszfeld steps: each step moves along the subgradient
/// rescaled by sum w_j / d_j. Sample points contribute zero when the iterate
/// sits on them. The best iterate seen, including every sample point, wins.
inline Point intrinsic_median(const Manifold& m, const WeightedSample& s, const MedianOptions& opt = {}) {
  detail::check_sample(s);
  if ((s.weights.array() < 0).any()) throw ArgumentError("median weights must be nonnegative");
  if (s.points.size() == 1) return s.points[0];
  Point best = s.points[0];
  double best_val = center_objective(m, s, best, 1.0);
  for (std::size_t j = 1; j < s.points.size(); ++j) {
    const double v = center_objective(m, s, s.points[j], 1.0);
    if (v < best_val) {
      best_val = v;
      best = s.points[j];
    }
  }
  Point h = opt.init ? *opt.init : best;
  if (opt.init) {
    const double v = center_objective(m, s, h, 1.0);
    if (v < best_val) {
      best_val = v;
      best = h;
    }
  }
  for (int it = 0; it < opt.max_iters; ++it) {
    Tangent g = m.zero_tangent();
    double denom = 0;
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      const double d = m.dist(h, s.points[j]);
      if (d < 1e-15 || s.weights[j] == 0.0) continue;
      g += (s.weights[j] / d) * m.log(h, s.points[j]);
      denom += s.weights[j] / d;
    }
    if (denom == 0.0) break;
    const Tangent step = g / denom;
    h = m.project(m.exp(h, step));
    const double v = center_objective(m, s, h, 1.0);
    if (v < best_val) {
      best_val = v;
      best = h;
    }
    if (m.norm(h, step) <= opt.tol) break;
  }
  return best;
}

inline Point intrinsic_median(const Manifold& m, const WeightedSample& s, const SolverSchedule& sched) {
  MedianOptions o;
  o.max_iters = std::max(sched.max_iters, 1);
  return intrinsic_median(m, s, o);
}

/// Approximate mean by left-to-right geodesic averaging:
/// m_1 = z_1, m_j = [m_{j-1}, z_j]_{w_j / (w_1 + ... + w_j)}.
inline Point mean_approx_geodesic(const Manifold& m, const WeightedSample& s) {
  detail::check_sample(s);
  Point acc = s.points[0];
  double cum = s.weights[0];
  for (std::size_t j = 1; j < s.points.size(); ++j) {
    cum += s.weights[j];
    if (std::abs(cum) < 1e-14) throw ArgumentError("partial weight sum vanishes");
    acc = m.geopoint(acc, s.points[j], s.weights[j] / cum);
  }
  return acc;
}

/// Global weighted Frechet mean on the circle. Every local minimizer is the
/// wrapped arithmetic mean of some rotation of the sorted angles, so checking
/// all K rotations and refining the best one finds the global minimum.
inline Point circle_global_mean(const WeightedSample& s) {
  detail::check_sample(s);
  if ((s.weights.array() < 0).any()) throw ArgumentError("circle mean needs nonnegative weights");
  const int k = static_cast<int>(s.points.size());
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> a(k);
  for (int j = 0; j < k; ++j) a[j] = wrap_angle(s.points[j][0]);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x] < a[y] || (a[x] == a[y] && x < y); });
  const double total = s.weights.sum();
  if (total <= 0) throw ArgumentError("weights sum to zero");
  double moment = 0;
  for (int j = 0; j < k; ++j) moment += s.weights[j] * a[j];
  auto objective = [&](double h) {
    double v = 0;
    for (int j = 0; j < k; ++j) {
      const double d = wrap_angle(a[j] - h);
      v += s.weights[j] * d * d;
    }
    return v;
  };
  double best = wrap_angle(moment / total), best_val = objective(best);
  for (int r = 0; r < k; ++r) {
    // Lift the r smallest angles by a full turn.
    moment += 2 * kPi * s.weights[order[r]];
    const double h = wrap_angle(moment / total);
    const double v = objective(h);
    if (v < best_val) {
      best_val = v;
      best = h;
    }
  }
  // Exact stationary point of the branch containing `best`.
  double acc = 0;
  for (int j = 0; j < k; ++j) acc += s.weights[j] * wrap_angle(a[j] - best);
  const double refined = wrap_angle(best + acc / total);
  Point out(1);
  out[0] = objective(refined) <= best_val ? refined : best;
  return out;
}

/// Minimizer of sum w_j d(x, z_j)^q / q for any q >= 1; q = 1 and q = 2 use
/// the median and mean, other exponents gradient descent with backtracking.
inline Point weighted_center(const Manifold& m, const WeightedSample& s, double q,
                             std::optional<Point> init = std::nullopt) {
  if (q == 2.0) {
    if (m.descriptor().kind == ManifoldKind::circle && (s.weights.array() >= 0).all())
      return circle_global_mean(s);
    MeanOptions o;
    o.init = init;
    o.strict = false;
    o.max_iters = 500;
    return karcher_mean(m, s, o);
  }
  if (q == 1.0) {
    MedianOptions o;
    o.init = init;
    return intrinsic_median(m, s, o);
  }
  if (q < 1.0) throw ArgumentError("exponent q must be at least 1");
  detail::check_sample(s);
  Point h = init ? *init : karcher_mean(m, s, MeanOptions{200, 1e-12, std::nullopt, false});
  double f = center_objective(m, s, h, q);
  double step = 1.0;
  for (int it = 0; it < 2000; ++it) {
    Tangent g = m.zero_tangent();
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      const double d = m.dist(h, s.points[j]);
      if (d < 1e-15) continue;
      g += s.weights[j] * std::pow(d, q - 2.0) * m.log(h, s.points[j]);
    }
    const double gn = m.norm(h, g);
    if (gn < 1e-13) break;
    step = std::min(1.0, 2.0 * step);
    Point next = m.project(m.exp(h, step * g));
    double fn = center_objective(m, s, next, q);
    while (fn > f - 1e-4 * step * gn * gn && step > 1e-14) {
      step *= 0.5;
      next = m.project(m.exp(h, step * g));
      fn = center_objective(m, s, next, q);
    }
    if (step <= 1e-14) break;
    h = next;
    f = fn;
  }
  return h;
}

}  // namespace mvr
