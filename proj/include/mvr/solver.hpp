#pragma once

#include "mvr/parallel.hpp"
#include "mvr/schedule.hpp"
#include "mvr/signal.hpp"
#include "mvr/stats.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <string>

namespace mvr {

enum class AtomRole { data, regularizer };

/// One summand of a split objective. An atom may expose a proximal map, a
/// (sub)gradient, or both. Gradients are accumulated into a per-sample field
/// so several atoms can share one buffer.
struct Atom {
  std::string name;
  AtomRole role = AtomRole::regularizer;
  std::vector<int> footprint;
  std::function<double(const Signal&)> evaluate;
  std::function<void(Signal&, double)> prox;
  std::function<void(const Signal&, std::vector<Tangent>&)> gradient;

  bool proximable() const { return static_cast<bool>(prox); }
  bool differentiable() const { return static_cast<bool>(gradient); }
};

struct TraceRow {
  int iteration = 0;
  double data = 0;
  double regularizer = 0;
  double total() const { return data + regularizer; }
};

struct SolveResult {
  Signal x;
  std::vector<TraceRow> trace;
  int iterations = 0;
  bool converged = false;
};

inline TraceRow evaluate_atoms(const std::vector<Atom>& atoms, const Signal& x, int iteration = 0) {
  TraceRow row;
  row.iteration = iteration;
  for (const Atom& a : atoms) {
    const double v = a.evaluate(x);
    (a.role == AtomRole::data ? row.data : row.regularizer) += v;
  }
  return row;
}

inline double total_energy(const std::vector<Atom>& atoms, const Signal& x) {
  return evaluate_atoms(atoms, x).total();
}

/// Relative iterate change used as the stopping criterion.
inline double relative_change(const Signal& next, const Signal& prev, const Signal& reference) {
  return mean_dist(next, prev) / (1.0 + mean_dist(prev, reference));
}

inline std::vector<Tangent> zero_field(const Signal& x) {
  return std::vector<Tangent>(x.size(), x.M().zero_tangent());
}

/// x_i <- exp_{x_i}(-step g_i) for every sample with a nonzero field entry.
inline void descend(Signal& x, const std::vector<Tangent>& g, double step) {
  for (int i = 0; i < x.size(); ++i) {
    if (!g[i].isZero(0.0)) x[i] = x.M().project(x.M().exp(x[i], -step * g[i]));
  }
}

inline double field_norm2(const Signal& x, const std::vector<Tangent>& g) {
  double s = 0;
  for (int i = 0; i < x.size(); ++i) s += x.M().inner(x[i], g[i], g[i]);
  return s;
}

namespace detail {

inline std::vector<int> cycle_order(std::size_t n, const SolverSchedule& s, std::mt19937_64& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (s.order == AtomOrder::shuffled) std::shuffle(order.begin(), order.end(), rng);
  return order;
}

inline void require_prox(const std::vector<Atom>& atoms) {
  if (atoms.empty()) throw ArgumentError("no atoms given");
  for (const Atom& a : atoms)
    if (!a.proximable()) throw ArgumentError("atom '" + a.name + "' has no proximal map");
}

}  // namespace detail

/// Cyclic proximal point algorithm: each cycle applies every atom's prox with
/// step lambda_k, feeding outputs forward.
inline SolveResult cppa(const std::vector<Atom>& atoms, const Signal& x0, const SolverSchedule& s,
                        const Signal* reference = nullptr) {
  detail::require_prox(atoms);
  s.validate();
  SolveResult r{x0, {evaluate_atoms(atoms, x0, 0)}, 0, false};
  if (s.lambda0 == 0.0) {
    r.converged = true;
    return r;
  }
  const Signal& ref = reference ? *reference : x0;
  std::mt19937_64 rng(s.rng_seed);
  for (int k = 1; k <= s.max_iters; ++k) {
    const double lambda = s.lambda(k);
    Signal prev = r.x;
    for (int a : detail::cycle_order(atoms.size(), s, rng)) atoms[a].prox(r.x, lambda);
    r.iterations = k;
    r.trace.push_back(evaluate_atoms(atoms, r.x, k));
    if (relative_change(r.x, prev, ref) < s.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

enum class MeanMode { exact, approx };

/// Parallel proximal point algorithm: all proxes act on the same iterate and
/// the results are averaged pixelwise by an intrinsic mean.
inline SolveResult pppa(const std::vector<Atom>& atoms, const Signal& x0, const SolverSchedule& s,
                        MeanMode mode = MeanMode::exact, const Signal* reference = nullptr) {
  detail::require_prox(atoms);
  s.validate();
  SolveResult r{x0, {evaluate_atoms(atoms, x0, 0)}, 0, false};
  if (s.lambda0 == 0.0) {
    r.converged = true;
    return r;
  }
  const Signal& ref = reference ? *reference : x0;
  const int count = static_cast<int>(atoms.size());
  std::vector<Signal> outs(count, x0);
  for (int k = 1; k <= s.max_iters; ++k) {
    const double lambda = s.lambda(k);
    parallel_for(count, [&](int a) {
      outs[a] = r.x;
      atoms[a].prox(outs[a], lambda);
    }, 1);
    Signal next = r.x;
    const Manifold& m = r.x.M();
    parallel_for(r.x.size(), [&](int i) {
      WeightedSample ws;
      ws.points.reserve(count);
      for (int a = 0; a < count; ++a) ws.points.push_back(outs[a][i]);
      ws = WeightedSample::uniform(std::move(ws.points));
      if (mode == MeanMode::approx) {
        next[i] = mean_approx_geodesic(m, ws);
      } else {
        MeanOptions o;
        o.strict = false;
        o.init = r.x[i];
        next[i] = karcher_mean(m, ws, o);
      }
    });
    const double change = relative_change(next, r.x, ref);
    r.x = std::move(next);
    r.iterations = k;
    r.trace.push_back(evaluate_atoms(atoms, r.x, k));
    if (change < s.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

/// Riemannian subgradient descent x <- exp_x(-lambda_k g). Returns the best
/// iterate seen.
inline SolveResult subgradient_descent(const std::vector<Atom>& atoms, const Signal& x0,
                                       const SolverSchedule& s) {
  for (const Atom& a : atoms)
    if (!a.differentiable()) throw ArgumentError("atom '" + a.name + "' has no gradient");
  s.validate();
  SolveResult r{x0, {evaluate_atoms(atoms, x0, 0)}, 0, false};
  if (atoms.empty()) {
    r.converged = true;
    return r;
  }
  Signal x = x0;
  double best = r.trace[0].total();
  for (int k = 1; k <= s.max_iters; ++k) {
    std::vector<Tangent> g = zero_field(x);
    for (const Atom& a : atoms) a.gradient(x, g);
    if (field_norm2(x, g) == 0.0) {
      r.converged = true;
      break;
    }
    descend(x, g, s.lambda(k));
    r.iterations = k;
    TraceRow row = evaluate_atoms(atoms, x, k);
    r.trace.push_back(row);
    if (row.total() < best) {
      best = row.total();
      r.x = x;
    }
  }
  return r;
}

/// Forward-backward splitting: one Jacobi gradient step on the summed data
/// atoms followed by prox sweeps over the regularizer atoms.
inline SolveResult fbs(const std::vector<Atom>& data_atoms, const std::vector<Atom>& reg_atoms,
                       const Signal& x0, const SolverSchedule& s, const Signal* reference = nullptr) {
  for (const Atom& a : data_atoms)
    if (!a.differentiable()) throw ArgumentError("data atom '" + a.name + "' has no gradient");
  for (const Atom& a : reg_atoms)
    if (!a.proximable()) throw ArgumentError("regularizer atom '" + a.name + "' has no prox");
  s.validate();
  std::vector<Atom> all = data_atoms;
  all.insert(all.end(), reg_atoms.begin(), reg_atoms.end());
  SolveResult r{x0, {evaluate_atoms(all, x0, 0)}, 0, false};
  if (s.lambda0 == 0.0) {
    r.converged = true;
    return r;
  }
  const Signal& ref = reference ? *reference : x0;
  std::mt19937_64 rng(s.rng_seed);
  for (int k = 1; k <= s.max_iters; ++k) {
    const double lambda = s.lambda(k);
    Signal prev = r.x;
    std::vector<Tangent> g = zero_field(r.x);
    for (const Atom& a : data_atoms) a.gradient(r.x, g);
    descend(r.x, g, lambda);
    for (int a : detail::cycle_order(reg_atoms.size(), s, rng)) reg_atoms[a].prox(r.x, lambda);
    r.iterations = k;
    r.trace.push_back(evaluate_atoms(all, r.x, k));
    if (relative_change(r.x, prev, ref) < s.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

struct TrajOptions {
  double armijo = 1e-4;
  int max_substeps = 30;
};

/// Descends one differentiable atom along a polygonal geodesic path whose
/// step times add up to at most `budget`. Each sub-step first tries the
/// minimizer of the quadratic model fitted through the full remaining step,
/// then falls back to Armijo backtracking from the remaining budget.
inline void traj_step(const Atom& atom, Signal& x, double budget, const TrajOptions& opt = {}) {
  double remaining = budget;
  double f0 = atom.evaluate(x);
  for (int sub = 0; sub < opt.max_substeps && remaining > 1e-12 * budget; ++sub) {
    std::vector<Tangent> g = zero_field(x);
    atom.gradient(x, g);
    const double g2 = field_norm2(x, g);
    if (g2 <= 1e-30) return;
    auto trial = [&](double step) {
      Signal y = x;
      descend(y, g, step);
      return y;
    };
    double step = remaining;
    Signal y = trial(step);
    double fy = atom.evaluate(y);
    const double curvature = 2.0 * (fy - f0 + step * g2) / (step * step);
    if (curvature > 0) {
      const double star = g2 / curvature;
      if (star < step) {
        Signal z = trial(star);
        const double fz = atom.evaluate(z);
        if (fz <= f0 - opt.armijo * star * g2 && fz <= fy) {
          x = std::move(z);
          f0 = fz;
          remaining -= star;
          continue;
        }
      }
    }
    while (fy > f0 - opt.armijo * step * g2 && step > 1e-14 * budget) {
      step *= 0.5;
      y = trial(step);
      fy = atom.evaluate(y);
    }
    if (fy > f0) return;
    x = std::move(y);
    f0 = fy;
    remaining -= step;
  }
}

/// Forward-backward splitting with Gauss-Seidel data sweeps: every data atom
/// takes a trajectory step in turn, then the regularizer proxes run.
inline SolveResult fbs_traj(const std::vector<Atom>& data_atoms, const std::vector<Atom>& reg_atoms,
                            const Signal& x0, const SolverSchedule& s,
                            const Signal* reference = nullptr, const TrajOptions& opt = {}) {
  for (const Atom& a : data_atoms)
    if (!a.differentiable()) throw ArgumentError("data atom '" + a.name + "' has no gradient");
  for (const Atom& a : reg_atoms)
    if (!a.proximable()) throw ArgumentError("regularizer atom '" + a.name + "' has no prox");
  s.validate();
  std::vector<Atom> all = data_atoms;
  all.insert(all.end(), reg_atoms.begin(), reg_atoms.end());
  SolveResult r{x0, {evaluate_atoms(all, x0, 0)}, 0, false};
  if (s.lambda0 == 0.0) {
    r.converged = true;
    return r;
  }
  const Signal& ref = reference ? *reference : x0;
  std::mt19937_64 rng(s.rng_seed);
  for (int k = 1; k <= s.max_iters; ++k) {
    const double lambda = s.lambda(k);
    Signal prev = r.x;
    for (int a : detail::cycle_order(data_atoms.size(), s, rng)) traj_step(data_atoms[a], r.x, lambda, opt);
    for (int a : detail::cycle_order(reg_atoms.size(), s, rng)) reg_atoms[a].prox(r.x, lambda);
    r.iterations = k;
    r.trace.push_back(evaluate_atoms(all, r.x, k));
    if (relative_change(r.x, prev, ref) < s.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace mvr
