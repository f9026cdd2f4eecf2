#pragma once

#include "mvr/atoms.hpp"
#include "mvr/prox.hpp"

namespace mvr {

/// q: data exponent. p: inner coupling of the two image differences.
/// diagonal_differences adds diagonal and anti-diagonal pairs with weight
/// 1/sqrt(2).
struct TVModel {
  double alpha = 1.0;
  double q = 2.0;
  double p = 1.0;
  bool diagonal_differences = false;
};

enum class PairPenalty { tv, quadratic, huber };

/// Pair penalty value: alpha d (tv), alpha d^2 / 2 (quadratic) or
/// alpha huber(d).
struct PairKind {
  PairPenalty penalty = PairPenalty::tv;
  double omega = 1.0;
  double tau = 1.0;

  double value(double d) const {
    switch (penalty) {
      case PairPenalty::tv: return d;
      case PairPenalty::quadratic: return 0.5 * d * d;
      case PairPenalty::huber: return huber(d, omega, tau);
    }
    return d;
  }
};

using IndexPair = std::pair<int, int>;

/// Atom over disjoint pairs with the closed-form pair prox.
inline Atom make_pair_atom(std::string name, std::vector<IndexPair> pairs, double alpha, PairKind kind = {}) {
  auto shared = std::make_shared<const std::vector<IndexPair>>(std::move(pairs));
  Atom a;
  a.name = std::move(name);
  for (auto [i, j] : *shared) {
    a.footprint.push_back(i);
    a.footprint.push_back(j);
  }
  a.evaluate = [shared, alpha, kind](const Signal& x) {
    double s = 0;
    for (auto [i, j] : *shared) s += kind.value(x.M().dist(x[i], x[j]));
    return alpha * s;
  };
  a.prox = [shared, alpha, kind](Signal& x, double lambda) {
    const Manifold& m = x.M();
    parallel_for(static_cast<int>(shared->size()), [&](int k) {
      const auto [i, j] = (*shared)[k];
      std::pair<Point, Point> r;
      switch (kind.penalty) {
        case PairPenalty::tv: r = prox_pair(m, x[i], x[j], lambda, alpha); break;
        case PairPenalty::quadratic: r = prox_pair_quadratic(m, x[i], x[j], lambda, alpha); break;
        case PairPenalty::huber: r = prox_pair_huber(m, x[i], x[j], lambda, alpha, kind.omega, kind.tau); break;
      }
      x[i] = std::move(r.first);
      x[j] = std::move(r.second);
    });
  };
  a.gradient = [shared, alpha, kind](const Signal& x, std::vector<Tangent>& g) {
    const Manifold& m = x.M();
    for (auto [i, j] : *shared) {
      const Tangent l = m.log(x[i], x[j]);
      const double d = m.norm(x[i], l);
      if (d == 0) continue;
      double slope = 1.0;
      if (kind.penalty == PairPenalty::quadratic) slope = d;
      if (kind.penalty == PairPenalty::huber) slope = d <= kind.tau ? kind.omega * d / kind.tau : kind.omega;
      g[i] -= alpha * slope / d * l;
      g[j] -= alpha * slope / d * m.log(x[j], x[i]);
    }
  };
  return a;
}

inline double data_energy(const Signal& x, const Signal& f, double q) {
  require_same_shape(x, f);
  double s = 0;
  for (int i = 0; i < x.size(); ++i) s += std::pow(x.M().dist(x[i], f[i]), q) / q;
  return s;
}

inline double tv_energy_1d(const Signal& x, const Signal& f, const TVModel& model) {
  require_same_shape(x, f);
  double reg = 0;
  for (int i = 0; i + 1 < x.size(); ++i) reg += x.M().dist(x[i], x[i + 1]);
  return data_energy(x, f, model.q) + model.alpha * reg;
}

/// Regularizer part of the bivariate TV: out-of-range differences are 0.
inline double tv_regularizer_2d(const Signal& x, const TVModel& model) {
  const Manifold& m = x.M();
  double reg = 0;
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j < x.cols; ++j) {
      const double dx = i + 1 < x.rows ? m.dist(x.at(i, j), x.at(i + 1, j)) : 0.0;
      const double dy = j + 1 < x.cols ? m.dist(x.at(i, j), x.at(i, j + 1)) : 0.0;
      reg += model.p == 1.0 ? dx + dy : std::pow(std::pow(dx, model.p) + std::pow(dy, model.p), 1.0 / model.p);
      if (model.diagonal_differences && i + 1 < x.rows) {
        double diag = 0;
        if (j + 1 < x.cols) diag += m.dist(x.at(i, j), x.at(i + 1, j + 1));
        if (j >= 1) diag += m.dist(x.at(i, j), x.at(i + 1, j - 1));
        reg += diag / std::sqrt(2.0);
      }
    }
  }
  return model.alpha * reg;
}

inline double tv_energy_2d(const Signal& x, const Signal& f, const TVModel& model) {
  require_same_shape(x, f);
  return data_energy(x, f, model.q) + tv_regularizer_2d(x, model);
}

inline double tv_energy(const Signal& x, const Signal& f, const TVModel& model) {
  return f.is_image ? tv_energy_2d(x, f, model) : tv_energy_1d(x, f, model);
}

namespace detail {

/// Coupled term alpha (dx^2 + dy^2)^{1/2} on samples (a, below, right).
inline Term coupled_tv_term(std::vector<int> fp, double alpha, const Manifold* m) {
  Term t;
  t.footprint = std::move(fp);
  const bool has_b = t.footprint[1] >= 0, has_c = t.footprint[2] >= 0;
  std::vector<int> compact{t.footprint[0]};
  if (has_b) compact.push_back(t.footprint[1]);
  if (has_c) compact.push_back(t.footprint[2]);
  t.footprint = compact;
  t.value = [=](const std::vector<Point>& h) {
    double s = 0;
    for (std::size_t l = 1; l < h.size(); ++l) {
      const double d = m->dist(h[0], h[l]);
      s += d * d;
    }
    return alpha * std::sqrt(s);
  };
  t.subgradient = [=](const std::vector<Point>& h, std::vector<Tangent>& g) {
    double s = 0;
    for (std::size_t l = 1; l < h.size(); ++l) {
      const double d = m->dist(h[0], h[l]);
      s += d * d;
    }
    if (s == 0) return;
    const double c = alpha / std::sqrt(s);
    for (std::size_t l = 1; l < h.size(); ++l) {
      g[0] -= c * m->log(h[0], h[l]);
      g[l] -= c * m->log(h[l], h[0]);
    }
  };
  return t;
}

}  // namespace detail

/// Splitting of the TV functional: a pixelwise data atom plus pair atoms
/// whose pairs are disjoint within each atom. 1-D: pairs (0,1),(2,3),...
/// and (1,2),(3,4),... 2-D with p = 1: vertical and horizontal pairs split
/// by parity of the first index. 2-D with p = 2: coupled terms grouped by
/// (i mod 2, j mod 2), with an inner subgradient prox.
inline std::vector<Atom> tv_atoms(const Signal& f, const TVModel& model, PairKind kind = {}) {
  if (!(model.alpha >= 0) || !std::isfinite(model.alpha)) throw ArgumentError("alpha must be finite and nonnegative");
  if (!(model.q >= 1)) throw ArgumentError("q must be at least 1");
  std::vector<Atom> atoms{make_data_atom(f, model.q)};
  if (!f.is_image) {
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<IndexPair> pairs;
      for (int i = parity; i + 1 < f.size(); i += 2) pairs.emplace_back(i, i + 1);
      atoms.push_back(make_pair_atom(parity ? "pairs/odd" : "pairs/even", std::move(pairs), model.alpha, kind));
    }
    return atoms;
  }
  const int rows = f.rows, cols = f.cols;
  auto id = [cols](int i, int j) { return i * cols + j; };
  if (model.p == 1.0 || kind.penalty != PairPenalty::tv) {
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<IndexPair> vert, horiz;
      for (int i = parity; i + 1 < rows; i += 2)
        for (int j = 0; j < cols; ++j) vert.emplace_back(id(i, j), id(i + 1, j));
      for (int i = 0; i < rows; ++i)
        for (int j = parity; j + 1 < cols; j += 2) horiz.emplace_back(id(i, j), id(i, j + 1));
      atoms.push_back(make_pair_atom("vertical/" + std::to_string(parity), std::move(vert), model.alpha, kind));
      atoms.push_back(make_pair_atom("horizontal/" + std::to_string(parity), std::move(horiz), model.alpha, kind));
    }
  } else {
    for (int pi = 0; pi < 2; ++pi) {
      for (int pj = 0; pj < 2; ++pj) {
        std::vector<Term> terms;
        for (int i = pi; i < rows; i += 2) {
          for (int j = pj; j < cols; j += 2) {
            if (i + 1 >= rows && j + 1 >= cols) continue;
            terms.push_back(detail::coupled_tv_term(
                {id(i, j), i + 1 < rows ? id(i + 1, j) : -1, j + 1 < cols ? id(i, j + 1) : -1}, model.alpha,
                f.manifold.get()));
          }
        }
        atoms.push_back(make_term_atom("coupled/" + std::to_string(pi) + std::to_string(pj), std::move(terms)));
      }
    }
  }
  if (model.diagonal_differences) {
    const double w = model.alpha / std::sqrt(2.0);
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<IndexPair> diag, anti;
      for (int i = parity; i + 1 < rows; i += 2) {
        for (int j = 0; j + 1 < cols; ++j) {
          diag.emplace_back(id(i, j), id(i + 1, j + 1));
          anti.emplace_back(id(i, j + 1), id(i + 1, j));
        }
      }
      atoms.push_back(make_pair_atom("diagonal/" + std::to_string(parity), std::move(diag), w, kind));
      atoms.push_back(make_pair_atom("antidiagonal/" + std::to_string(parity), std::move(anti), w, kind));
    }
  }
  return atoms;
}

enum class Engine { cppa, pppa, fbs, fbs_traj };

inline SolveResult run_prox_engine(const std::vector<Atom>& atoms, const Signal& f, Engine engine,
                                   const SolverSchedule& s, MeanMode mean = MeanMode::exact) {
  switch (engine) {
    case Engine::cppa: return cppa(atoms, f, s, &f);
    case Engine::pppa: return pppa(atoms, f, s, mean, &f);
    default: throw ArgumentError("denoising supports the cppa and pppa engines");
  }
}

inline SolveResult denoise_tv(const Signal& f, const TVModel& model, Engine engine, const SolverSchedule& s,
                              MeanMode mean = MeanMode::exact) {
  return run_prox_engine(tv_atoms(f, model), f, engine, s, mean);
}

/// alpha / 2 sum d^2 regularization.
inline SolveResult denoise_h1(const Signal& f, double alpha, double q, Engine engine, const SolverSchedule& s) {
  TVModel model{alpha, q, 1.0, false};
  return run_prox_engine(tv_atoms(f, model, {PairPenalty::quadratic}), f, engine, s);
}

inline SolveResult denoise_huber(const Signal& f, double alpha, double omega, double tau, double q, Engine engine,
                                 const SolverSchedule& s) {
  TVModel model{alpha, q, 1.0, false};
  return run_prox_engine(tv_atoms(f, model, {PairPenalty::huber, omega, tau}), f, engine, s);
}

}  // namespace mvr
