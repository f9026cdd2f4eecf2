#pragma once

#include "mvr/prox.hpp"
#include "mvr/solver.hpp"

namespace mvr {

/// A nonsmooth summand acting on a few samples. `value` and `subgradient`
/// see the footprint samples in footprint order; `subgradient` writes one
/// tangent per footprint entry (zero where nondifferentiable).
struct Term {
  std::vector<int> footprint;
  std::function<double(const std::vector<Point>&)> value;
  std::function<void(const std::vector<Point>&, std::vector<Tangent>&)> subgradient;
  /// Optional closed-form prox (x, lambda) -> h; replaces the inner solve.
  std::function<std::vector<Point>(const std::vector<Point>&, double)> prox;
};

struct InnerProxOptions {
  int iterations = 50;
};

namespace detail {

inline std::vector<Point> gather(const Signal& x, const std::vector<int>& idx) {
  std::vector<Point> pts;
  pts.reserve(idx.size());
  for (int i : idx) pts.push_back(x[i]);
  return pts;
}

}  // namespace detail

/// Approximate prox of one term: subgradient descent on
/// 1/2 sum_l d(x_l, h_l)^2 + lambda T(h), warm-started at h = x with steps
/// 1/j, returning the best iterate. The first step is a plain subgradient
/// step of length lambda on T.
inline std::vector<Point> term_prox(const Manifold& m, const Term& term, const std::vector<Point>& x,
                                    double lambda, const InnerProxOptions& opt = {}) {
  if (term.prox) return term.prox(x, lambda);
  const std::size_t n = x.size();
  auto objective = [&](const std::vector<Point>& h) {
    double s = 0;
    for (std::size_t l = 0; l < n; ++l) {
      const double d = m.dist(x[l], h[l]);
      s += 0.5 * d * d;
    }
    return s + lambda * term.value(h);
  };
  std::vector<Point> h = x, best = x;
  double best_val = objective(h);
  std::vector<Tangent> g(n);
  for (int j = 1; j <= opt.iterations; ++j) {
    for (auto& v : g) v = m.zero_tangent();
    term.subgradient(h, g);
    bool moved = false;
    for (std::size_t l = 0; l < n; ++l) {
      Tangent step = lambda * g[l] - m.log(h[l], x[l]);
      if (!step.isZero(0.0)) {
        h[l] = m.project(m.exp(h[l], -step / j));
        moved = true;
      }
    }
    if (!moved) break;
    const double v = objective(h);
    if (v < best_val) {
      best_val = v;
      best = h;
    }
  }
  return best;
}

/// Wraps terms with pairwise disjoint footprints into one atom. The prox
/// runs the term proxes independently (in parallel); the gradient
/// accumulates term subgradients.
inline Atom make_term_atom(std::string name, std::vector<Term> terms, AtomRole role = AtomRole::regularizer,
                           InnerProxOptions opt = {}) {
  auto shared = std::make_shared<const std::vector<Term>>(std::move(terms));
  Atom a;
  a.name = std::move(name);
  a.role = role;
  for (const Term& t : *shared) a.footprint.insert(a.footprint.end(), t.footprint.begin(), t.footprint.end());
  a.evaluate = [shared](const Signal& x) {
    double s = 0;
    for (const Term& t : *shared) s += t.value(detail::gather(x, t.footprint));
    return s;
  };
  a.prox = [shared, opt](Signal& x, double lambda) {
    const Manifold& m = x.M();
    const auto& ts = *shared;
    std::vector<std::vector<Point>> out(ts.size());
    parallel_for(static_cast<int>(ts.size()), [&](int k) {
      out[k] = term_prox(m, ts[k], detail::gather(x, ts[k].footprint), lambda, opt);
    }, 16);
    for (std::size_t k = 0; k < ts.size(); ++k)
      for (std::size_t l = 0; l < ts[k].footprint.size(); ++l) x[ts[k].footprint[l]] = out[k][l];
  };
  a.gradient = [shared](const Signal& x, std::vector<Tangent>& g) {
    const Manifold& m = x.M();
    for (const Term& t : *shared) {
      std::vector<Tangent> local(t.footprint.size(), m.zero_tangent());
      t.subgradient(detail::gather(x, t.footprint), local);
      for (std::size_t l = 0; l < t.footprint.size(); ++l) g[t.footprint[l]] += local[l];
    }
  };
  return a;
}

/// Greedy coloring of terms into groups with disjoint footprints, in input
/// order, so each group can become one atom.
inline std::vector<std::vector<Term>> color_terms(std::vector<Term> terms, int signal_size) {
  std::vector<std::vector<Term>> groups;
  std::vector<std::vector<char>> used;
  for (Term& t : terms) {
    std::size_t c = 0;
    for (; c < groups.size(); ++c) {
      bool clash = false;
      for (int i : t.footprint) clash = clash || used[c][i];
      if (!clash) break;
    }
    if (c == groups.size()) {
      groups.emplace_back();
      used.emplace_back(signal_size, 0);
    }
    for (int i : t.footprint) used[c][i] = 1;
    groups[c].push_back(std::move(t));
  }
  return groups;
}

inline std::vector<Atom> make_term_atoms(const std::string& name, std::vector<Term> terms, int signal_size,
                                         AtomRole role = AtomRole::regularizer, InnerProxOptions opt = {}) {
  std::vector<Atom> atoms;
  auto groups = color_terms(std::move(terms), signal_size);
  for (std::size_t c = 0; c < groups.size(); ++c)
    atoms.push_back(make_term_atom(name + "/" + std::to_string(c), std::move(groups[c]), role, opt));
  return atoms;
}

/// Pixelwise data atom (1/q) d(x_i, f_i)^q with closed-form prox and gradient.
inline Atom make_data_atom(const Signal& f, double q = 2.0, std::vector<int> active = {}) {
  auto target = std::make_shared<const Signal>(f);
  if (active.empty()) {
    active.resize(f.size());
    std::iota(active.begin(), active.end(), 0);
  }
  auto idx = std::make_shared<const std::vector<int>>(std::move(active));
  Atom a;
  a.name = "data";
  a.role = AtomRole::data;
  a.footprint = *idx;
  a.evaluate = [target, idx, q](const Signal& x) {
    double s = 0;
    for (int i : *idx) s += std::pow(x.M().dist(x[i], (*target)[i]), q) / q;
    return s;
  };
  a.prox = [target, idx, q](Signal& x, double lambda) {
    const Manifold& m = x.M();
    parallel_for(static_cast<int>(idx->size()), [&](int k) {
      const int i = (*idx)[k];
      x[i] = prox_data(m, x[i], (*target)[i], lambda, q);
    });
  };
  a.gradient = [target, idx, q](const Signal& x, std::vector<Tangent>& g) {
    const Manifold& m = x.M();
    for (int i : *idx) {
      const Tangent l = m.log(x[i], (*target)[i]);
      const double d = m.norm(x[i], l);
      if (d > 0) g[i] -= std::pow(d, q - 2.0) * l;
    }
  };
  return a;
}

}  // namespace mvr
