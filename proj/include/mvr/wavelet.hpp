#pragma once

#include "mvr/inverse.hpp"

#include <map>

namespace mvr {

/// Interpolatory subdivision mask s_k. Odd fine samples are weighted means
/// of coarse samples with weights s_{2n+1-2k}; even fine samples copy the
/// coarse ones.
struct SubdivisionScheme {
  std::string name;
  std::map<int, double> mask;
  /// Degree of polynomials the interior rule reproduces. Near the ends the
  /// rule switches to one-sided Lagrange stencils of that degree so the
  /// reproduction survives there too; -1 means renormalize the in-range
  /// coefficients instead.
  int degree = -1;

  static SubdivisionScheme midpoint() { return {"midpoint", {{-1, 0.5}, {0, 1.0}, {1, 0.5}}, 1}; }

  /// Four-point Deslauriers-Dubuc scheme.
  static SubdivisionScheme dd3() {
    return {"dd3", {{-3, -1.0 / 16}, {-1, 9.0 / 16}, {0, 1.0}, {1, 9.0 / 16}, {3, -1.0 / 16}}, 3};
  }

  static SubdivisionScheme by_name(const std::string& n) {
    if (n == "midpoint") return midpoint();
    if (n == "dd3") return dd3();
    throw ArgumentError("unknown subdivision scheme '" + n + "'");
  }

  void validate() const {
    double even = 0, odd = 0;
    for (auto [k, v] : mask) {
      if (k % 2 == 0) {
        if (k == 0 ? v != 1.0 : v != 0.0) throw ArgumentError("mask is not interpolatory");
        even += v;
      } else {
        odd += v;
      }
    }
    if (std::abs(even - 1.0) > 1e-12 || std::abs(odd - 1.0) > 1e-12)
      throw ArgumentError("even and odd mask entries must each sum to 1");
  }

  /// Coarse indices and weights predicting the odd sample between coarse
  /// samples n and n + 1 of a coarse signal with m samples.
  std::vector<std::pair<int, double>> odd_weights(int n, int m) const {
    std::vector<std::pair<int, double>> w;
    bool complete = true;
    for (auto [k, v] : mask) {
      if (k % 2 == 0 || v == 0.0) continue;
      const int c = (2 * n + 1 - k) / 2;
      if (c < 0 || c >= m) {
        complete = false;
        continue;
      }
      w.emplace_back(c, v);
    }
    if (complete) return w;
    if (degree >= 1 && m >= degree + 1) {
      const int start = std::clamp(n - (degree - 1) / 2, 0, m - degree - 1);
      const double x = n + 0.5;
      w.clear();
      for (int a = start; a <= start + degree; ++a) {
        double l = 1.0;
        for (int b = start; b <= start + degree; ++b)
          if (b != a) l *= (x - b) / static_cast<double>(a - b);
        w.emplace_back(a, l);
      }
      return w;
    }
    double s = 0;
    for (auto& e : w) s += e.second;
    for (auto& e : w) e.second /= s;
    return w;
  }
};

namespace detail {

inline Point predict(const Manifold& m, const std::vector<Point>& coarse,
                     const std::vector<std::pair<int, double>>& w) {
  if (w.size() == 2 && w[0].second == 0.5 && w[1].second == 0.5)
    return m.midpoint(coarse[w[0].first], coarse[w[1].first]);
  WeightedSample s;
  Eigen::VectorXd weights(static_cast<Eigen::Index>(w.size()));
  for (std::size_t k = 0; k < w.size(); ++k) {
    s.points.push_back(coarse[w[k].first]);
    weights[static_cast<Eigen::Index>(k)] = w[k].second;
  }
  s.weights = weights;
  MeanOptions o;
  o.max_iters = 1000;
  o.tol = 1e-14;
  o.strict = false;
  return karcher_mean(m, s, o);
}

}  // namespace detail

/// One refinement step: 2m - 1 samples from m.
inline Signal subdivide(const Signal& coarse, const SubdivisionScheme& scheme) {
  scheme.validate();
  const int m = coarse.size();
  if (m < 2) throw ArgumentError("subdivision needs at least two samples");
  std::vector<Point> out(2 * m - 1);
  for (int n = 0; n < m; ++n) out[2 * n] = coarse[n];
  parallel_for(m - 1, [&](int n) {
    out[2 * n + 1] = detail::predict(coarse.M(), coarse.data, scheme.odd_weights(n, m));
  }, 8);
  return Signal(coarse.manifold, std::move(out));
}

/// Coarse samples plus, for each level r = 1..R, the odd-slot details
/// d_{n,r} = 2^{-r/2} log_{prediction}(actual) and their base points.
struct WaveletPyramid {
  Signal coarse;
  std::vector<std::vector<Tangent>> details;
  std::vector<std::vector<Point>> bases;
  SubdivisionScheme scheme;
  int levels = 0;
};

inline void require_dyadic(int length, int levels) {
  if (levels < 0) throw ArgumentError("levels must be nonnegative");
  const int step = 1 << levels;
  if (length < step + 1 || (length - 1) % step != 0)
    throw ArgumentError("length " + std::to_string(length) + " is not of the form 2^R n0 + 1");
}

inline WaveletPyramid wavelet_analyze(const Signal& u, const SubdivisionScheme& scheme, int levels) {
  scheme.validate();
  require_dyadic(u.size(), levels);
  const Manifold& m = u.M();
  WaveletPyramid pyr;
  pyr.scheme = scheme;
  pyr.levels = levels;
  const int top = 1 << levels;
  std::vector<Point> cur;
  for (int i = 0; i < u.size(); i += top) cur.push_back(u[i]);
  pyr.coarse = Signal(u.manifold, cur);
  for (int r = 1; r <= levels; ++r) {
    const int stride = top >> r;
    const int mcoarse = static_cast<int>(cur.size());
    std::vector<Tangent> d(mcoarse - 1);
    std::vector<Point> base(mcoarse - 1);
    const double scale = std::pow(2.0, -0.5 * r);
    std::vector<int> cut;
    parallel_for(mcoarse - 1, [&](int n) {
      base[n] = detail::predict(m, cur, scheme.odd_weights(n, mcoarse));
      const LogResult l = m.log_checked(base[n], u[(2 * n + 1) * stride]);
      if (l.non_unique) {
        d[n] = Tangent();
        return;
      }
      d[n] = scale * l.v;
    }, 8);
    for (int n = 0; n + 1 < mcoarse; ++n)
      if (d[n].size() == 0) cut.push_back((2 * n + 1) * stride);
    if (!cut.empty()) throw CutLocusError("sample at the cut locus of its prediction", cut);
    std::vector<Point> next(2 * mcoarse - 1);
    for (int n = 0; n < 2 * mcoarse - 1; ++n) next[n] = u[n * stride];
    cur = std::move(next);
    pyr.details.push_back(std::move(d));
    pyr.bases.push_back(std::move(base));
  }
  return pyr;
}

/// Inverse transform. Predictions are recomputed from the reconstructed
/// coarser level; details are read in the tangent space there.
inline Signal wavelet_synthesize(const WaveletPyramid& pyr) {
  const Manifold& m = pyr.coarse.M();
  std::vector<Point> cur = pyr.coarse.data;
  for (int r = 1; r <= pyr.levels; ++r) {
    const int mc = static_cast<int>(cur.size());
    if (static_cast<int>(pyr.details[r - 1].size()) != mc - 1) throw ArgumentError("pyramid level size mismatch");
    std::vector<Point> next(2 * mc - 1);
    const double scale = std::pow(2.0, 0.5 * r);
    parallel_for(mc - 1, [&](int n) {
      const Point b = detail::predict(m, cur, pyr.scheme.odd_weights(n, mc));
      next[2 * n + 1] = m.project(m.exp(b, m.project_tangent(b, scale * pyr.details[r - 1][n])));
    }, 8);
    for (int n = 0; n < mc; ++n) next[2 * n] = cur[n];
    cur = std::move(next);
  }
  return Signal(pyr.coarse.manifold, std::move(cur));
}

struct WaveletWeights {
  double alpha1 = 1.0;  ///< detail weight
  double alpha2 = 1.0;  ///< coarse-difference weight
};

inline double detail_scale(int r, double mu, double p) { return std::pow(2.0, r * p * (mu + 0.5 - 1.0 / p)); }

/// alpha1 sum 2^{rp(mu+1/2-1/p)} |d_{n,r}|^p + alpha2 sum d(coarse_{n-1}, coarse_n)^p.
inline double w_energy(const Signal& u, const WaveletWeights& alpha, double mu, double p,
                       const SubdivisionScheme& scheme, int levels) {
  const WaveletPyramid pyr = wavelet_analyze(u, scheme, levels);
  const Manifold& m = u.M();
  double det = 0;
  for (int r = 1; r <= levels; ++r)
    for (std::size_t n = 0; n < pyr.details[r - 1].size(); ++n)
      det += detail_scale(r, mu, p) * std::pow(m.norm(pyr.bases[r - 1][n], pyr.details[r - 1][n]), p);
  double coarse = 0;
  for (int n = 1; n < pyr.coarse.size(); ++n) coarse += std::pow(m.dist(pyr.coarse[n - 1], pyr.coarse[n]), p);
  return alpha.alpha1 * det + alpha.alpha2 * coarse;
}

inline constexpr double kZeroDetail = 1e-12;

/// alpha1 #{nonzero details} + alpha2 #{nonzero coarse differences}.
inline double w0_energy(const Signal& u, const WaveletWeights& alpha, const SubdivisionScheme& scheme, int levels) {
  const WaveletPyramid pyr = wavelet_analyze(u, scheme, levels);
  const Manifold& m = u.M();
  int det = 0, coarse = 0;
  for (int r = 1; r <= levels; ++r)
    for (std::size_t n = 0; n < pyr.details[r - 1].size(); ++n)
      det += m.norm(pyr.bases[r - 1][n], pyr.details[r - 1][n]) > kZeroDetail;
  for (int n = 1; n < pyr.coarse.size(); ++n) coarse += m.dist(pyr.coarse[n - 1], pyr.coarse[n]) > kZeroDetail;
  return alpha.alpha1 * det + alpha.alpha2 * coarse;
}

// --- denoising -----------------------------------------------------------------

enum class WaveletPenalty { l1, l0 };

struct WaveletModel {
  WaveletWeights alpha;
  double mu = 1.0;
  double p = 1.0;
  WaveletPenalty penalty = WaveletPenalty::l1;
  SubdivisionScheme scheme = SubdivisionScheme::midpoint();
  int levels = 3;
};

namespace detail {

/// One detail slot in fine-signal indices: the sample itself and the
/// samples predicting it.
struct DetailSlot {
  int level = 0;
  int self = 0;
  std::vector<int> pred;
  Eigen::VectorXd weights;
};

inline std::vector<DetailSlot> detail_slots(int length, const SubdivisionScheme& scheme, int levels) {
  std::vector<DetailSlot> slots;
  const int top = 1 << levels;
  const int m0 = (length - 1) / top + 1;
  for (int r = 1; r <= levels; ++r) {
    const int stride = top >> r;
    const int mc = (m0 - 1) * (1 << (r - 1)) + 1;
    for (int n = 0; n + 1 < mc; ++n) {
      DetailSlot s;
      s.level = r;
      s.self = (2 * n + 1) * stride;
      const auto w = scheme.odd_weights(n, mc);
      s.weights.resize(static_cast<Eigen::Index>(w.size()));
      for (std::size_t k = 0; k < w.size(); ++k) {
        s.pred.push_back(w[k].first * 2 * stride);
        s.weights[static_cast<Eigen::Index>(k)] = w[k].second;
      }
      slots.push_back(std::move(s));
    }
  }
  return slots;
}

inline Point slot_prediction(const Manifold& m, const DetailSlot& s, const std::vector<Point>& pred) {
  std::vector<std::pair<int, double>> w;
  for (Eigen::Index k = 0; k < s.weights.size(); ++k) w.emplace_back(static_cast<int>(k), s.weights[k]);
  return predict(m, pred, w);
}

/// Term c * d(prediction, sample)^p over footprint (self, pred...).
inline Term detail_term(const Manifold* m, const DetailSlot& slot, double c, double p) {
  auto s = std::make_shared<const DetailSlot>(slot);
  Term t;
  t.footprint.push_back(slot.self);
  t.footprint.insert(t.footprint.end(), slot.pred.begin(), slot.pred.end());
  t.value = [m, s, c, p](const std::vector<Point>& x) {
    const std::vector<Point> pred(x.begin() + 1, x.end());
    return c * std::pow(m->dist(slot_prediction(*m, *s, pred), x[0]), p);
  };
  t.subgradient = [m, s, c, p](const std::vector<Point>& x, std::vector<Tangent>& g) {
    const std::vector<Point> pred(x.begin() + 1, x.end());
    const Point b = slot_prediction(*m, *s, pred);
    const Tangent l = m->log(x[0], b);
    const double d = m->norm(x[0], l);
    if (d < 1e-14) return;
    const double slope = c * p * std::pow(d, p - 1.0);
    g[0] -= slope / d * l;
    ForwardOperator::Row row{{}, s->weights};
    std::vector<Tangent> gp(pred.size(), m->zero_tangent());
    row_value_grad(*m, row, x[0], 1.0, pred, s->self, &gp, DataAtomOptions{});
    for (std::size_t k = 0; k < pred.size(); ++k) g[k + 1] += slope * gp[k];
  };
  if (m->descriptor().kind == ManifoldKind::euclidean && p == 1.0) {
    // Flat case: c |a . x| with a = (1, -w); shrink the residual along a.
    t.prox = [s, c](const std::vector<Point>& x, double lambda) {
      Eigen::VectorXd v = x[0];
      double a2 = 1.0;
      for (Eigen::Index k = 0; k < s->weights.size(); ++k) {
        v -= s->weights[k] * x[k + 1];
        a2 += s->weights[k] * s->weights[k];
      }
      const double nv = v.norm();
      const double shrink = nv > lambda * c * a2 ? lambda * c * a2 / nv : 1.0;
      const Eigen::VectorXd delta = -shrink * v / a2;
      std::vector<Point> h = x;
      h[0] += delta;
      for (Eigen::Index k = 0; k < s->weights.size(); ++k) h[k + 1] -= s->weights[k] * delta;
      return h;
    };
  }
  return t;
}

/// Keep-or-kill prox for lambda * weight * [detail != 0]: the kill
/// candidate projects the slot onto zero detail by the flat-space formula
/// and then snaps the sample onto the new prediction.
inline std::vector<Point> l0_slot_prox(const Manifold& m, const DetailSlot& s, const std::vector<Point>& x,
                                       double lambda, double weight) {
  const std::vector<Point> pred(x.begin() + 1, x.end());
  const Point b = slot_prediction(m, s, pred);
  const double d = m.dist(b, x[0]);
  if (d <= kZeroDetail) return x;
  auto cost = [&](const std::vector<Point>& h) {
    double c = 0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      const double e = m.dist(h[k], x[k]);
      c += 0.5 * e * e;
    }
    return c;
  };
  const double keep = lambda * weight;
  // Candidate 1: move the sample only.
  std::vector<Point> kill = x;
  kill[0] = b;
  double kill_cost = cost(kill);
  // Candidate 2: share the correction with the predictors.
  const Tangent v = m.log(b, x[0]);
  const double share = 1.0 / (1.0 + s.weights.squaredNorm());
  std::vector<Point> alt = x;
  for (std::size_t k = 0; k < pred.size(); ++k)
    alt[k + 1] = m.project(m.exp(x[k + 1], share * s.weights[static_cast<Eigen::Index>(k)] * m.transport(b, x[k + 1], v)));
  alt[0] = slot_prediction(m, s, std::vector<Point>(alt.begin() + 1, alt.end()));
  const double alt_cost = cost(alt);
  if (alt_cost < kill_cost) {
    kill = std::move(alt);
    kill_cost = alt_cost;
  }
  return kill_cost <= keep + 1e-12 ? kill : x;
}

inline Atom l0_detail_atom(std::string name, std::vector<DetailSlot> slots, double weight) {
  auto shared = std::make_shared<const std::vector<DetailSlot>>(std::move(slots));
  Atom a;
  a.name = std::move(name);
  for (const auto& s : *shared) {
    a.footprint.push_back(s.self);
    a.footprint.insert(a.footprint.end(), s.pred.begin(), s.pred.end());
  }
  a.evaluate = [shared, weight](const Signal& x) {
    double v = 0;
    for (const auto& s : *shared)
      v += x.M().dist(slot_prediction(x.M(), s, gather(x, s.pred)), x[s.self]) > kZeroDetail ? weight : 0.0;
    return v;
  };
  a.prox = [shared, weight](Signal& x, double lambda) {
    const auto& ss = *shared;
    std::vector<std::vector<Point>> out(ss.size());
    parallel_for(static_cast<int>(ss.size()), [&](int k) {
      std::vector<int> fp{ss[k].self};
      fp.insert(fp.end(), ss[k].pred.begin(), ss[k].pred.end());
      out[k] = l0_slot_prox(x.M(), ss[k], gather(x, fp), lambda, weight);
    }, 8);
    for (std::size_t k = 0; k < ss.size(); ++k) {
      x[ss[k].self] = out[k][0];
      for (std::size_t j = 0; j < ss[k].pred.size(); ++j) x[ss[k].pred[j]] = out[k][j + 1];
    }
  };
  return a;
}

/// Greedy grouping of slots into sets with disjoint footprints.
inline std::vector<std::vector<DetailSlot>> color_slots(const std::vector<DetailSlot>& slots, int size) {
  std::vector<std::vector<DetailSlot>> groups;
  std::vector<std::vector<char>> used;
  for (const DetailSlot& s : slots) {
    std::vector<int> fp{s.self};
    fp.insert(fp.end(), s.pred.begin(), s.pred.end());
    std::size_t c = 0;
    for (; c < groups.size(); ++c) {
      bool clash = false;
      for (int i : fp) clash = clash || used[c][i];
      if (!clash) break;
    }
    if (c == groups.size()) {
      groups.emplace_back();
      used.emplace_back(size, 0);
    }
    for (int i : fp) used[c][i] = 1;
    groups[c].push_back(s);
  }
  return groups;
}

}  // namespace detail

/// Regularizer atoms on a signal of dyadic length: detail atoms grouped by
/// disjoint footprints plus coarse-difference pair atoms.
inline std::vector<Atom> wavelet_atoms(const Signal& shape, const WaveletModel& model, InnerProxOptions inner = {}) {
  model.scheme.validate();
  require_dyadic(shape.size(), model.levels);
  const auto slots = detail::detail_slots(shape.size(), model.scheme, model.levels);
  std::vector<Atom> atoms;
  const int top = 1 << model.levels;
  if (model.alpha.alpha1 > 0) {
    if (model.penalty == WaveletPenalty::l1) {
      std::vector<Term> terms;
      for (const auto& s : slots) {
        // |d_{n,r}|^p carries 2^{-rp/2} on top of the level weight.
        const double c = model.alpha.alpha1 * detail_scale(s.level, model.mu, model.p) *
                         std::pow(2.0, -0.5 * s.level * model.p);
        terms.push_back(detail::detail_term(shape.manifold.get(), s, c, model.p));
      }
      for (Atom& a : make_term_atoms("detail", std::move(terms), shape.size(), AtomRole::regularizer, inner))
        atoms.push_back(std::move(a));
    } else {
      const auto groups = detail::color_slots(slots, shape.size());
      for (std::size_t g = 0; g < groups.size(); ++g)
        atoms.push_back(detail::l0_detail_atom("detail0/" + std::to_string(g), groups[g], model.alpha.alpha1));
    }
  }
  if (model.alpha.alpha2 > 0) {
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<IndexPair> pairs;
      for (int n = parity; (n + 1) * top < shape.size(); n += 2) pairs.push_back({n * top, (n + 1) * top});
      if (pairs.empty()) continue;
      if (model.penalty == WaveletPenalty::l0) {
        MSModel potts;
        potts.mode = MSMode::potts;
        atoms.push_back(make_ms_pair_atom("coarse0/" + std::to_string(parity), std::move(pairs), model.alpha.alpha2, potts));
      } else if (model.p == 1.0) {
        atoms.push_back(make_pair_atom("coarse/" + std::to_string(parity), std::move(pairs), model.alpha.alpha2));
      } else if (model.p == 2.0) {
        atoms.push_back(make_pair_atom("coarse/" + std::to_string(parity), std::move(pairs), 2.0 * model.alpha.alpha2,
                                       {PairPenalty::quadratic}));
      } else {
        throw ArgumentError("coarse differences support p in {1, 2}");
      }
    }
  }
  return atoms;
}

namespace detail {

/// Greedy keep-or-kill sweep over the details of the final iterate, finest
/// level first. Proximal steps on overlapping detail atoms leave small
/// nonzero details behind, which the counting penalty charges in full.
inline void l0_polish(SolveResult& res, const std::vector<Atom>& atoms, const WaveletModel& model) {
  WaveletPyramid pyr;
  try {
    pyr = wavelet_analyze(res.x, model.scheme, model.levels);
  } catch (const std::exception&) {
    return;
  }
  TraceRow best = evaluate_atoms(atoms, res.x);
  const TraceRow start = best;
  for (int r = model.levels; r >= 1; --r)
    for (std::size_t n = 0; n < pyr.details[r - 1].size(); ++n) {
      Tangent& d = pyr.details[r - 1][n];
      if (d.norm() <= kZeroDetail) continue;
      const Tangent kept = d;
      d.setZero();
      Signal trial = wavelet_synthesize(pyr);
      for (Point& x : trial.data) x = trial.M().project(x);
      const TraceRow e = evaluate_atoms(atoms, trial);
      if (e.total() < best.total()) {
        best = e;
        res.x = std::move(trial);
      } else {
        d = kept;
      }
    }
  if (best.total() < start.total()) {
    best.iteration = res.trace.empty() ? 0 : res.trace.back().iteration + 1;
    res.trace.push_back(best);
  }
}

}  // namespace detail

/// Extends u by geodesic reflection about its last sample to the next
/// length of the form 2^R n0 + 1.
inline Signal reflect_pad(const Signal& u, int levels) {
  const int top = 1 << levels;
  const int n = u.size();
  if (n < 1) throw ArgumentError("empty signal");
  const int n0 = std::max(1, (n - 1 + top - 1) / top);
  const int target = n0 * top + 1;
  Signal out = u;
  const Manifold& m = u.M();
  for (int k = 1; n - 1 + k < target; ++k) {
    const int src = std::max(0, n - 1 - k);
    out.data.push_back(m.project(m.geopoint(u[src], u[n - 1], 2.0)));
  }
  out.rows = out.size();
  return out;
}

/// Wavelet-sparse reconstruction from f (or A(u) = f when an operator is
/// given) with CPPA or PPPA. Signals of non-dyadic length are reflected
/// at the right end; padded samples carry no data term.
inline SolveResult denoise_wavelet(const Signal& f, const ForwardOperator* a, const WaveletModel& model, double q,
                                   const SolverSchedule& s, Engine engine = Engine::cppa, InnerProxOptions inner = {},
                                   DataAtomOptions data_opt = {}) {
  if (engine != Engine::cppa && engine != Engine::pppa) throw ArgumentError("wavelet denoising uses cppa or pppa");
  if (f.is_image) throw ArgumentError("wavelet regularization is univariate");
  Signal u0;
  int n = 0;
  if (a) {
    if (f.size() != a->rows()) throw ArgumentError("data length must match the operator rows");
    n = a->cols();
    u0 = a->rows() == a->cols() ? f : Signal(f.manifold, std::vector<Point>(n, f[0]));
  } else {
    n = f.size();
    u0 = f;
  }
  const Signal x0 = reflect_pad(u0, model.levels);
  std::vector<Atom> atoms;
  if (a && !a->is_identity()) {
    Eigen::MatrixXd wide = Eigen::MatrixXd::Zero(a->rows(), x0.size());
    wide.leftCols(n) = a->matrix();
    const ForwardOperator padded(std::move(wide), a->bandwidth());
    atoms = data_atoms(padded, f, q, data_opt);
  } else {
    std::vector<int> active(n);
    std::iota(active.begin(), active.end(), 0);
    Signal target = x0;
    for (int i = 0; i < n; ++i) target[i] = f[i];
    atoms = {make_data_atom(target, q, active)};
  }
  for (Atom& r : wavelet_atoms(x0, model, inner)) atoms.push_back(std::move(r));
  SolveResult res = engine == Engine::cppa ? cppa(atoms, x0, s, &x0) : pppa(atoms, x0, s, MeanMode::exact, &x0);
  if (model.penalty == WaveletPenalty::l0) detail::l0_polish(res, atoms, model);
  res.x.data.resize(n);
  res.x.rows = n;
  return res;
}

}  // namespace mvr
