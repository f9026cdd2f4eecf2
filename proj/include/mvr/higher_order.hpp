#pragma once

#include "mvr/atoms.hpp"
#include "mvr/tv.hpp"

#include <array>
#include <map>

namespace mvr {

/// Discrete tangent [base, tip], standing for log_base(tip).
struct PointTuple {
  Point base;
  Point tip;
};

struct TGVWeights {
  double alpha1 = 1.0;
  double alpha0 = 1.0;
  double p = 1.0;
};

// --- point constructions ---------------------------------------------------

/// Schild's ladder image of the tuple [u_prev, y_prev] at u_cur:
/// [u_prev, [u_cur, y_prev]_{1/2}]_2.
inline Point schild_point(const Manifold& m, const Point& u_prev, const Point& y_prev, const Point& u_cur) {
  return m.project(m.geopoint(u_prev, m.midpoint(u_cur, y_prev), 2.0));
}

struct FlaggedPoint {
  Point point;
  bool non_unique = false;
};

inline FlaggedPoint schild_point_checked(const Manifold& m, const Point& u_prev, const Point& y_prev,
                                         const Point& u_cur) {
  const bool a = m.log_checked(u_cur, y_prev).non_unique;
  const Point c = m.midpoint(u_cur, y_prev);
  const bool b = m.log_checked(u_prev, c).non_unique;
  return {m.project(m.geopoint(u_prev, c, 2.0)), a || b};
}

/// 2 d([u_-, u_+]_{1/2}, u_o). On the cut locus both midpoint branches
/// are tried.
inline double d_c(const Manifold& m, const Point& um, const Point& uc, const Point& up) {
  const LogResult l = m.log_checked(um, up);
  double v = 2.0 * m.dist(m.exp(um, 0.5 * l.v), uc);
  if (l.non_unique) v = std::min(v, 2.0 * m.dist(m.exp(um, -0.5 * l.v), uc));
  return v;
}

/// 2 d([u10, u0m]_{1/2}, [u00, u1m]_{1/2}).
inline double d_cc(const Manifold& m, const Point& u00, const Point& u10, const Point& u0m, const Point& u1m) {
  return 2.0 * m.dist(m.midpoint(u10, u0m), m.midpoint(u00, u1m));
}

/// d(t1.tip, S(t2.base, t2.tip, t1.base)).
inline double d_s(const Manifold& m, const PointTuple& t1, const PointTuple& t2) {
  if (t1.base == t2.base) return m.dist(t1.tip, t2.tip);
  return m.dist(t1.tip, schild_point(m, t2.base, t2.tip, t1.base));
}

/// || log_x(y) - pt_x(log_u(v)) ||_x.
inline double d_pt(const Manifold& m, const PointTuple& t1, const PointTuple& t2) {
  const Tangent a = m.log(t1.base, t1.tip);
  const Tangent b = m.transport(t2.base, t1.base, m.log(t2.base, t2.tip));
  return m.norm(t1.base, a - b);
}

/// Symmetrized cross defect: the midpoint of the two tips compared with the
/// midpoint of the neighbouring tuples carried over by Schild's ladder
/// (ty_prev to tx.base, tx_prev to ty.base). In flat space this is
/// |delta_y w1 + delta_x w2| / 2.
inline double d_s_sym(const Manifold& m, const PointTuple& tx, const PointTuple& ty, const PointTuple& tx_prev,
                      const PointTuple& ty_prev) {
  const Point a = m.midpoint(tx.tip, ty.tip);
  const Point s1 = schild_point(m, ty_prev.base, ty_prev.tip, tx.base);
  const Point s2 = schild_point(m, tx_prev.base, tx_prev.tip, ty.base);
  return m.dist(a, m.midpoint(s1, s2));
}

// --- values with gradients -------------------------------------------------
//
// Each routine returns the value and, when `g` is non-null, adds one
// Riemannian (sub)gradient per argument. Degenerate configurations give
// zero, which is a valid subgradient element.

namespace detail {

inline void add_geopoint_adjoint(const Manifold& m, const Point& a, const Point& b, double t, const Point& c,
                                 const Tangent& gc, Tangent* ga, Tangent* gb) {
  if (ga) *ga += m.adjoint(a, c, gc, [&](const Tangent& xi) { return m.diff_geopoint_first(a, b, t, xi); });
  if (gb) *gb += m.adjoint(b, c, gc, [&](const Tangent& xi) { return m.diff_geopoint_second(a, b, t, xi); });
}

/// Pulls a gradient at S = schild_point(a, b, x) back to a, b, x.
inline void add_schild_adjoint(const Manifold& m, const Point& a, const Point& b, const Point& x, const Point& s,
                               const Tangent& gs, Tangent* ga, Tangent* gb, Tangent* gx) {
  const Point mid = m.midpoint(x, b);
  Tangent gmid = m.zero_tangent();
  add_geopoint_adjoint(m, a, mid, 2.0, s, gs, ga, &gmid);
  add_geopoint_adjoint(m, x, b, 0.5, mid, gmid, gx, gb);
}

/// Gradient pieces of d(p, q): -log_p(q)/d and -log_q(p)/d.
inline double dist_grads(const Manifold& m, const Point& p, const Point& q, Tangent* gp, Tangent* gq,
                         double scale = 1.0) {
  const Tangent l = m.log(p, q);
  const double d = m.norm(p, l);
  if (d > 1e-14) {
    if (gp) *gp -= (scale / d) * l;
    if (gq) *gq -= (scale / d) * m.log(q, p);
  }
  return d;
}

}  // namespace detail

inline double pair_value_grad(const Manifold& m, const Point& a, const Point& b, std::vector<Tangent>* g) {
  if (!g) return m.dist(a, b);
  return detail::dist_grads(m, a, b, &(*g)[0], &(*g)[1]);
}

/// D_c with gradients w.r.t. (u_-, u_o, u_+).
inline double dc_value_grad(const Manifold& m, const Point& um, const Point& uc, const Point& up,
                            std::vector<Tangent>* g) {
  const Point c = m.midpoint(um, up);
  if (!g) return 2.0 * m.dist(c, uc);
  Tangent gc = m.zero_tangent();
  const double d = detail::dist_grads(m, c, uc, &gc, &(*g)[1], 2.0);
  if (d > 1e-14) detail::add_geopoint_adjoint(m, um, up, 0.5, c, gc, &(*g)[0], &(*g)[2]);
  return 2.0 * d;
}

/// D_cc with gradients w.r.t. (u00, u10, u0m, u1m).
inline double dcc_value_grad(const Manifold& m, const Point& u00, const Point& u10, const Point& u0m,
                             const Point& u1m, std::vector<Tangent>* g) {
  const Point c1 = m.midpoint(u10, u0m);
  const Point c2 = m.midpoint(u00, u1m);
  if (!g) return 2.0 * m.dist(c1, c2);
  Tangent g1 = m.zero_tangent(), g2 = m.zero_tangent();
  const double d = detail::dist_grads(m, c1, c2, &g1, &g2, 2.0);
  if (d > 1e-14) {
    detail::add_geopoint_adjoint(m, u10, u0m, 0.5, c1, g1, &(*g)[1], &(*g)[2]);
    detail::add_geopoint_adjoint(m, u00, u1m, 0.5, c2, g2, &(*g)[0], &(*g)[3]);
  }
  return 2.0 * d;
}

/// D_S([x, y], [u, v]) with gradients w.r.t. (x, y, u, v).
inline double ds_value_grad(const Manifold& m, const Point& x, const Point& y, const Point& u, const Point& v,
                            std::vector<Tangent>* g) {
  const Point s = schild_point(m, u, v, x);
  if (!g) return m.dist(y, s);
  Tangent gs = m.zero_tangent();
  const double d = detail::dist_grads(m, y, s, &(*g)[1], &gs);
  if (d > 1e-14) detail::add_schild_adjoint(m, u, v, x, s, gs, &(*g)[2], &(*g)[3], &(*g)[0]);
  return d;
}

/// D_S^sym with gradients w.r.t. (tx.base, tx.tip, ty.base, ty.tip,
/// tx_prev.base, tx_prev.tip, ty_prev.base, ty_prev.tip).
inline double dssym_value_grad(const Manifold& m, const std::array<const Point*, 8>& a, std::vector<Tangent>* g) {
  const Point& xb = *a[0];
  const Point& xt = *a[1];
  const Point& yb = *a[2];
  const Point& yt = *a[3];
  const Point& pxb = *a[4];
  const Point& pxt = *a[5];
  const Point& pyb = *a[6];
  const Point& pyt = *a[7];
  const Point c1 = m.midpoint(xt, yt);
  const Point s1 = schild_point(m, pyb, pyt, xb);
  const Point s2 = schild_point(m, pxb, pxt, yb);
  const Point c2 = m.midpoint(s1, s2);
  if (!g) return m.dist(c1, c2);
  Tangent g1 = m.zero_tangent(), g2 = m.zero_tangent();
  const double d = detail::dist_grads(m, c1, c2, &g1, &g2);
  if (d > 1e-14) {
    auto& G = *g;
    detail::add_geopoint_adjoint(m, xt, yt, 0.5, c1, g1, &G[1], &G[3]);
    Tangent gs1 = m.zero_tangent(), gs2 = m.zero_tangent();
    detail::add_geopoint_adjoint(m, s1, s2, 0.5, c2, g2, &gs1, &gs2);
    detail::add_schild_adjoint(m, pyb, pyt, xb, s1, gs1, &G[6], &G[7], &G[0]);
    detail::add_schild_adjoint(m, pxb, pxt, yb, s2, gs2, &G[4], &G[5], &G[2]);
  }
  return d;
}

// --- coupled terms ----------------------------------------------------------

enum class DefectKind { pair, dc, dcc, ds, dssym };

/// One defect inside an l^p-coupled summand: coef * D(args)^p.
struct Defect {
  DefectKind kind;
  double coef;
  std::vector<int> args;
};

inline double defect_value_grad(const Manifold& m, const Defect& d, const std::vector<const Point*>& pts,
                                std::vector<Tangent>* g) {
  switch (d.kind) {
    case DefectKind::pair: return pair_value_grad(m, *pts[0], *pts[1], g);
    case DefectKind::dc: return dc_value_grad(m, *pts[0], *pts[1], *pts[2], g);
    case DefectKind::dcc: return dcc_value_grad(m, *pts[0], *pts[1], *pts[2], *pts[3], g);
    case DefectKind::ds: return ds_value_grad(m, *pts[0], *pts[1], *pts[2], *pts[3], g);
    case DefectKind::dssym:
      return dssym_value_grad(m, {pts[0], pts[1], pts[2], pts[3], pts[4], pts[5], pts[6], pts[7]}, g);
  }
  return 0.0;
}

/// Builds weight * (sum_k coef_k D_k^p)^{1/p} as a Term over the union of
/// the defects' arguments.
inline Term make_coupled_term(const Manifold* m, double weight, double p, std::vector<Defect> defects) {
  Term t;
  std::map<int, int> local;
  for (const Defect& d : defects)
    for (int i : d.args)
      if (!local.count(i)) {
        local[i] = static_cast<int>(t.footprint.size());
        t.footprint.push_back(i);
      }
  std::vector<std::vector<int>> slots;
  for (const Defect& d : defects) {
    std::vector<int> s;
    for (int i : d.args) s.push_back(local[i]);
    slots.push_back(s);
  }
  auto shared = std::make_shared<const std::pair<std::vector<Defect>, std::vector<std::vector<int>>>>(
      std::move(defects), std::move(slots));
  auto eval = [m, weight, p, shared](const std::vector<Point>& h, std::vector<Tangent>* g) {
    const auto& [defs, slots] = *shared;
    std::vector<double> vals(defs.size());
    std::vector<std::vector<Tangent>> grads(defs.size());
    double sum = 0;
    for (std::size_t k = 0; k < defs.size(); ++k) {
      std::vector<const Point*> pts;
      for (int s : slots[k]) pts.push_back(&h[s]);
      if (g) grads[k].assign(pts.size(), m->zero_tangent());
      vals[k] = defect_value_grad(*m, defs[k], pts, g ? &grads[k] : nullptr);
      sum += defs[k].coef * (p == 1.0 ? vals[k] : std::pow(vals[k], p));
    }
    const double value = weight * (p == 1.0 ? sum : std::pow(sum, 1.0 / p));
    if (g && sum > 0) {
      const double outer = p == 1.0 ? 1.0 : std::pow(sum, 1.0 / p - 1.0);
      for (std::size_t k = 0; k < defs.size(); ++k) {
        if (vals[k] <= 0) continue;
        const double c = weight * outer * defs[k].coef * (p == 1.0 ? 1.0 : std::pow(vals[k], p - 1.0));
        for (std::size_t l = 0; l < slots[k].size(); ++l) (*g)[slots[k][l]] += c * grads[k][l];
      }
    }
    return value;
  };
  t.value = [eval](const std::vector<Point>& h) { return eval(h, nullptr); };
  t.subgradient = [eval](const std::vector<Point>& h, std::vector<Tangent>& g) { eval(h, &g); };
  return t;
}

/// Splits a coupled summand into one term per defect when p = 1, so that
/// footprints stay small.
inline void push_coupled(std::vector<Term>& out, const Manifold* m, double weight, double p,
                         std::vector<Defect> defects) {
  if (defects.empty()) return;
  if (p == 1.0) {
    for (Defect& d : defects) out.push_back(make_coupled_term(m, weight * d.coef, 1.0, {{d.kind, 1.0, d.args}}));
  } else {
    out.push_back(make_coupled_term(m, weight, p, std::move(defects)));
  }
}

inline double sum_terms(const std::vector<Term>& terms, const Signal& x) {
  double s = 0;
  for (const Term& t : terms) s += t.value(detail::gather(x, t.footprint));
  return s;
}

// --- TV^2 -------------------------------------------------------------------

/// Terms of alpha * TV^2 on a signal or image with the given shape.
inline std::vector<Term> tv2_terms(const Signal& shape, double alpha, double p) {
  const Manifold* m = shape.manifold.get();
  std::vector<Term> terms;
  if (!shape.is_image) {
    for (int i = 1; i + 1 < shape.size(); ++i) push_coupled(terms, m, alpha, 1.0, {{DefectKind::dc, 1.0, {i - 1, i, i + 1}}});
    return terms;
  }
  const int rows = shape.rows, cols = shape.cols;
  auto id = [cols](int i, int j) { return i * cols + j; };
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      std::vector<Defect> d;
      if (i >= 1 && i + 1 < rows) d.push_back({DefectKind::dc, 1.0, {id(i - 1, j), id(i, j), id(i + 1, j)}});
      if (j >= 1 && j + 1 < cols) d.push_back({DefectKind::dc, 1.0, {id(i, j - 1), id(i, j), id(i, j + 1)}});
      if (i + 1 < rows && j >= 1)
        d.push_back({DefectKind::dcc, 2.0, {id(i, j), id(i + 1, j), id(i, j - 1), id(i + 1, j - 1)}});
      push_coupled(terms, m, alpha, p, std::move(d));
    }
  }
  return terms;
}

/// sum_i D_c(u_{i-1}, u_i, u_{i+1}) for signals; for images the l^p coupled
/// sum of the two D_c and 2 D_cc^p.
inline double tv2_energy(const Signal& u, double p = 1.0) { return sum_terms(tv2_terms(u, 1.0, p), u); }

// --- S-TGV --------------------------------------------------------------------
//
// The joint state holds u followed by the tip fields: (u, y) for signals and
// (u, y1, y2) for images, all of length rows * cols. Tips whose partner
// sample is out of range (y_{N-1}, y1 in the last row, y2 in the last
// column) are unused.

/// Terms of the S-TGV functional on a joint state; u_offset and tip offsets
/// index into that state.
inline std::vector<Term> stgv_terms(const Signal& shape, const TGVWeights& w) {
  const Manifold* m = shape.manifold.get();
  std::vector<Term> terms;
  const int n = shape.size();
  if (!shape.is_image) {
    auto y = [n](int i) { return n + i; };
    for (int i = 0; i + 1 < n; ++i) push_coupled(terms, m, w.alpha1, 1.0, {{DefectKind::pair, 1.0, {i + 1, y(i)}}});
    for (int i = 1; i + 1 < n; ++i)
      push_coupled(terms, m, w.alpha0, 1.0, {{DefectKind::ds, 1.0, {i, y(i), i - 1, y(i - 1)}}});
    return terms;
  }
  const int rows = shape.rows, cols = shape.cols;
  auto u = [cols](int i, int j) { return i * cols + j; };
  auto y1 = [cols, n](int i, int j) { return n + i * cols + j; };
  auto y2 = [cols, n](int i, int j) { return 2 * n + i * cols + j; };
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      std::vector<Defect> first;
      if (i + 1 < rows) first.push_back({DefectKind::pair, 1.0, {u(i + 1, j), y1(i, j)}});
      if (j + 1 < cols) first.push_back({DefectKind::pair, 1.0, {u(i, j + 1), y2(i, j)}});
      push_coupled(terms, m, w.alpha1, w.p, std::move(first));
      std::vector<Defect> second;
      if (i >= 1 && i + 1 < rows)
        second.push_back({DefectKind::ds, 1.0, {u(i, j), y1(i, j), u(i - 1, j), y1(i - 1, j)}});
      if (j >= 1 && j + 1 < cols)
        second.push_back({DefectKind::ds, 1.0, {u(i, j), y2(i, j), u(i, j - 1), y2(i, j - 1)}});
      if (i >= 1 && j >= 1 && i + 1 < rows && j + 1 < cols)
        second.push_back({DefectKind::dssym, 2.0,
                          {u(i, j), y1(i, j), u(i, j), y2(i, j), u(i, j - 1), y1(i, j - 1), u(i - 1, j), y2(i - 1, j)}});
      push_coupled(terms, m, w.alpha0, w.p, std::move(second));
    }
  }
  return terms;
}

/// Joint state (u, y) or (u, y1, y2) as one flat signal.
inline Signal stgv_state(const Signal& u, const std::vector<const Signal*>& tips) {
  Signal s(u.manifold, u.data);
  for (const Signal* t : tips) {
    require_same_shape(u, *t);
    s.data.insert(s.data.end(), t->data.begin(), t->data.end());
  }
  s.rows = s.size();
  return s;
}

/// Canonical tips y_i = u_{i+1} (signals) or y1 = u_{i+1,j}, y2 = u_{i,j+1}
/// (images); unused tips copy u.
inline std::vector<Signal> canonical_tips(const Signal& u) {
  if (!u.is_image) {
    Signal y = u;
    for (int i = 0; i + 1 < u.size(); ++i) y[i] = u[i + 1];
    return {y};
  }
  Signal y1 = u, y2 = u;
  for (int i = 0; i < u.rows; ++i)
    for (int j = 0; j < u.cols; ++j) {
      if (i + 1 < u.rows) y1.at(i, j) = u.at(i + 1, j);
      if (j + 1 < u.cols) y2.at(i, j) = u.at(i, j + 1);
    }
  return {y1, y2};
}

inline double stgv_energy_1d(const Signal& u, const Signal& y, const TGVWeights& w) {
  const Signal s = stgv_state(u, {&y});
  return sum_terms(stgv_terms(u, w), s);
}

inline double stgv_energy_2d(const Signal& u, const Signal& y1, const Signal& y2, const TGVWeights& w) {
  if (!u.is_image) throw ArgumentError("stgv_energy_2d needs an image");
  const Signal s = stgv_state(u, {&y1, &y2});
  return sum_terms(stgv_terms(u, w), s);
}

/// Minimizes the S-TGV energy over the tips with u held fixed, starting at
/// the canonical tips. Returns the tips and the attained energy.
struct TipResult {
  std::vector<Signal> tips;
  double energy = 0;
};

inline TipResult stgv_minimize_tips(const Signal& u, const TGVWeights& w, const SolverSchedule& s) {
  const std::vector<Signal> init = canonical_tips(u);
  std::vector<const Signal*> ptrs;
  for (const Signal& t : init) ptrs.push_back(&t);
  const Signal state = stgv_state(u, ptrs);
  const int n = u.size();
  // Terms only see tip slots; u is frozen into the closures.
  std::vector<Term> frozen;
  for (Term& t : stgv_terms(u, w)) {
    std::vector<int> free_slots;
    for (std::size_t l = 0; l < t.footprint.size(); ++l)
      if (t.footprint[l] >= n) free_slots.push_back(static_cast<int>(l));
    if (free_slots.empty()) continue;
    auto full = std::make_shared<Term>(t);
    auto base = std::make_shared<std::vector<Point>>(detail::gather(state, t.footprint));
    Term f;
    for (int l : free_slots) f.footprint.push_back(t.footprint[l] - n);
    f.value = [full, base, free_slots](const std::vector<Point>& h) {
      std::vector<Point> pts = *base;
      for (std::size_t k = 0; k < free_slots.size(); ++k) pts[free_slots[k]] = h[k];
      return full->value(pts);
    };
    f.subgradient = [full, base, free_slots](const std::vector<Point>& h, std::vector<Tangent>& g) {
      std::vector<Point> pts = *base;
      for (std::size_t k = 0; k < free_slots.size(); ++k) pts[free_slots[k]] = h[k];
      std::vector<Tangent> gg(pts.size(), Tangent::Zero(h[0].size()));
      full->subgradient(pts, gg);
      for (std::size_t k = 0; k < free_slots.size(); ++k) g[k] += gg[free_slots[k]];
    };
    frozen.push_back(std::move(f));
  }
  Signal tips(u.manifold, std::vector<Point>(state.data.begin() + n, state.data.end()));
  TipResult r;
  if (!frozen.empty()) {
    auto atoms = make_term_atoms("tips", std::move(frozen), tips.size());
    tips = cppa(atoms, tips, s).x;
  }
  for (std::size_t k = 0; k < init.size(); ++k) {
    Signal t = init[k];
    for (int i = 0; i < n; ++i) t[i] = tips[static_cast<int>(k) * n + i];
    r.tips.push_back(t);
  }
  ptrs.clear();
  for (const Signal& t : r.tips) ptrs.push_back(&t);
  r.energy = sum_terms(stgv_terms(u, w), stgv_state(u, ptrs));
  return r;
}

// --- infimal convolution (evaluation only) ---------------------------------

struct ICEvaluation {
  double energy = 0;
  /// max_i d(u_i, [v_i, w_i]_{1/2}).
  double constraint_residual = 0;
};

inline ICEvaluation ic_energy(const Signal& u, const Signal& v, const Signal& w, double alpha1, double alpha0,
                              double p = 1.0) {
  require_same_shape(u, v);
  require_same_shape(u, w);
  TVModel model{alpha1, 2.0, p, false};
  const double tv = v.is_image ? tv_regularizer_2d(v, model) : tv_energy_1d(v, v, model);
  ICEvaluation r;
  r.energy = 0.5 * (tv + alpha0 * tv2_energy(w, p));
  for (int i = 0; i < u.size(); ++i)
    r.constraint_residual = std::max(r.constraint_residual, u.M().dist(u[i], u.M().midpoint(v[i], w[i])));
  return r;
}

// --- denoising drivers --------------------------------------------------------

inline SolveResult denoise_tv2(const Signal& f, double alpha, double p, double q, const SolverSchedule& s,
                               InnerProxOptions inner = {}) {
  std::vector<Atom> atoms{make_data_atom(f, q)};
  for (Atom& a : make_term_atoms("tv2", tv2_terms(f, alpha, p), f.size(), AtomRole::regularizer, inner))
    atoms.push_back(std::move(a));
  return cppa(atoms, f, s, &f);
}

struct STGVResult {
  Signal u;
  std::vector<Signal> tips;
  SolveResult raw;
};

/// CPPA on the joint (u, tips) state; tips start at the canonical choice.
inline STGVResult denoise_stgv(const Signal& f, const TGVWeights& w, double q, const SolverSchedule& s,
                               InnerProxOptions inner = {}) {
  const std::vector<Signal> init = canonical_tips(f);
  std::vector<const Signal*> ptrs;
  for (const Signal& t : init) ptrs.push_back(&t);
  const Signal state = stgv_state(f, ptrs);
  const int n = f.size();
  std::vector<int> active(n);
  std::iota(active.begin(), active.end(), 0);
  Signal target = state;  // data atom only looks at the u slots
  std::vector<Atom> atoms{make_data_atom(target, q, active)};
  for (Atom& a : make_term_atoms("stgv", stgv_terms(f, w), state.size(), AtomRole::regularizer, inner))
    atoms.push_back(std::move(a));
  STGVResult r;
  r.raw = cppa(atoms, state, s, &state);
  r.u = f;
  for (int i = 0; i < n; ++i) r.u[i] = r.raw.x[i];
  for (std::size_t k = 0; k < init.size(); ++k) {
    Signal t = init[k];
    for (int i = 0; i < n; ++i) t[i] = r.raw.x[static_cast<int>(k + 1) * n + i];
    r.tips.push_back(t);
  }
  return r;
}

}  // namespace mvr
