#pragma once

#include "mvr/manifolds.hpp"

namespace mvr {

/// A point tagged with its manifold; construction validates the constraint.
class ManifoldPoint {
 public:
  ManifoldPoint(ManifoldPtr m, Point coords, double tol = 1e-10)
      : m_(std::move(m)), coords_(std::move(coords)) {
    if (!m_) throw ArgumentError("null manifold");
    if (coords_.size() != m_->ambient_dim())
      throw ArgumentError("point has " + std::to_string(coords_.size()) + " coordinates, expected " +
                          std::to_string(m_->ambient_dim()));
    if (m_->constraint_violation(coords_) > tol)
      throw ArgumentError("point violates the " + m_->descriptor().to_string() + " constraint");
  }

  const ManifoldPtr& manifold() const { return m_; }
  const ManifoldDescriptor& descriptor() const { return m_->descriptor(); }
  const Point& coords() const { return coords_; }

 private:
  ManifoldPtr m_;
  Point coords_;
};

/// A tangent vector together with its base point.
class TangentVector {
 public:
  TangentVector(ManifoldPoint base, Tangent coeffs, double tol = 1e-10)
      : base_(std::move(base)), coeffs_(std::move(coeffs)) {
    const Manifold& m = *base_.manifold();
    if (coeffs_.size() != m.ambient_dim()) throw ArgumentError("tangent has wrong dimension");
    if (m.tangent_violation(base_.coords(), coeffs_) > tol * std::max(1.0, coeffs_.norm()))
      throw ArgumentError("vector is not tangent at its base point");
  }

  const ManifoldPoint& base() const { return base_; }
  const Tangent& coeffs() const { return coeffs_; }

 private:
  ManifoldPoint base_;
  Tangent coeffs_;
};

namespace detail {

inline void require_same(const ManifoldPoint& a, const ManifoldPoint& b) {
  if (a.descriptor() != b.descriptor())
    throw ArgumentError("manifold mismatch: " + a.descriptor().to_string() + " vs " +
                        b.descriptor().to_string());
}

inline void require_based_at(const TangentVector& v, const ManifoldPoint& p) {
  require_same(v.base(), p);
  if (v.base().coords() != p.coords()) throw ArgumentError("tangent vector is based elsewhere");
}

}  // namespace detail

struct LogMapResult {
  TangentVector v;
  bool non_unique;
};

inline ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v) {
  detail::require_based_at(v, p);
  const Manifold& m = *p.manifold();
  return ManifoldPoint(p.manifold(), m.project(m.exp(p.coords(), v.coeffs())), 1e-8);
}

inline LogMapResult log_map(const ManifoldPoint& p, const ManifoldPoint& q) {
  detail::require_same(p, q);
  LogResult r = p.manifold()->log_checked(p.coords(), q.coords());
  return {TangentVector(p, r.v, 1e-8), r.non_unique};
}

inline double dist(const ManifoldPoint& p, const ManifoldPoint& q) {
  detail::require_same(p, q);
  return p.manifold()->dist(p.coords(), q.coords());
}

inline ManifoldPoint geopoint(const ManifoldPoint& p, const ManifoldPoint& q, double t) {
  detail::require_same(p, q);
  const Manifold& m = *p.manifold();
  return ManifoldPoint(p.manifold(), m.project(m.geopoint(p.coords(), q.coords(), t)), 1e-8);
}

inline TangentVector parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                        const TangentVector& v) {
  detail::require_based_at(v, p);
  detail::require_same(p, q);
  return TangentVector(q, p.manifold()->transport(p.coords(), q.coords(), v.coeffs()), 1e-8);
}

inline double inner(const ManifoldPoint& p, const TangentVector& v, const TangentVector& w) {
  detail::require_based_at(v, p);
  detail::require_based_at(w, p);
  return p.manifold()->inner(p.coords(), v.coeffs(), w.coeffs());
}

enum class MapId { exp, log, geopoint_first, geopoint_second };

/// Directional derivative of a geometric map.
///   exp:             anchors (p), direction w at p, vector v given as `aux`
///   log:             d/dq log_p(q), anchors (p, q), direction at q
///   geopoint_first:  d/dp [p, q]_t, direction at p
///   geopoint_second: d/dq [p, q]_t, direction at q
/// With adjoint = true the metric adjoint is applied instead, mapping a
/// vector at the output base back to the input base.
inline Tangent diff_of_map(MapId id, const Manifold& m, const Point& p, const Point& q, double t,
                           const Tangent& direction, bool adjoint = false) {
  switch (id) {
    case MapId::exp: {
      // Here q holds the tangent v at p.
      if (!adjoint) return m.diff_exp(p, q, direction);
      return m.adjoint(p, m.exp(p, q), direction,
                       [&](const Tangent& xi) { return m.diff_exp(p, q, xi); });
    }
    case MapId::log:
      if (!adjoint) return m.diff_log_second(p, q, direction);
      return m.adjoint(q, p, direction, [&](const Tangent& xi) { return m.diff_log_second(p, q, xi); });
    case MapId::geopoint_first:
      if (!adjoint) return m.diff_geopoint_first(p, q, t, direction);
      return m.adjoint(p, m.geopoint(p, q, t), direction,
                       [&](const Tangent& xi) { return m.diff_geopoint_first(p, q, t, xi); });
    case MapId::geopoint_second:
      if (!adjoint) return m.diff_geopoint_second(p, q, t, direction);
      return m.adjoint(q, m.geopoint(p, q, t), direction,
                       [&](const Tangent& xi) { return m.diff_geopoint_second(p, q, t, xi); });
  }
  throw ArgumentError("unsupported map id");
}

}  // namespace mvr
