#pragma once

#include "mvr/manifolds.hpp"

#include <utility>

namespace mvr {

enum class ProxVariant { power, huber };

/// lambda: prox step. alpha: weight of the pairwise term. q: exponent of the
/// data or pair term. omega, tau: Huber slope and gluing point.
struct ProxParams {
  double lambda = 1.0;
  double alpha = 1.0;
  double q = 2.0;
  ProxVariant variant = ProxVariant::power;
  double omega = 1.0;
  double tau = 1.0;
};

/// Huber function: omega s^2 / (2 tau) below tau, omega (s - tau / 2) above.
inline double huber(double s, double omega, double tau) {
  return s <= tau ? omega * s * s / (2.0 * tau) : omega * (s - 0.5 * tau);
}

namespace detail {

/// Geodesic parameter t minimizing ((1-t) d)^q / q + (t d)^2 / (2 lambda)
/// on [0, 1]. The derivative is increasing in t so bisection is safe.
inline double data_power_t(double d, double lambda, double q) {
  auto slope = [&](double t) { return -d * std::pow((1.0 - t) * d, q - 1.0) + t * d * d / lambda; };
  double lo = 0.0, hi = 1.0;
  if (slope(hi) <= 0) return 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// prox of y -> d(y, f)^q / q at x: the point [x, f]_t.
inline Point prox_data(const Manifold& m, const Point& x, const Point& f, double lambda, double q = 2.0) {
  if (lambda <= 0 || x == f) return x;
  const double d = m.dist(x, f);
  if (d == 0.0) return x;
  double t;
  if (q == 2.0) {
    t = lambda / (1.0 + lambda);
  } else if (q == 1.0) {
    t = std::min(lambda / d, 1.0);
  } else {
    t = detail::data_power_t(d, lambda, q);
  }
  if (t >= 1.0) return f;
  return m.project(m.geopoint(x, f, t));
}

/// prox of y -> huber(d(y, f)) at x.
//
// Along the geodesic y = [x, f]_t the residual is s = (1 - t) d. The linear
// branch gives t = lambda omega / d and is valid while d - lambda omega > tau;
// otherwise the parabola gives t = c / (1 + c) with c = lambda omega / tau.
// Both agree at the branch boundary.
inline Point prox_data_huber(const Manifold& m, const Point& x, const Point& f, double lambda,
                             double omega, double tau) {
  if (lambda <= 0 || x == f) return x;
  const double d = m.dist(x, f);
  if (d == 0.0) return x;
  double t;
  if (d - lambda * omega > tau) {
    t = lambda * omega / d;
  } else {
    const double c = lambda * omega / tau;
    t = c / (1.0 + c);
  }
  return m.project(m.geopoint(x, f, t));
}

/// prox of (y1, y2) -> alpha d(y1, y2): both points move toward each other
/// by t = min(lambda alpha / d, 1/2).
inline std::pair<Point, Point> prox_pair(const Manifold& m, const Point& x1, const Point& x2,
                                         double lambda, double alpha) {
  if (x1 == x2) return {x1, x2};  // dist(x, x) is only ~1e-8 on some manifolds
  const double d = m.dist(x1, x2);
  if (d == 0.0 || lambda * alpha <= 0) return {x1, x2};
  const double t = std::min(lambda * alpha / d, 0.5);
  if (t == 0.5) {
    const Point c = m.project(m.midpoint(x1, x2));
    return {c, c};
  }
  return {m.project(m.geopoint(x1, x2, t)), m.project(m.geopoint(x2, x1, t))};
}

/// prox of (y1, y2) -> (alpha / 2) d(y1, y2)^2, t = lambda alpha / (1 + 2 lambda alpha).
inline std::pair<Point, Point> prox_pair_quadratic(const Manifold& m, const Point& x1, const Point& x2,
                                                   double lambda, double alpha) {
  if (x1 == x2 || lambda * alpha <= 0 || m.dist(x1, x2) == 0.0) return {x1, x2};
  const double la = lambda * alpha;
  const double t = std::isinf(la) ? 0.5 : la / (1.0 + 2.0 * la);
  return {m.project(m.geopoint(x1, x2, t)), m.project(m.geopoint(x2, x1, t))};
}

/// prox of (y1, y2) -> alpha huber(d(y1, y2)).
//
// With s = (1 - 2t) d the linear branch gives t = lambda alpha omega / d when
// d - 2 lambda alpha omega > tau. Otherwise the parabola acts like the
// quadratic pair prox with weight alpha omega / tau.
inline std::pair<Point, Point> prox_pair_huber(const Manifold& m, const Point& x1, const Point& x2,
                                               double lambda, double alpha, double omega, double tau) {
  if (x1 == x2) return {x1, x2};  // dist(x, x) is only ~1e-8 on some manifolds
  const double d = m.dist(x1, x2);
  if (d == 0.0 || lambda * alpha <= 0) return {x1, x2};
  double t;
  if (d - 2.0 * lambda * alpha * omega > tau) {
    t = lambda * alpha * omega / d;
  } else {
    const double la = lambda * alpha * omega / tau;
    t = la / (1.0 + 2.0 * la);
  }
  return {m.project(m.geopoint(x1, x2, t)), m.project(m.geopoint(x2, x1, t))};
}

// ProxParams front ends.

inline Point prox_data(const Manifold& m, const Point& x, const Point& f, const ProxParams& p) {
  if (p.variant == ProxVariant::huber) return prox_data_huber(m, x, f, p.lambda, p.omega, p.tau);
  return prox_data(m, x, f, p.lambda, p.q);
}

inline std::pair<Point, Point> prox_pair(const Manifold& m, const Point& x1, const Point& x2,
                                         const ProxParams& p) {
  if (p.variant == ProxVariant::huber) return prox_pair_huber(m, x1, x2, p.lambda, p.alpha, p.omega, p.tau);
  if (p.q == 2.0) return prox_pair_quadratic(m, x1, x2, p.lambda, p.alpha);
  return prox_pair(m, x1, x2, p.lambda, p.alpha);
}

}  // namespace mvr
