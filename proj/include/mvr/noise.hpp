#pragma once

#include "mvr/signal.hpp"

#include <algorithm>

#include <random>

namespace mvr {

namespace detail {

/// Uniform draw in (0, 1].
inline double unit_open_left(std::mt19937_64& rng) {
  return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline Point vmf_draw(const Point& mu, double kappa, std::mt19937_64& rng) {
  // Inverse CDF of the cosine to mu: w = 1 + log(u + (1 - u) e^{-2 kappa}) / kappa.
  const double u = unit_open_left(rng);
  double w = 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
  w = std::clamp(w, -1.0, 1.0);
  const double phi = 2.0 * kPi * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  Eigen::Vector3d m = mu.head<3>();
  Eigen::Vector3d axis = Eigen::Vector3d::Zero();
  Eigen::Index k = 0;
  m.cwiseAbs().minCoeff(&k);
  axis[k] = 1.0;
  const Eigen::Vector3d e1 = (axis - axis.dot(m) * m).normalized();
  const Eigen::Vector3d e2 = m.cross(e1);
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  Eigen::Vector3d x = w * m + s * (std::cos(phi) * e1 + std::sin(phi) * e2);
  return Point(x.normalized());
}

/// Best-Fisher rejection sampler.
inline double von_mises_draw(double mu, double kappa, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (kappa < 1e-8) return wrap_angle(mu + 2.0 * kPi * unif(rng));
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
  const double r = (1.0 + b * b) / (2.0 * b);
  for (;;) {
    const double u1 = unif(rng), u2 = unit_open_left(rng), u3 = unif(rng);
    const double z = std::cos(kPi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0 || std::log(c / u2) + 1.0 - c >= 0) {
      const double theta = (u3 > 0.5 ? 1.0 : -1.0) * std::acos(std::clamp(f, -1.0, 1.0));
      return wrap_angle(mu + theta);
    }
  }
}

}  // namespace detail

/// von Mises-Fisher draws on S^2 with mean direction mu.
inline std::vector<Point> sample_vmf(const Point& mu, double kappa, int count, std::uint64_t seed) {
  if (mu.size() != 3 || std::abs(mu.norm() - 1.0) > 1e-10) throw ArgumentError("vMF needs a unit vector in R^3");
  if (!(kappa > 0)) throw ArgumentError("kappa must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(detail::vmf_draw(mu, kappa, rng));
  return out;
}

inline std::vector<double> sample_von_mises(double mu, double kappa, int count, std::uint64_t seed) {
  if (!(kappa >= 0)) throw ArgumentError("kappa must be nonnegative");
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(detail::von_mises_draw(mu, kappa, rng));
  return out;
}

/// exp_p of Gaussian tangent vectors with per-coordinate deviation sigma in
/// an orthonormal tangent basis.
inline std::vector<Point> sample_tangent_gaussian(const Manifold& m, const Point& p, double sigma, int count,
                                                  std::uint64_t seed) {
  if (!(sigma >= 0)) throw ArgumentError("sigma must be nonnegative");
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(sigma == 0 ? p : m.project(m.exp(p, m.random_tangent(p, rng, sigma))));
  return out;
}

enum class NoiseKind { automatic, vmf, von_mises, gaussian };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::automatic;
  double kappa = 100.0;
  double sigma = 0.1;
  std::uint64_t seed = 0;
};

/// Corrupts every sample with its own draw from one seeded stream.
/// automatic picks vMF on S^2, von Mises on the circle and tangent Gaussian
/// noise elsewhere (including SPD, where no matrix Rician recipe is used).
inline Signal add_noise(const Signal& h, const NoiseSpec& spec) {
  const ManifoldDescriptor& d = h.M().descriptor();
  NoiseKind kind = spec.kind;
  if (kind == NoiseKind::automatic) {
    kind = d.kind == ManifoldKind::sphere && d.parameter == 2 ? NoiseKind::vmf
           : d.kind == ManifoldKind::circle                   ? NoiseKind::von_mises
                                                              : NoiseKind::gaussian;
  }
  if (kind == NoiseKind::vmf && !(d.kind == ManifoldKind::sphere && d.parameter == 2))
    throw ArgumentError("vMF noise needs sphere:2");
  if (kind == NoiseKind::von_mises && d.kind != ManifoldKind::circle) throw ArgumentError("von Mises noise needs the circle");
  if ((kind == NoiseKind::vmf || kind == NoiseKind::von_mises) && !(spec.kappa > 0))
    throw ArgumentError("kappa must be positive");
  if (kind == NoiseKind::gaussian && !(spec.sigma >= 0)) throw ArgumentError("sigma must be nonnegative");
  std::mt19937_64 rng(spec.seed);
  Signal out = h;
  for (int i = 0; i < h.size(); ++i) {
    switch (kind) {
      case NoiseKind::vmf: out[i] = detail::vmf_draw(h[i], spec.kappa, rng); break;
      case NoiseKind::von_mises: out[i] = Point::Constant(1, detail::von_mises_draw(h[i][0], spec.kappa, rng)); break;
      default:
        if (spec.sigma > 0) out[i] = h.M().project(h.M().exp(h[i], h.M().random_tangent(h[i], rng, spec.sigma)));
        break;
    }
  }
  return out;
}

/// 10 log10(sum d(h, f)^2 / sum d(h, u)^2); +inf when u equals h.
inline double delta_snr(const Signal& h, const Signal& f, const Signal& u) {
  require_same_shape(h, f);
  require_same_shape(h, u);
  double num = 0, den = 0;
  for (int i = 0; i < h.size(); ++i) {
    const double a = h.M().dist(h[i], f[i]);
    const double b = h.M().dist(h[i], u[i]);
    num += a * a;
    den += b * b;
  }
  if (den == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / den);
}

}  // namespace mvr
