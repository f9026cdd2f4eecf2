#pragma once

#include "mvr/io.hpp"

#include <array>

namespace mvr {

using Rgb = std::array<double, 3>;

namespace detail {

inline Rgb hue_rgb(double h) {
  h = 6.0 * (h - std::floor(h));
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  switch (static_cast<int>(h) % 6) {
    case 0: return {1, x, 0};
    case 1: return {x, 1, 0};
    case 2: return {0, 1, x};
    case 3: return {0, x, 1};
    case 4: return {x, 0, 1};
    default: return {1, 0, x};
  }
}

/// Fractional anisotropy of an SPD matrix, in [0, 1].
inline double anisotropy(const Point& x, int n) {
  if (n < 2) return 0.0;
  const Eigen::MatrixXd m = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  const Eigen::VectorXd l = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose()),
                                                                           Eigen::EigenvaluesOnly)
                                .eigenvalues();
  const double mean = l.mean();
  const double den = l.squaredNorm();
  if (den <= 0) return 0.0;
  return std::min(1.0, std::sqrt(n / (n - 1.0)) * std::sqrt((l.array() - mean).square().sum() / den));
}

/// Colour of one sample. `lo`/`hi` carry the euclidean first-coordinate range.
inline Rgb sample_colour(const ManifoldDescriptor& d, const Point& x, int offset, double lo, double hi) {
  switch (d.kind) {
    case ManifoldKind::circle: return hue_rgb((x[offset] + kPi) / (2 * kPi));
    case ManifoldKind::sphere: {
      Rgb c{0.5, 0.5, 0.5};
      for (int k = 0; k < std::min(3, d.ambient_dim); ++k) c[k] = 0.5 * (x[offset + k] + 1.0);
      return c;
    }
    case ManifoldKind::spd: {
      const double a = anisotropy(x.segment(offset, d.ambient_dim), d.parameter);
      return {a, a, a};
    }
    case ManifoldKind::rotations3: {
      // Rotation vector scaled by pi.
      const Eigen::Matrix3d r = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(x.data() + offset);
      const Eigen::AngleAxisd aa(r);
      const Eigen::Vector3d v = aa.angle() / kPi * aa.axis();
      return {0.5 * (v[0] + 1), 0.5 * (v[1] + 1), 0.5 * (v[2] + 1)};
    }
    case ManifoldKind::product: return sample_colour(d.factors.front(), x, offset, lo, hi);
    default: {
      const double g = hi > lo ? (x[offset] - lo) / (hi - lo) : 0.5;
      return {g, g, g};
    }
  }
}

}  // namespace detail

/// Binary PPM (P6). Images map one pixel per sample; 1-D signals become a
/// strip `strip_height` pixels tall.
inline std::string render_ppm(const Signal& s, int strip_height = 16) {
  const ManifoldDescriptor& d = s.M().descriptor();
  const ManifoldDescriptor& first = d.kind == ManifoldKind::product ? d.factors.front() : d;
  double lo = 0, hi = 0;
  if (first.kind == ManifoldKind::euclidean && s.size() > 0) {
    lo = hi = s[0][0];
    for (const Point& x : s.data) {
      lo = std::min(lo, x[0]);
      hi = std::max(hi, x[0]);
    }
  }
  const int w = s.is_image ? s.cols : s.size();
  const int h = s.is_image ? s.rows : strip_height;
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<Rgb> colours;
  colours.reserve(s.size());
  for (const Point& x : s.data) colours.push_back(detail::sample_colour(d, x, 0, lo, hi));
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const Rgb& c = colours[s.is_image ? i * w + j : j];
      for (double v : c) out += static_cast<char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    }
  return out;
}

inline void write_ppm(const std::string& path, const Signal& s) { write_text(path, render_ppm(s)); }

}  // namespace mvr
