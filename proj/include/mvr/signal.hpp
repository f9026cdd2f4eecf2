#pragma once

#include "mvr/manifolds.hpp"

namespace mvr {

/// A 1-D signal (cols == 1) or a 2-D image stored row-major, all samples on
/// one manifold. Pixel (i, j) lives at index i * cols + j.
struct Signal {
  ManifoldPtr manifold;
  std::vector<Point> data;
  int rows = 0;
  int cols = 1;
  bool is_image = false;

  Signal() = default;
  Signal(ManifoldPtr m, std::vector<Point> pts)
      : manifold(std::move(m)), data(std::move(pts)), rows(static_cast<int>(data.size())) {}
  Signal(ManifoldPtr m, std::vector<Point> pts, int r, int c)
      : manifold(std::move(m)), data(std::move(pts)), rows(r), cols(c), is_image(true) {
    if (static_cast<long>(r) * c != static_cast<long>(data.size()))
      throw ArgumentError("image shape does not match sample count");
  }

  int size() const { return static_cast<int>(data.size()); }
  Point& operator[](int i) { return data[i]; }
  const Point& operator[](int i) const { return data[i]; }
  Point& at(int i, int j) { return data[i * cols + j]; }
  const Point& at(int i, int j) const { return data[i * cols + j]; }
  const Manifold& M() const { return *manifold; }

  bool same_shape(const Signal& o) const {
    return rows == o.rows && cols == o.cols && size() == o.size() &&
           manifold->descriptor() == o.manifold->descriptor();
  }
};

inline void require_same_shape(const Signal& a, const Signal& b) {
  if (!a.same_shape(b)) throw ArgumentError("signal shape or manifold mismatch");
}

/// Mean pointwise distance between two signals.
inline double mean_dist(const Signal& a, const Signal& b) {
  require_same_shape(a, b);
  if (a.size() == 0) return 0.0;
  double s = 0;
  for (int i = 0; i < a.size(); ++i) s += a.M().dist(a[i], b[i]);
  return s / a.size();
}

}  // namespace mvr
