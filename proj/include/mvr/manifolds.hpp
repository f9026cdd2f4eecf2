#pragma once

#include "mvr/manifold.hpp"
#include "mvr/manifolds/circle.hpp"
#include "mvr/manifolds/euclidean.hpp"
#include "mvr/manifolds/product.hpp"
#include "mvr/manifolds/rotations.hpp"
#include "mvr/manifolds/sphere.hpp"
#include "mvr/manifolds/spd.hpp"

#include <cctype>
#include <string_view>

namespace mvr {

inline ManifoldPtr make_euclidean(int d) { return std::make_shared<Euclidean>(d); }
inline ManifoldPtr make_circle() { return std::make_shared<Circle>(); }
inline ManifoldPtr make_sphere(int n = 2) { return std::make_shared<Sphere>(n); }
inline ManifoldPtr make_rotations3() { return std::make_shared<Rotations3>(); }
inline ManifoldPtr make_spd(int n = 3) { return std::make_shared<SPD>(n); }
inline ManifoldPtr make_product(std::vector<ManifoldPtr> factors) {
  return std::make_shared<Product>(std::move(factors));
}

namespace detail {

inline int parse_dim(std::string_view s, std::string_view whole) {
  if (s.empty()) throw ArgumentError("missing dimension in manifold spec '" + std::string(whole) + "'");
  int v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c)) || v > 100000)
      throw ArgumentError("bad dimension in manifold spec '" + std::string(whole) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

inline ManifoldPtr parse_manifold(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.substr(0, 8) == "product(" && s.back() == ')') {
    std::vector<ManifoldPtr> factors;
    std::string_view body = s.substr(8, s.size() - 9);
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i == body.size() || (body[i] == ',' && depth == 0)) {
        factors.push_back(parse_manifold(body.substr(start, i - start)));
        start = i + 1;
      } else if (body[i] == '(') {
        ++depth;
      } else if (body[i] == ')') {
        --depth;
      }
    }
    return make_product(std::move(factors));
  }
  const std::size_t colon = s.find(':');
  const std::string_view name = s.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? "" : s.substr(colon + 1);
  if (name == "euclidean") return make_euclidean(arg.empty() ? 1 : parse_dim(arg, s));
  if (name == "circle" && arg.empty()) return make_circle();
  if (name == "sphere") return make_sphere(arg.empty() ? 2 : parse_dim(arg, s));
  if ((name == "so3" || name == "rotations3") && arg.empty()) return make_rotations3();
  if (name == "spd") return make_spd(arg.empty() ? 3 : parse_dim(arg, s));
  throw ArgumentError("unknown manifold spec '" + std::string(s) + "'");
}

}  // namespace detail

/// Builds a manifold from its textual spec, e.g. "sphere:2", "spd:3",
/// "product(circle,euclidean:2)".
inline ManifoldPtr make_manifold(const std::string& spec) { return detail::parse_manifold(spec); }

}  // namespace mvr
