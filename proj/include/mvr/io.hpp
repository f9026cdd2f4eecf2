#pragma once

#include "mvr/solver.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mvr {

// MVS text format:
//
//   MVS 1
//   manifold <spec>
//   shape <N> | shape <rows> <cols>
//   ambient <D>
//   <D numbers>          one line per sample, row-major
//
// Lines starting with '#' and blank lines are ignored everywhere.

struct ReadResult {
  Signal signal;
  std::vector<std::string> warnings;
};

/// Shortest decimal text that parses back to exactly x.
inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

namespace detail {

/// Wraps circle coordinates (also inside products) into the canonical range.
inline bool wrap_circles(const ManifoldDescriptor& d, Point& x, int offset = 0) {
  bool changed = false;
  if (d.kind == ManifoldKind::circle) {
    const double w = wrap_angle(x[offset]);
    changed = w != x[offset];
    x[offset] = w;
  } else if (d.kind == ManifoldKind::product) {
    for (const auto& f : d.factors) {
      changed = wrap_circles(f, x, offset) || changed;
      offset += f.ambient_dim;
    }
  }
  return changed;
}

inline bool parse_number(std::string_view tok, double& out) {
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return r.ec == std::errc() && r.ptr == tok.data() + tok.size() && std::isfinite(out);
}

inline std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> t;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t s = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > s) t.push_back(line.substr(s, i - s));
  }
  return t;
}

}  // namespace detail

/// Parses MVS text. Samples off the manifold by at most 1e-8 pass as is, up
/// to 1e-4 they are projected with a warning, beyond that parsing fails.
/// Circle angles are wrapped (with a warning) before the check.
inline ReadResult parse_mvs(std::istream& in) {
  ReadResult res;
  std::string line;
  int lineno = 0;
  auto next = [&](std::vector<std::string_view>& tok) {
    while (std::getline(in, line)) {
      ++lineno;
      tok = detail::tokens(line);
      if (tok.empty() || tok[0].front() == '#') continue;
      return true;
    }
    return false;
  };
  std::vector<std::string_view> tok;
  if (!next(tok) || tok.size() != 2 || tok[0] != "MVS" || tok[1] != "1")
    throw ParseError("expected header 'MVS 1'", lineno);
  if (!next(tok) || tok.size() != 2 || tok[0] != "manifold") throw ParseError("expected 'manifold <spec>'", lineno);
  ManifoldPtr m;
  try {
    m = make_manifold(std::string(tok[1]));
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), lineno);
  }
  if (!next(tok) || (tok.size() != 2 && tok.size() != 3) || tok[0] != "shape")
    throw ParseError("expected 'shape <N>' or 'shape <rows> <cols>'", lineno);
  auto count = [&](std::string_view t) {
    double v = 0;
    if (!detail::parse_number(t, v) || v < 1 || v != std::floor(v) || v > 1e8)
      throw ParseError("bad dimension '" + std::string(t) + "'", lineno);
    return static_cast<int>(v);
  };
  const bool image = tok.size() == 3;
  const int rows = count(tok[1]);
  const int cols = image ? count(tok[2]) : 1;
  if (!next(tok) || tok.size() != 2 || tok[0] != "ambient") throw ParseError("expected 'ambient <D>'", lineno);
  const int dim = count(tok[1]);
  if (dim != m->ambient_dim())
    throw ParseError("ambient dimension " + std::to_string(dim) + " does not match " + m->descriptor().to_string(),
                     lineno);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(rows) * cols);
  for (long k = 0; k < static_cast<long>(rows) * cols; ++k) {
    if (!next(tok)) throw ParseError("missing sample " + std::to_string(k), lineno + 1);
    if (static_cast<int>(tok.size()) != dim)
      throw ParseError("expected " + std::to_string(dim) + " numbers, got " + std::to_string(tok.size()), lineno);
    Point x(dim);
    for (int c = 0; c < dim; ++c)
      if (!detail::parse_number(tok[c], x[c])) throw ParseError("bad number '" + std::string(tok[c]) + "'", lineno);
    if (detail::wrap_circles(m->descriptor(), x))
      res.warnings.push_back("line " + std::to_string(lineno) + ": angle wrapped into [-pi, pi)");
    const double v = m->constraint_violation(x);
    if (!(v <= 1e-4)) throw ParseError("sample is off the manifold by " + format_double(v), lineno);
    if (v > 1e-8) {
      x = m->project(x);
      res.warnings.push_back("line " + std::to_string(lineno) + ": sample re-projected onto the manifold");
    }
    pts.push_back(std::move(x));
  }
  if (next(tok)) throw ParseError("unexpected content after the last sample", lineno);
  res.signal = image ? Signal(m, std::move(pts), rows, cols) : Signal(m, std::move(pts));
  return res;
}

inline ReadResult read_mvs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  return parse_mvs(in);
}

inline std::string format_mvs(const Signal& s) {
  std::string out = "MVS 1\nmanifold " + s.M().descriptor().to_string() + "\nshape ";
  out += s.is_image ? std::to_string(s.rows) + " " + std::to_string(s.cols) : std::to_string(s.size());
  out += "\nambient " + std::to_string(s.M().ambient_dim()) + "\n";
  for (const Point& x : s.data) {
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      if (c) out += ' ';
      out += format_double(x[c]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ArgumentError("write to '" + path + "' failed");
}

inline void write_mvs(const std::string& path, const Signal& s) { write_text(path, format_mvs(s)); }

/// CSV energy trace: iteration,data,regularizer,total[,jumps].
inline std::string format_trace(const std::vector<TraceRow>& rows, const std::vector<int>* jumps = nullptr) {
  std::string out = jumps ? "iteration,data,regularizer,total,jumps\n" : "iteration,data,regularizer,total\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const TraceRow& r = rows[k];
    out += std::to_string(r.iteration) + "," + format_double(r.data) + "," + format_double(r.regularizer) + "," +
           format_double(r.total());
    if (jumps) out += "," + std::to_string((*jumps)[k]);
    out += '\n';
  }
  return out;
}

}  // namespace mvr
