#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace mvr {

/// Raised for malformed calls: mismatched manifolds, bad shapes, invalid
/// parameters.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public ArgumentError {
 public:
  ParseError(const std::string& what, int line)
      : ArgumentError("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

/// Raised when a numerical procedure cannot produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap before reaching tolerance.
/// Carries the last iterate so callers can decide whether to use it anyway.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate,
                   double gradient_norm)
      : NumericalError(what),
        last_iterate_(std::move(last_iterate)),
        gradient_norm_(gradient_norm) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  Eigen::VectorXd last_iterate_;
  double gradient_norm_;
};

/// A geometric operation was asked for along an ambiguous (cut-locus) path.
class CutLocusError : public NumericalError {
 public:
  CutLocusError(const std::string& what, std::vector<int> indices = {})
      : NumericalError(what), indices_(std::move(indices)) {}

  const std::vector<int>& indices() const { return indices_; }

 private:
  std::vector<int> indices_;
};

}  // namespace mvr
