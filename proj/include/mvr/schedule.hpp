#pragma once

#include "mvr/errors.hpp"

#include <cmath>
#include <cstdint>

namespace mvr {

enum class AtomOrder { fixed, shuffled };

/// Step sizes lambda_k = lambda0 / k^decay plus stopping rules. decay must
/// lie in (1/2, 1] so the steps are square summable but not summable.
struct SolverSchedule {
  double lambda0 = 1.0;
  double decay = 1.0;
  int max_iters = 1000;
  double tol = 1e-8;
  std::uint64_t rng_seed = 0;
  AtomOrder order = AtomOrder::fixed;

  void validate() const {
    if (!(lambda0 >= 0)) throw ArgumentError("lambda0 must be nonnegative");
    if (!(decay > 0.5 && decay <= 1.0)) throw ArgumentError("decay must lie in (1/2, 1]");
    if (max_iters < 0) throw ArgumentError("max_iters must be nonnegative");
    if (!(tol >= 0)) throw ArgumentError("tol must be nonnegative");
  }

  /// Step for iteration k >= 1.
  double lambda(int k) const { return lambda0 / std::pow(static_cast<double>(k), decay); }
};

}  // namespace mvr
