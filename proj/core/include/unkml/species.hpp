#pragma once

// Sample-coverage species estimation over a frequency profile.

#include <cstddef>
#include <cstdint>

#include "unkml/dataset.hpp"

namespace unkml {

/// Coverage floor applied when every observation is a singleton and the
/// Good-Turing estimate collapses to zero.
inline constexpr double kMinCoverage = 0.01;

struct Coverage {
  double value = 0.0;
  bool low_coverage = false;  // true when the floor was applied
};

struct SpeciesEstimate {
  double coverage_hat = 0.0;  // C^
  double cv_squared = 0.0;    // gamma^2
  double d_chao92 = 0.0;      // D^, estimated total distinct items
  std::uint64_t unknown_count = 0;
  bool low_coverage = false;
};

/// Unclamped Good-Turing estimate 1 - f_1/n. Zero for an empty profile.
double sample_coverage(const FrequencyProfile& profile);

/// Good-Turing estimate clamped to [kMinCoverage, 1]. Throws on n == 0.
Coverage good_turing_coverage(const FrequencyProfile& profile);

/// Chao92 distinct-count estimate with coefficient-of-variation correction:
///
///   D^ = c/C^ + f_1 * gamma^2 / C^
///   gamma^2 = max(c/C^ * sum_i i(i-1) f_i / (n(n-1)) - 1, 0)
///
/// unknown_count is round-half-to-even(D^) - c, floored at zero. Requires
/// n >= 2.
SpeciesEstimate chao92(const FrequencyProfile& profile);

/// Round half to even, independent of the floating-point environment.
double round_half_even(double x);

}  // namespace unkml
