#include "unkml/species.hpp"

#include <algorithm>
#include <cmath>

#include "unkml/error.hpp"

namespace unkml {

double round_half_even(double x) {
  const double lower = std::floor(x);
  const double diff = x - lower;
  if (diff < 0.5) return lower;
  if (diff > 0.5) return lower + 1.0;
  return std::fmod(lower, 2.0) == 0.0 ? lower : lower + 1.0;
}

double sample_coverage(const FrequencyProfile& profile) {
  if (profile.total == 0) return 0.0;
  return 1.0 - static_cast<double>(profile.singletons()) / static_cast<double>(profile.total);
}

Coverage good_turing_coverage(const FrequencyProfile& profile) {
  if (profile.total == 0) throw Error(ErrorKind::empty_input, "coverage of an empty profile");
  const double raw = sample_coverage(profile);
  if (raw < kMinCoverage) return {kMinCoverage, true};
  return {std::min(raw, 1.0), false};
}

SpeciesEstimate chao92(const FrequencyProfile& profile) {
  if (profile.total < 2)
    throw Error(ErrorKind::insufficient_data, "chao92 needs at least two observations");

  const Coverage coverage = good_turing_coverage(profile);
  const double c = static_cast<double>(profile.distinct);
  const double n = static_cast<double>(profile.total);
  const double f1 = static_cast<double>(profile.singletons());

  double pair_sum = 0.0;
  for (const auto& [i, fi] : profile.counts) {
    const double m = static_cast<double>(i);
    pair_sum += m * (m - 1.0) * static_cast<double>(fi);
  }

  SpeciesEstimate est;
  est.coverage_hat = coverage.value;
  est.low_coverage = coverage.low_coverage;
  est.cv_squared = std::max((c / est.coverage_hat) * pair_sum / (n * (n - 1.0)) - 1.0, 0.0);
  est.d_chao92 = c / est.coverage_hat + f1 * est.cv_squared / est.coverage_hat;
  const double rounded = round_half_even(est.d_chao92);
  est.unknown_count = rounded > c ? static_cast<std::uint64_t>(rounded - c) : 0;
  return est;
}

}  // namespace unkml
