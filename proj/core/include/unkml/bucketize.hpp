#pragma once

// Axis selection and coverage-driven partitioning of an integrated sample.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "unkml/dataset.hpp"
#include "unkml/species.hpp"

namespace unkml {

enum class AxisStrategy { correlation, variance, entropy, fixed };

AxisStrategy parse_axis_strategy(std::string_view name);
std::string_view to_string(AxisStrategy strategy);

struct BucketizeConfig {
  double theta = 0.5;  // minimum Good-Turing coverage of a committed bucket
  AxisStrategy axis = AxisStrategy::correlation;
  std::size_t fixed_axis = 0;  // used when axis == fixed

  // Throws Error(config) unless 0 < theta <= 1.
  void validate() const;
};

struct Bucket {
  std::vector<Record> members;  // duplicates preserved, ascending axis order
  double lo = 0.0;
  double hi = 0.0;
  FrequencyProfile profile;
  double coverage = 0.0;      // unclamped Good-Turing coverage of the members
  bool low_coverage = false;  // coverage < theta (only the last bucket may be)
  std::optional<SpeciesEstimate> estimate;

  std::uint64_t unknown_count() const { return estimate ? estimate->unknown_count : 0; }
};

struct BucketSet {
  std::size_t axis = 0;
  double theta = 0.0;
  std::vector<Bucket> buckets;

  std::size_t size() const { return buckets.size(); }
  std::uint64_t total_unknown() const;
};

/// Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Picks the bucketization axis among the numeric features. For the
/// correlation strategy a numeric label is correlated directly and a
/// categorical label through its per-class indicators. Ties go to the lowest
/// feature index.
std::size_t select_axis(const IntegratedSample& sample, AxisStrategy strategy,
                        std::size_t fixed_axis = 0);

/// Correlation against an explicit numeric target (e.g. a class indicator).
std::size_t select_axis(const IntegratedSample& sample, std::span<const double> target);

/// Greedy partition by ascending axis value. Before each record is added the
/// current bucket is committed if its coverage has reached theta; the empty
/// bucket has coverage 0. A trailing bucket below theta is merged into the
/// previous one, or kept alone if it is the only bucket. Equal axis values
/// keep input order and may straddle a boundary.
BucketSet dynamic_buckets(std::span<const Record> records, std::size_t axis, double theta);
BucketSet dynamic_buckets(const IntegratedSample& sample, std::size_t axis, double theta);

/// Fills every bucket's Chao92 estimate. Buckets with fewer than two
/// observations get no estimate (unknown count 0).
void estimate_unknowns(BucketSet& buckets);

}  // namespace unkml
