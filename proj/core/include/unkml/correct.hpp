#pragma once

// Corrects a biased integrated sample using per-bucket unknown counts, either
// by reweighting existing records or by synthesizing the missing ones.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unkml/bucketize.hpp"
#include "unkml/dataset.hpp"

namespace unkml {

enum class CorrectionMode { weight, synth_kde, synth_smote };

CorrectionMode parse_correction_mode(std::string_view name);  // weight | kde | smote
std::string_view to_string(CorrectionMode mode);

struct SmoteConfig {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  // Draw a fresh interpolation factor per dimension instead of one per record.
  bool per_dimension_g = false;

  void validate() const;
};

struct KdeConfig {
  enum class Bandwidth { silverman, fixed };
  Bandwidth rule = Bandwidth::silverman;
  // Per modeled dimension, or a single value applied to all of them.
  std::vector<double> fixed_bandwidth;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthesisResult {
  std::vector<Record> records;
  bool skipped = false;  // fewer than two distinct source records
};

/// Normal-reference bandwidths for the jointly modeled numeric dimensions
/// (numeric features, then a numeric label) of a set of distinct records:
/// h_j = sigma_j * (4 / (d + 2))^(1 / (d + 4)) * m^(-1 / (d + 4)).
std::vector<double> silverman_bandwidths(std::span<const Record> distinct);

/// Draws `count` records from a Gaussian-kernel density over the distinct
/// members. Categorical fields are copied from the picked kernel center.
SynthesisResult kde_synthesize(std::span<const Record> members, std::uint64_t count, const KdeConfig& cfg);

/// Point on the segment from `from` to `to` at fraction g, applied to every
/// numeric field including a numeric label. Categorical fields come from
/// `from`.
Record interpolate(const Record& from, const Record& to, double g);

/// SMOTE-style synthesis: pick a distinct record, one of its k nearest
/// distinct neighbors (Euclidean over z-scored numeric features), and
/// interpolate between them.
SynthesisResult smote_synthesize(std::span<const Record> members, std::uint64_t count, const SmoteConfig& cfg);

/// Bucket set for one partition of the sample. Classification samples get
/// one group per class label.
struct EstimatedGroup {
  std::optional<std::string> class_label;
  BucketSet buckets;
};

std::vector<EstimatedGroup> estimate_groups(const IntegratedSample& sample, const BucketizeConfig& cfg);

struct BucketOutcome {
  std::size_t group = 0;
  std::size_t index = 0;
  std::optional<std::string> class_label;
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t unknown_count = 0;
  double weight = 0.0;          // weight mode
  std::size_t synthesized = 0;  // synthesis modes
  bool skipped = false;
};

struct CorrectionOutput {
  CorrectionMode mode = CorrectionMode::weight;
  // De-duplicated original records first, then synthetic records.
  IntegratedSample sample;
  std::vector<double> weights;  // weight mode only; parallel to sample
  std::vector<bool> synthetic;  // parallel to sample
  std::vector<BucketOutcome> buckets;
  bool uniform_fallback = false;  // weight mode with zero total unknowns

  std::size_t synthetic_count() const;
};

/// Every distinct record gets the weight unknown_b / sum of unknowns of the
/// bucket holding its first occurrence. Bucket weights sum to one; a zero
/// total falls back to uniform bucket weights.
CorrectionOutput weight_by_unknown_count(const Schema& schema, std::span<const BucketSet> sets);
CorrectionOutput weight_by_unknown_count(const Schema& schema, const BucketSet& set);

struct CorrectionConfig {
  BucketizeConfig bucketize;
  KdeConfig kde;
  SmoteConfig smote;
  // Master seed; the synthesis stream of bucket b (counted across groups)
  // is seeded with seed + b.
  std::uint64_t seed = 0;
};

CorrectionOutput apply_correction(const IntegratedSample& sample, std::span<const EstimatedGroup> groups,
                                  CorrectionMode mode, const CorrectionConfig& cfg);

/// estimate_groups followed by apply_correction.
CorrectionOutput correct(const IntegratedSample& sample, CorrectionMode mode, const CorrectionConfig& cfg);

}  // namespace unkml
