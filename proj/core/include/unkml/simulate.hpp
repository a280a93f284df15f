#pragma once

// Experimental harness: split a base dataset into a hidden uniform test
// sample and a source population, then draw several biased, overlapping
// without-replacement sources and integrate them into one training multiset.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "unkml/dataset.hpp"

namespace unkml {

struct BiasModel {
  enum class Kind { uniform, logistic, threshold };
  Kind kind = Kind::uniform;
  std::size_t feature = 0;  // numeric feature index the bias acts on
  double strength = 0.0;    // logistic: beta applied to the z-scored feature
  double cutoff = 0.0;      // threshold: records with value < cutoff ...
  double ratio = 1.0;       // ... are included with this relative weight
};

BiasModel::Kind parse_bias_kind(std::string_view name);
std::string_view to_string(BiasModel::Kind kind);

struct SimulationConfig {
  std::size_t sources = 10;
  std::vector<std::size_t> source_sizes{50};  // one entry per source, or one shared size
  BiasModel bias;
  double test_fraction = 0.3;
  // Draw the sources from the test sample itself (S subset of T) instead of
  // from the disjoint remainder.
  bool sources_from_test = false;
  std::uint64_t seed = 0;

  std::size_t source_size(std::size_t source) const;
  void validate() const;
};

struct PopulationSplit {
  IntegratedSample population;  // what the sources are drawn from
  IntegratedSample test;        // uniform holdout T
};

/// Uniform random split; both sides keep the base order.
PopulationSplit split_population(const IntegratedSample& base, double test_fraction, std::uint64_t seed);

/// Relative inclusion weight of each record under the bias model.
std::vector<double> inclusion_weights(std::span<const Record> records, const BiasModel& bias);

/// Draws each source by sequential weighted sampling without replacement
/// (renormalizing after every draw) over the distinct population records and
/// concatenates the sources in index order. Source j uses its own stream
/// derived from (seed, j).
IntegratedSample draw_sources(const IntegratedSample& population, const SimulationConfig& cfg);

struct Simulation {
  IntegratedSample train;  // integrated S with cross-source duplicates
  IntegratedSample test;   // T
};

Simulation simulate(const IntegratedSample& base, const SimulationConfig& cfg);

}  // namespace unkml
