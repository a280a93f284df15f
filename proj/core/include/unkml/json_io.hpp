#pragma once

// JSON views of the library's results. Doubles are emitted at full
// round-trip precision.

#include <nlohmann/json.hpp>

#include "unkml/bucketize.hpp"
#include "unkml/correct.hpp"
#include "unkml/evaluate.hpp"
#include "unkml/models.hpp"
#include "unkml/simulate.hpp"
#include "unkml/species.hpp"

namespace unkml {

nlohmann::json to_json(const FrequencyProfile& profile);
nlohmann::json to_json(const SpeciesEstimate& estimate);
nlohmann::json to_json(const BucketSet& buckets, const Schema& schema);
nlohmann::json to_json(std::span<const EstimatedGroup> groups, const Schema& schema);
nlohmann::json to_json(const EvaluationReport& report);
nlohmann::json to_json(const TrainedModel& model);
nlohmann::json to_json(const SimulationConfig& cfg, const Schema& schema);

}  // namespace unkml
