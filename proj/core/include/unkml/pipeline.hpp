#pragma once

// End-to-end driver: simulate -> estimate -> correct -> train/evaluate,
// writing JSON and CSV artifacts into an output directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "unkml/bucketize.hpp"
#include "unkml/correct.hpp"
#include "unkml/dataset.hpp"
#include "unkml/evaluate.hpp"
#include "unkml/models.hpp"
#include "unkml/simulate.hpp"

namespace unkml {

enum class Command { simulate, estimate, correct, evaluate, end2end };

Command parse_command(std::string_view name);
std::string_view to_string(Command command);

/// Report labels, in the order end2end emits them.
inline constexpr std::string_view kOriginal = "Original";
inline constexpr std::string_view kIdeal = "Ideal";
inline constexpr std::string_view kWeightByUnk = "WeightByUnk";
inline constexpr std::string_view kSynUnkKde = "SynUnk(KDE)";
inline constexpr std::string_view kSynUnkSmote = "SynUnk(SMOTE)";

struct PipelineConfig {
  Command command = Command::end2end;
  std::filesystem::path input;
  std::filesystem::path test;           // evaluate: the test sample T
  std::filesystem::path test_features;  // evaluate: required by the 2-stage LR baselines
  std::filesystem::path out_dir = ".";
  SchemaSpec schema;

  BucketizeConfig bucketize;
  std::string axis_feature;  // names the fixed axis when bucketize.axis == fixed
  CorrectionMode mode = CorrectionMode::synth_kde;
  KdeConfig kde;
  SmoteConfig smote;

  std::optional<ModelSpec> model;  // default: linreg / logreg by label kind
  std::optional<Loss> loss;        // default: default_loss(schema)
  std::string method = std::string(kOriginal);  // evaluate: report label
  bool train_raw = false;  // average training loss over the raw multiset

  SimulationConfig simulation;
  std::string bias_feature;  // resolved against the schema at run time

  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  bool baselines = false;  // end2end: also run 2-stage LR on the simulated T features
  std::size_t threads = 0;  // 0 = hardware concurrency

  /// Checks everything that does not need file contents. Throws Error(config).
  void validate() const;
};

struct RunResult {
  std::vector<std::filesystem::path> artifacts;
};

/// Runs one command. On failure every artifact written so far is removed and
/// the error is rethrown.
RunResult run(const PipelineConfig& config);

/// One end2end repetition's report rows, in method order. Rows for a method
/// the model cannot support (e.g. knn with weights) carry status
/// "unsupported" and no scores.
struct ReportRow {
  std::uint64_t seed = 0;
  std::string method;
  std::string status = "ok";
  EvaluationReport report;
};

std::vector<ReportRow> run_repetition(const IntegratedSample& base, const PipelineConfig& config,
                                      std::uint64_t seed);

/// CSV text of the report table (header included).
std::string format_report_table(const std::vector<ReportRow>& rows);

}  // namespace unkml
