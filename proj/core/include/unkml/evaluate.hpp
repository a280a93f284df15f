#pragma once

// Metrics, empirical generalization error and the impact of unknown
// unknowns, plus the test-data-based importance-weighting baselines used for
// comparison.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unkml/dataset.hpp"
#include "unkml/models.hpp"

namespace unkml {

double mae(std::span<const double> predictions, std::span<const double> labels);
double accuracy(std::span<const Value> predictions, std::span<const Value> labels);

struct EvaluationOptions {
  std::string method = "Original";
  Loss loss = Loss::absolute;
  // Average the training loss over the de-duplicated S (the set the learner
  // saw) rather than the raw multiset.
  bool deduplicate_train = true;
  std::uint64_t seed = 0;
};

struct EvaluationReport {
  std::string method;
  double train_score = 0.0;  // MAE (regression) or ACC (classification)
  double test_score = 0.0;
  double train_loss = 0.0;   // mean loss over S
  double test_loss = 0.0;    // mean loss over T
  double g_e = 0.0;          // test_loss - train_loss
  double delta = 0.0;        // mean loss over U = T - S; 0 when U is empty
  std::size_t n_s = 0;
  std::size_t n_t = 0;
  std::size_t n_u = 0;
  std::uint64_t seed = 0;
  double train_loss_sum = 0.0;  // sum of L over S
  // True when every record of S occurs exactly once in T, which is when
  // g_e = (n_U/n_T) delta + (1/n_T - 1/n_S) sum_S L holds.
  bool selection_model = false;
  double identity_residual = 0.0;  // only meaningful under selection_model
};

/// Right-hand side of the decomposition identity for a report.
double decomposition_rhs(const EvaluationReport& report);

/// Scores `model` on S and T. Under the selection model the decomposition
/// identity is verified and a violation beyond 1e-9 throws Error(internal).
EvaluationReport generalization_report(const TrainedModel& model, const IntegratedSample& train,
                                       const IntegratedSample& test, const EvaluationOptions& options);

enum class BaselineMode { two_stage_lr, two_stage_lr_ssb };

std::string_view to_string(BaselineMode mode);  // the report method label

struct BaselineWeights {
  std::vector<double> weights;
  std::vector<double> membership;  // f^(x): probability that x came from S
  bool clamped = false;
};

/// Scale factors from membership probabilities: (n_S/n_T)(1/f - 1) for
/// two_stage_lr, normalized 1/f for the SSB variant. Weights are clamped to
/// [1e-6, 1e6].
BaselineWeights scale_factors(std::span<const double> membership, std::size_t n_s, std::size_t n_t,
                              BaselineMode mode);

/// Trains a logistic S-vs-T membership classifier on the features of S and
/// the (unlabeled) test features, and turns it into per-record weights for S.
BaselineWeights two_stage_lr_weights(const IntegratedSample& train,
                                     std::span<const std::vector<Value>> test_features, BaselineMode mode);

}  // namespace unkml
