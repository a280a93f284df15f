#pragma once

// Small learners that accept per-record weights: weighted linear and
// polynomial least squares, weighted logistic regression, and a kNN
// classifier/regressor that only accepts uniform weights.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unkml/dataset.hpp"

namespace unkml {

enum class ModelKind { linreg, polyreg, logreg, knn };
enum class Loss { squared, absolute, zero_one };

Loss parse_loss(std::string_view name);
std::string_view to_string(Loss loss);
/// absolute for regression (so G_e is a difference of MAEs), zero_one for
/// classification.
Loss default_loss(const Schema& schema);
double loss(Loss kind, const Value& prediction, const Value& label);

struct ModelSpec {
  ModelKind kind = ModelKind::linreg;
  unsigned degree = 1;      // polyreg
  std::size_t k = 5;        // knn
  double learning_rate = 0.1;
  std::size_t iterations = 500;

  /// linreg | polyreg:D | logreg | knn:K
  static ModelSpec parse(std::string_view text);
  std::string name() const;
  void validate() const;
};

class TrainedModel;

/// Fits `spec` on `data`. Empty `weights` means uniform. Regressions solve
/// the weight-normalized normal equations with a 1e-8 ridge on standardized
/// columns; logreg runs fixed-step full-batch gradient descent.
TrainedModel fit(const ModelSpec& spec, const IntegratedSample& data, std::span<const double> weights = {});

class TrainedModel {
 public:
  ModelKind kind() const noexcept { return kind_; }
  const Schema& schema() const noexcept { return schema_; }

  /// Regression: coefficients in original feature units, intercept last.
  /// Logreg: coefficients of the log-odds of classes()[1], intercept last.
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  std::vector<std::string> coefficient_names() const;
  const std::vector<std::string>& classes() const noexcept { return classes_; }

  Value predict(std::span<const Value> features) const;
  Value predict(const Record& record) const { return predict(record.features()); }
  /// Logreg only: probability of classes()[1].
  double probability(std::span<const Value> features) const;

 private:
  friend TrainedModel fit(const ModelSpec&, const IntegratedSample&, std::span<const double>);

  struct Column {
    std::size_t feature = 0;
    unsigned power = 1;     // numeric columns
    std::string token;      // one-hot columns; empty for numeric
  };

  std::vector<double> expand(std::span<const Value> features) const;
  std::vector<double> standardized(std::span<const Value> features) const;

  ModelKind kind_ = ModelKind::linreg;
  Schema schema_;
  std::vector<Column> columns_;
  std::vector<double> center_;
  std::vector<double> scale_;
  std::vector<double> coefficients_;      // original units
  std::vector<double> std_coefficients_;  // standardized columns, intercept last
  std::vector<std::string> classes_;
  // knn state
  std::size_t k_ = 1;
  std::vector<std::vector<double>> train_x_;
  std::vector<Value> train_y_;
};

}  // namespace unkml
