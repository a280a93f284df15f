#include "unkml/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "unkml/error.hpp"

namespace unkml {

namespace {

constexpr double kMinWeight = 1e-6;
constexpr double kMaxWeight = 1e6;
constexpr double kIdentityTolerance = 1e-9;

// Neumaier-compensated running sum; loss sums feed an identity checked at 1e-9.
class Sum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorKind::config, "prediction and label counts differ");
  if (a == 0) throw Error(ErrorKind::empty_input, "metric over zero predictions");
}

}  // namespace

double mae(std::span<const double> predictions, std::span<const double> labels) {
  check_lengths(predictions.size(), labels.size());
  Sum s;
  for (std::size_t i = 0; i < labels.size(); ++i) s.add(std::abs(labels[i] - predictions[i]));
  return s.value() / static_cast<double>(labels.size());
}

double accuracy(std::span<const Value> predictions, std::span<const Value> labels) {
  check_lengths(predictions.size(), labels.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double decomposition_rhs(const EvaluationReport& r) {
  const double nt = static_cast<double>(r.n_t);
  const double ns = static_cast<double>(r.n_s);
  return (static_cast<double>(r.n_u) / nt) * r.delta + (1.0 / nt - 1.0 / ns) * r.train_loss_sum;
}

EvaluationReport generalization_report(const TrainedModel& model, const IntegratedSample& train,
                                       const IntegratedSample& test, const EvaluationOptions& options) {
  if (test.empty()) throw Error(ErrorKind::empty_input, "generalization report needs a nonempty test sample");
  if (train.empty()) throw Error(ErrorKind::empty_input, "generalization report needs a nonempty training sample");
  const IntegratedSample s = options.deduplicate_train ? deduplicate(train) : train;
  const bool classification = s.schema().is_classification();

  EvaluationReport r;
  r.method = options.method;
  r.seed = options.seed;
  r.n_s = s.size();
  r.n_t = test.size();

  std::vector<Value> s_pred, s_label, t_pred, t_label;
  Sum s_loss, t_loss, u_loss;
  for (const auto& rec : s.records()) {
    s_pred.push_back(model.predict(rec));
    s_label.push_back(rec.label());
    s_loss.add(loss(options.loss, s_pred.back(), rec.label()));
  }

  std::unordered_map<std::string_view, std::size_t> s_keys;
  for (const auto& rec : s.records()) s_keys.emplace(rec.dedup_key(), 0);
  for (const auto& rec : test.records()) {
    t_pred.push_back(model.predict(rec));
    t_label.push_back(rec.label());
    const double l = loss(options.loss, t_pred.back(), rec.label());
    t_loss.add(l);
    auto it = s_keys.find(rec.dedup_key());
    if (it == s_keys.end()) {
      u_loss.add(l);
      ++r.n_u;
    } else {
      ++it->second;
    }
  }

  r.train_loss_sum = s_loss.value();
  r.train_loss = r.train_loss_sum / static_cast<double>(r.n_s);
  r.test_loss = t_loss.value() / static_cast<double>(r.n_t);
  r.g_e = r.test_loss - r.train_loss;
  r.delta = r.n_u == 0 ? 0.0 : u_loss.value() / static_cast<double>(r.n_u);

  if (classification) {
    r.train_score = accuracy(s_pred, s_label);
    r.test_score = accuracy(t_pred, t_label);
  } else {
    const auto numeric = [](const std::vector<Value>& v) {
      std::vector<double> out;
      out.reserve(v.size());
      for (const auto& x : v) out.push_back(std::get<double>(x));
      return out;
    };
    r.train_score = mae(numeric(s_pred), numeric(s_label));
    r.test_score = mae(numeric(t_pred), numeric(t_label));
  }

  // a raw S with repeats is never a subset selection of T
  r.selection_model = s_keys.size() == s.size() &&
                      std::all_of(s_keys.begin(), s_keys.end(), [](const auto& kv) { return kv.second == 1; });
  if (r.selection_model) {
    r.identity_residual = std::abs(r.g_e - decomposition_rhs(r));
    const double scale = std::max({1.0, std::abs(r.train_loss), std::abs(r.test_loss)});
    if (r.identity_residual > kIdentityTolerance * scale)
      throw Error(ErrorKind::internal, "generalization error decomposition violated by " +
                                           canonical_number(r.identity_residual));
  }
  return r;
}

std::string_view to_string(BaselineMode mode) {
  return mode == BaselineMode::two_stage_lr ? "2-Stage LR" : "2-Stage LR (SSB)";
}

BaselineWeights scale_factors(std::span<const double> membership, std::size_t n_s, std::size_t n_t,
                              BaselineMode mode) {
  if (n_s == 0 || n_t == 0) throw Error(ErrorKind::empty_input, "scale factors need nonempty S and T");
  BaselineWeights out;
  out.membership.assign(membership.begin(), membership.end());
  const double ratio = static_cast<double>(n_s) / static_cast<double>(n_t);
  for (double f : membership) {
    if (!(f > 0.0 && f < 1.0)) out.clamped = true;
    const double fc = std::clamp(f, 1e-12, 1.0 - 1e-12);
    double w = mode == BaselineMode::two_stage_lr ? ratio * (1.0 / fc - 1.0) : 1.0 / fc;
    if (w < kMinWeight || w > kMaxWeight) out.clamped = true;
    out.weights.push_back(std::clamp(w, kMinWeight, kMaxWeight));
  }
  if (mode == BaselineMode::two_stage_lr_ssb) {
    Sum total;
    for (double w : out.weights) total.add(w);
    for (double& w : out.weights) w /= total.value();
  }
  return out;
}

BaselineWeights two_stage_lr_weights(const IntegratedSample& train,
                                     std::span<const std::vector<Value>> test_features, BaselineMode mode) {
  if (train.empty() || test_features.empty())
    throw Error(ErrorKind::empty_input, "2-stage LR needs nonempty S and test features");
  Schema schema = train.schema();
  schema.label_name = "__membership";
  schema.label_kind = ColumnKind::categorical;
  // classes sort as {"0_test", "1_train"}, so the model's probability() is f^
  const std::string in_train = "1_train";
  const std::string in_test = "0_test";
  std::vector<Record> rows;
  rows.reserve(train.size() + test_features.size());
  for (const auto& r : train.records()) rows.emplace_back(r.features(), in_train);
  for (const auto& x : test_features) rows.emplace_back(x, in_test);
  const IntegratedSample membership_data(std::move(schema), std::move(rows));

  const TrainedModel classifier = fit(ModelSpec{ModelKind::logreg}, membership_data);
  std::vector<double> f;
  f.reserve(train.size());
  for (const auto& r : train.records()) f.push_back(classifier.probability(r.features()));
  return scale_factors(f, train.size(), test_features.size(), mode);
}

}  // namespace unkml
