#include "unkml/bucketize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "unkml/error.hpp"

namespace unkml {

AxisStrategy parse_axis_strategy(std::string_view name) {
  if (name == "correlation") return AxisStrategy::correlation;
  if (name == "variance") return AxisStrategy::variance;
  if (name == "entropy") return AxisStrategy::entropy;
  if (name == "fixed") return AxisStrategy::fixed;
  throw Error(ErrorKind::config, "unknown axis strategy '" + std::string(name) + "'");
}

std::string_view to_string(AxisStrategy strategy) {
  switch (strategy) {
    case AxisStrategy::correlation: return "correlation";
    case AxisStrategy::variance: return "variance";
    case AxisStrategy::entropy: return "entropy";
    case AxisStrategy::fixed: return "fixed";
  }
  return "?";
}

void BucketizeConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0))
    throw Error(ErrorKind::config, "theta must lie in (0, 1], got " + canonical_number(theta));
}

std::uint64_t BucketSet::total_unknown() const {
  std::uint64_t total = 0;
  for (const auto& b : buckets) total += b.unknown_count();
  return total;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> column(const IntegratedSample& sample, std::size_t j) {
  std::vector<double> out;
  out.reserve(sample.size());
  for (const auto& r : sample.records()) out.push_back(r.numeric(j));
  return out;
}

double variance(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / n;
}

double plugin_entropy(std::span<const double> x) {
  std::unordered_map<double, std::size_t> counts;
  for (double v : x) ++counts[v == 0.0 ? 0.0 : v];
  const double n = static_cast<double>(x.size());
  double h = 0.0;
  for (const auto& [v, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

std::vector<std::size_t> eligible_axes(const IntegratedSample& sample) {
  if (sample.empty()) throw Error(ErrorKind::empty_input, "axis selection on an empty sample");
  auto numeric = sample.schema().numeric_features();
  if (numeric.empty()) throw Error(ErrorKind::no_eligible_axis, "no numeric feature to bucketize on");
  return numeric;
}

// Highest score wins; strict comparison keeps the lowest index on ties.
template <typename Score>
std::size_t argmax_axis(const std::vector<std::size_t>& candidates, Score score) {
  std::optional<std::size_t> best;
  double best_score = -1.0;
  for (std::size_t j : candidates) {
    const auto s = score(j);
    if (!s) continue;
    if (!best || *s > best_score) {
      best = j;
      best_score = *s;
    }
  }
  if (!best)
    throw Error(ErrorKind::no_eligible_axis, "every numeric feature has zero variance");
  return *best;
}

}  // namespace

std::size_t select_axis(const IntegratedSample& sample, std::span<const double> target) {
  const auto numeric = eligible_axes(sample);
  if (numeric.size() == 1) return numeric.front();
  return argmax_axis(numeric, [&](std::size_t j) -> std::optional<double> {
    const auto x = column(sample, j);
    if (variance(x) <= 0.0) return std::nullopt;
    return std::abs(pearson(x, target).value_or(0.0));
  });
}

std::size_t select_axis(const IntegratedSample& sample, AxisStrategy strategy, std::size_t fixed_axis) {
  const auto numeric = eligible_axes(sample);
  if (strategy == AxisStrategy::fixed) {
    if (std::find(numeric.begin(), numeric.end(), fixed_axis) == numeric.end())
      throw Error(ErrorKind::no_eligible_axis,
                  "fixed axis " + std::to_string(fixed_axis) + " is not a numeric feature");
    return fixed_axis;
  }
  if (numeric.size() == 1) return numeric.front();

  switch (strategy) {
    case AxisStrategy::variance:
      return argmax_axis(numeric, [&](std::size_t j) -> std::optional<double> {
        const double v = variance(column(sample, j));
        if (v <= 0.0) return std::nullopt;
        return v;
      });
    case AxisStrategy::entropy:
      return argmax_axis(numeric, [&](std::size_t j) -> std::optional<double> {
        const auto x = column(sample, j);
        if (variance(x) <= 0.0) return std::nullopt;
        return plugin_entropy(x);
      });
    case AxisStrategy::correlation:
    case AxisStrategy::fixed:
      break;
  }

  if (!sample.schema().is_classification()) {
    std::vector<double> y;
    y.reserve(sample.size());
    for (const auto& r : sample.records()) y.push_back(r.numeric_label());
    return select_axis(sample, y);
  }

  std::vector<std::string> classes;
  for (const auto& r : sample.records()) classes.push_back(std::get<std::string>(r.label()));
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::vector<std::vector<double>> indicators;
  for (const auto& cls : classes) {
    std::vector<double> ind;
    ind.reserve(sample.size());
    for (const auto& r : sample.records()) ind.push_back(std::get<std::string>(r.label()) == cls ? 1.0 : 0.0);
    indicators.push_back(std::move(ind));
  }
  return argmax_axis(numeric, [&](std::size_t j) -> std::optional<double> {
    const auto x = column(sample, j);
    if (variance(x) <= 0.0) return std::nullopt;
    double best = 0.0;
    for (const auto& ind : indicators) best = std::max(best, std::abs(pearson(x, ind).value_or(0.0)));
    return best;
  });
}

namespace {

// Incrementally maintained multiplicity table of the bucket being filled.
class OpenBucket {
 public:
  void add(const Record& r) {
    const std::size_t m = ++multiplicity_[r.dedup_key()];
    if (m == 1) ++singletons_;
    if (m == 2) --singletons_;
    members_.push_back(r);
  }
  double coverage() const {
    if (members_.empty()) return 0.0;
    return 1.0 - static_cast<double>(singletons_) / static_cast<double>(members_.size());
  }
  bool empty() const { return members_.empty(); }
  std::vector<Record> take() {
    multiplicity_.clear();
    singletons_ = 0;
    return std::exchange(members_, {});
  }

 private:
  std::unordered_map<std::string, std::size_t> multiplicity_;
  std::size_t singletons_ = 0;
  std::vector<Record> members_;
};

Bucket close_bucket(std::vector<Record> members, std::size_t axis, double theta) {
  Bucket b;
  b.members = std::move(members);
  b.lo = b.members.front().numeric(axis);
  b.hi = b.members.back().numeric(axis);
  b.profile = frequency_profile(b.members);
  b.coverage = sample_coverage(b.profile);
  b.low_coverage = b.coverage < theta;
  return b;
}

}  // namespace

BucketSet dynamic_buckets(std::span<const Record> records, std::size_t axis, double theta) {
  BucketizeConfig{theta}.validate();
  if (records.empty()) throw Error(ErrorKind::empty_input, "bucketization of an empty sample");

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> key(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) key[i] = records[i].numeric(axis);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  BucketSet out;
  out.axis = axis;
  out.theta = theta;
  OpenBucket open;
  for (std::size_t idx : order) {
    if (open.coverage() >= theta) out.buckets.push_back(close_bucket(open.take(), axis, theta));
    open.add(records[idx]);
  }

  const double trailing = open.coverage();
  if (trailing >= theta || out.buckets.empty()) {
    out.buckets.push_back(close_bucket(open.take(), axis, theta));
  } else {
    auto merged = std::move(out.buckets.back().members);
    for (auto& r : open.take()) merged.push_back(std::move(r));
    out.buckets.back() = close_bucket(std::move(merged), axis, theta);
  }
  return out;
}

BucketSet dynamic_buckets(const IntegratedSample& sample, std::size_t axis, double theta) {
  if (axis >= sample.schema().dimension() || sample.schema().feature_kinds[axis] != ColumnKind::numeric)
    throw Error(ErrorKind::no_eligible_axis, "bucketization axis must be a numeric feature");
  return dynamic_buckets(sample.records(), axis, theta);
}

void estimate_unknowns(BucketSet& buckets) {
  for (auto& b : buckets.buckets) {
    if (b.profile.total >= 2)
      b.estimate = chao92(b.profile);
    else
      b.estimate.reset();
  }
}

}  // namespace unkml
