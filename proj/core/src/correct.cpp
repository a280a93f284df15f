#include "unkml/correct.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "unkml/error.hpp"

namespace unkml {

CorrectionMode parse_correction_mode(std::string_view name) {
  if (name == "weight") return CorrectionMode::weight;
  if (name == "kde" || name == "synth_kde") return CorrectionMode::synth_kde;
  if (name == "smote" || name == "synth_smote") return CorrectionMode::synth_smote;
  throw Error(ErrorKind::config, "unknown correction mode '" + std::string(name) + "'");
}

std::string_view to_string(CorrectionMode mode) {
  switch (mode) {
    case CorrectionMode::weight: return "weight";
    case CorrectionMode::synth_kde: return "kde";
    case CorrectionMode::synth_smote: return "smote";
  }
  return "?";
}

void SmoteConfig::validate() const {
  if (k < 1) throw Error(ErrorKind::config, "smote k must be >= 1");
}

void KdeConfig::validate() const {
  if (rule == Bandwidth::fixed) {
    if (fixed_bandwidth.empty()) throw Error(ErrorKind::config, "fixed KDE bandwidth needs a value");
    for (double h : fixed_bandwidth)
      if (!(h >= 0.0) || !std::isfinite(h)) throw Error(ErrorKind::config, "KDE bandwidth must be >= 0");
  }
}

std::size_t CorrectionOutput::synthetic_count() const {
  return static_cast<std::size_t>(std::count(synthetic.begin(), synthetic.end(), true));
}

namespace {

// Indices into a record's numeric fields; `feature == npos` is the label.
struct NumericField {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t feature = npos;
};

std::vector<NumericField> numeric_fields(const Record& r) {
  std::vector<NumericField> out;
  for (std::size_t j = 0; j < r.dimension(); ++j)
    if (std::holds_alternative<double>(r.features()[j])) out.push_back({j});
  if (std::holds_alternative<double>(r.label())) out.push_back({NumericField::npos});
  return out;
}

double read_field(const Record& r, NumericField f) {
  return f.feature == NumericField::npos ? r.numeric_label() : r.numeric(f.feature);
}

// Rebuilds `base` with its numeric fields replaced by `values`.
Record with_numeric(const Record& base, const std::vector<NumericField>& fields, std::span<const double> values) {
  std::vector<Value> features = base.features();
  Value label = base.label();
  for (std::size_t d = 0; d < fields.size(); ++d) {
    if (fields[d].feature == NumericField::npos)
      label = values[d];
    else
      features[fields[d].feature] = values[d];
  }
  return Record(std::move(features), std::move(label));
}

double sample_stddev(std::span<const Record> rows, NumericField f) {
  const double m = static_cast<double>(rows.size());
  if (rows.size() < 2) return 0.0;
  double mean = 0.0;
  for (const auto& r : rows) mean += read_field(r, f);
  mean /= m;
  double ss = 0.0;
  for (const auto& r : rows) {
    const double d = read_field(r, f) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / (m - 1.0));
}

}  // namespace

std::vector<double> silverman_bandwidths(std::span<const Record> distinct) {
  if (distinct.empty()) return {};
  const auto fields = numeric_fields(distinct.front());
  const double d = static_cast<double>(fields.size());
  const double m = static_cast<double>(distinct.size());
  const double factor = std::pow(4.0 / (d + 2.0), 1.0 / (d + 4.0)) * std::pow(m, -1.0 / (d + 4.0));
  std::vector<double> h;
  h.reserve(fields.size());
  for (const auto& f : fields) h.push_back(sample_stddev(distinct, f) * factor);
  return h;
}

SynthesisResult kde_synthesize(std::span<const Record> members, std::uint64_t count, const KdeConfig& cfg) {
  cfg.validate();
  const auto distinct = deduplicate(members);
  if (distinct.size() < 2) return {{}, true};
  if (count == 0) return {};

  const auto fields = numeric_fields(distinct.front());
  std::vector<double> h;
  if (cfg.rule == KdeConfig::Bandwidth::silverman) {
    h = silverman_bandwidths(distinct);
  } else if (cfg.fixed_bandwidth.size() == 1) {
    h.assign(fields.size(), cfg.fixed_bandwidth.front());
  } else if (cfg.fixed_bandwidth.size() == fields.size()) {
    h = cfg.fixed_bandwidth;
  } else {
    throw Error(ErrorKind::config, "fixed KDE bandwidth needs 1 or " + std::to_string(fields.size()) + " values");
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, distinct.size() - 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  SynthesisResult out;
  out.records.reserve(count);
  std::vector<double> values(fields.size());
  for (std::uint64_t s = 0; s < count; ++s) {
    const Record& center = distinct[pick(rng)];
    for (std::size_t d = 0; d < fields.size(); ++d) values[d] = read_field(center, fields[d]) + h[d] * noise(rng);
    out.records.push_back(with_numeric(center, fields, values));
  }
  return out;
}

Record interpolate(const Record& from, const Record& to, double g) {
  const auto fields = numeric_fields(from);
  std::vector<double> values(fields.size());
  for (std::size_t d = 0; d < fields.size(); ++d) {
    const double a = read_field(from, fields[d]);
    const double b = read_field(to, fields[d]);
    // Rounding of a + g*(b - a) may step just past b; keep it on the segment.
    values[d] = std::clamp(a + g * (b - a), std::min(a, b), std::max(a, b));
  }
  return with_numeric(from, fields, values);
}

SynthesisResult smote_synthesize(std::span<const Record> members, std::uint64_t count, const SmoteConfig& cfg) {
  cfg.validate();
  const auto distinct = deduplicate(members);
  const std::size_t m = distinct.size();
  if (m < 2) return {{}, true};
  if (cfg.k >= m)
    throw Error(ErrorKind::config, "smote k=" + std::to_string(cfg.k) + " needs more than k distinct records, have " +
                                       std::to_string(m));
  if (count == 0) return {};

  // z-scored numeric features for the distance computation only
  std::vector<std::size_t> numeric;
  for (std::size_t j = 0; j < distinct.front().dimension(); ++j)
    if (std::holds_alternative<double>(distinct.front().features()[j])) numeric.push_back(j);
  std::vector<std::vector<double>> z(m, std::vector<double>(numeric.size()));
  for (std::size_t c = 0; c < numeric.size(); ++c) {
    double mean = 0.0;
    for (const auto& r : distinct) mean += r.numeric(numeric[c]);
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (const auto& r : distinct) var += (r.numeric(numeric[c]) - mean) * (r.numeric(numeric[c]) - mean);
    const double sd = std::sqrt(var / static_cast<double>(m));
    const double scale = sd > 0.0 ? sd : 1.0;
    for (std::size_t i = 0; i < m; ++i) z[i][c] = (distinct[i].numeric(numeric[c]) - mean) / scale;
  }

  std::vector<std::vector<std::size_t>> neighbors(m);
  const auto neighbors_of = [&](std::size_t i) -> const std::vector<std::size_t>& {
    auto& nb = neighbors[i];
    if (!nb.empty()) return nb;
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(m - 1);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < numeric.size(); ++c) s += (z[i][c] - z[j][c]) * (z[i][c] - z[j][c]);
      dist.emplace_back(s, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(cfg.k), dist.end());
    for (std::size_t t = 0; t < cfg.k; ++t) nb.push_back(dist[t].second);
    return nb;
  };

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::uniform_int_distribution<std::size_t> pick_neighbor(0, cfg.k - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SynthesisResult out;
  out.records.reserve(count);
  for (std::uint64_t s = 0; s < count; ++s) {
    const std::size_t i = pick(rng);
    const std::size_t j = neighbors_of(i)[pick_neighbor(rng)];
    if (!cfg.per_dimension_g) {
      out.records.push_back(interpolate(distinct[i], distinct[j], unit(rng)));
      continue;
    }
    const auto fields = numeric_fields(distinct[i]);
    std::vector<double> values(fields.size());
    for (std::size_t d = 0; d < fields.size(); ++d) {
      const double a = read_field(distinct[i], fields[d]);
      const double b = read_field(distinct[j], fields[d]);
      values[d] = std::clamp(a + unit(rng) * (b - a), std::min(a, b), std::max(a, b));
    }
    out.records.push_back(with_numeric(distinct[i], fields, values));
  }
  return out;
}

std::vector<EstimatedGroup> estimate_groups(const IntegratedSample& sample, const BucketizeConfig& cfg) {
  cfg.validate();
  if (sample.empty()) throw Error(ErrorKind::empty_input, "correction of an empty sample");
  std::vector<EstimatedGroup> groups;

  if (!sample.schema().is_classification()) {
    EstimatedGroup g;
    g.buckets = dynamic_buckets(sample, select_axis(sample, cfg.axis, cfg.fixed_axis), cfg.theta);
    estimate_unknowns(g.buckets);
    groups.push_back(std::move(g));
    return groups;
  }

  std::map<std::string, std::vector<Record>> by_class;
  for (const auto& r : sample.records()) by_class[std::get<std::string>(r.label())].push_back(r);
  for (auto& [label, records] : by_class) {
    const IntegratedSample part(sample.schema(), std::move(records));
    std::size_t axis = 0;
    if (cfg.axis == AxisStrategy::correlation) {
      std::vector<double> indicator;
      indicator.reserve(sample.size());
      for (const auto& r : sample.records()) indicator.push_back(std::get<std::string>(r.label()) == label ? 1.0 : 0.0);
      axis = select_axis(sample, indicator);
    } else {
      axis = select_axis(part, cfg.axis, cfg.fixed_axis);
    }
    EstimatedGroup g;
    g.class_label = label;
    g.buckets = dynamic_buckets(part, axis, cfg.theta);
    estimate_unknowns(g.buckets);
    groups.push_back(std::move(g));
  }
  return groups;
}

namespace {

std::vector<BucketOutcome> outcomes(std::span<const EstimatedGroup> groups) {
  std::vector<BucketOutcome> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& set = groups[g].buckets;
    for (std::size_t b = 0; b < set.size(); ++b) {
      const auto& bucket = set.buckets[b];
      BucketOutcome o;
      o.group = g;
      o.index = b;
      o.class_label = groups[g].class_label;
      o.lo = bucket.lo;
      o.hi = bucket.hi;
      o.unknown_count = bucket.unknown_count();
      out.push_back(std::move(o));
    }
  }
  return out;
}

// Normalized per-bucket weights over every bucket of every set.
std::vector<double> bucket_weights(const std::vector<BucketOutcome>& buckets, bool& fallback) {
  const double total = std::accumulate(buckets.begin(), buckets.end(), 0.0,
                                       [](double s, const BucketOutcome& b) { return s + static_cast<double>(b.unknown_count); });
  fallback = total <= 0.0;
  std::vector<double> w;
  w.reserve(buckets.size());
  for (const auto& b : buckets)
    w.push_back(fallback ? 1.0 / static_cast<double>(buckets.size()) : static_cast<double>(b.unknown_count) / total);
  return w;
}

}  // namespace

CorrectionOutput weight_by_unknown_count(const Schema& schema, std::span<const BucketSet> sets) {
  std::vector<EstimatedGroup> groups;
  for (const auto& s : sets) groups.push_back({std::nullopt, s});
  CorrectionOutput out;
  out.mode = CorrectionMode::weight;
  out.buckets = outcomes(groups);
  if (out.buckets.empty()) throw Error(ErrorKind::empty_input, "weighting without buckets");
  const auto w = bucket_weights(out.buckets, out.uniform_fallback);

  std::vector<Record> records;
  std::unordered_map<std::string_view, bool> seen;
  std::size_t flat = 0;
  for (const auto& set : sets) {
    for (const auto& bucket : set.buckets) {
      out.buckets[flat].weight = w[flat];
      for (const auto& r : bucket.members) {
        if (!seen.emplace(r.dedup_key(), true).second) continue;
        records.push_back(r);
        out.weights.push_back(w[flat]);
      }
      ++flat;
    }
  }
  out.synthetic.assign(records.size(), false);
  out.sample = IntegratedSample(schema, std::move(records));
  return out;
}

CorrectionOutput weight_by_unknown_count(const Schema& schema, const BucketSet& set) {
  return weight_by_unknown_count(schema, std::span<const BucketSet>(&set, 1));
}

CorrectionOutput apply_correction(const IntegratedSample& sample, std::span<const EstimatedGroup> groups,
                                  CorrectionMode mode, const CorrectionConfig& cfg) {
  if (groups.empty()) throw Error(ErrorKind::empty_input, "correction without bucket groups");
  const IntegratedSample original = deduplicate(sample);

  if (mode == CorrectionMode::weight) {
    std::vector<BucketSet> sets;
    for (const auto& g : groups) sets.push_back(g.buckets);
    CorrectionOutput by_bucket = weight_by_unknown_count(sample.schema(), sets);
    for (std::size_t b = 0; b < by_bucket.buckets.size(); ++b)
      by_bucket.buckets[b].class_label = groups[by_bucket.buckets[b].group].class_label;

    std::unordered_map<std::string_view, double> weight_of;
    for (std::size_t i = 0; i < by_bucket.sample.size(); ++i)
      weight_of.emplace(by_bucket.sample[i].dedup_key(), by_bucket.weights[i]);
    CorrectionOutput out;
    out.mode = mode;
    out.buckets = std::move(by_bucket.buckets);
    out.uniform_fallback = by_bucket.uniform_fallback;
    for (const auto& r : original.records()) {
      auto it = weight_of.find(r.dedup_key());
      if (it == weight_of.end()) throw Error(ErrorKind::internal, "record missing from bucket set");
      out.weights.push_back(it->second);
    }
    out.synthetic.assign(original.size(), false);
    out.sample = original;
    return out;
  }

  CorrectionOutput out;
  out.mode = mode;
  out.buckets = outcomes(groups);
  std::vector<Record> records(original.records().begin(), original.records().end());
  std::size_t flat = 0;
  for (const auto& group : groups) {
    for (const auto& bucket : group.buckets.buckets) {
      BucketOutcome& o = out.buckets[flat];
      const std::uint64_t stream = cfg.seed + flat;
      ++flat;
      SynthesisResult syn;
      if (mode == CorrectionMode::synth_kde) {
        KdeConfig kde = cfg.kde;
        kde.seed = stream;
        syn = kde_synthesize(bucket.members, o.unknown_count, kde);
      } else {
        const std::size_t distinct = bucket.profile.distinct;
        if (distinct < 2) {
          syn.skipped = true;
        } else {
          SmoteConfig smote = cfg.smote;
          smote.seed = stream;
          smote.k = std::min(smote.k, distinct - 1);
          syn = smote_synthesize(bucket.members, o.unknown_count, smote);
        }
      }
      o.skipped = syn.skipped;
      o.synthesized = syn.records.size();
      for (auto& r : syn.records) records.push_back(std::move(r));
    }
  }
  out.synthetic.assign(records.size(), true);
  std::fill(out.synthetic.begin(), out.synthetic.begin() + static_cast<std::ptrdiff_t>(original.size()), false);
  out.sample = IntegratedSample(sample.schema(), std::move(records));
  return out;
}

CorrectionOutput correct(const IntegratedSample& sample, CorrectionMode mode, const CorrectionConfig& cfg) {
  cfg.kde.validate();
  cfg.smote.validate();
  const auto groups = estimate_groups(sample, cfg.bucketize);
  return apply_correction(sample, groups, mode, cfg);
}

}  // namespace unkml
