#include "unkml/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "unkml/error.hpp"

namespace unkml {

BiasModel::Kind parse_bias_kind(std::string_view name) {
  if (name == "uniform") return BiasModel::Kind::uniform;
  if (name == "logistic") return BiasModel::Kind::logistic;
  if (name == "threshold") return BiasModel::Kind::threshold;
  throw Error(ErrorKind::config, "unknown bias model '" + std::string(name) + "'");
}

std::string_view to_string(BiasModel::Kind kind) {
  switch (kind) {
    case BiasModel::Kind::uniform: return "uniform";
    case BiasModel::Kind::logistic: return "logistic";
    case BiasModel::Kind::threshold: return "threshold";
  }
  return "?";
}

std::size_t SimulationConfig::source_size(std::size_t source) const {
  return source_sizes.size() == 1 ? source_sizes.front() : source_sizes.at(source);
}

void SimulationConfig::validate() const {
  if (sources < 1) throw Error(ErrorKind::config, "need at least one source");
  if (source_sizes.size() != 1 && source_sizes.size() != sources)
    throw Error(ErrorKind::config, "give one source size or one per source");
  for (std::size_t n : source_sizes)
    if (n < 1) throw Error(ErrorKind::config, "source sizes must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::config, "test fraction must lie in (0, 1)");
  if (bias.kind == BiasModel::Kind::threshold && !(bias.ratio >= 0.0))
    throw Error(ErrorKind::config, "threshold inclusion ratio must be >= 0");
  if (!std::isfinite(bias.strength) || !std::isfinite(bias.cutoff))
    throw Error(ErrorKind::config, "bias parameters must be finite");
}

PopulationSplit split_population(const IntegratedSample& base, double test_fraction, std::uint64_t seed) {
  if (base.empty()) throw Error(ErrorKind::empty_input, "cannot split an empty base dataset");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::config, "test fraction must lie in (0, 1)");
  const std::size_t n = base.size();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test == n)
    throw Error(ErrorKind::config, "test fraction leaves one side of the split empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = true;

  std::vector<Record> pop, test;
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? test : pop).push_back(base[i]);
  return {IntegratedSample(base.schema(), std::move(pop)), IntegratedSample(base.schema(), std::move(test))};
}

std::vector<double> inclusion_weights(std::span<const Record> records, const BiasModel& bias) {
  std::vector<double> w(records.size(), 1.0);
  if (bias.kind == BiasModel::Kind::uniform || records.empty()) return w;

  std::vector<double> x;
  x.reserve(records.size());
  for (const auto& r : records) x.push_back(r.numeric(bias.feature));

  if (bias.kind == BiasModel::Kind::threshold) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < bias.cutoff) w[i] = bias.ratio;
    return w;
  }
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = sd > 0.0 ? (x[i] - mean) / sd : 0.0;
    w[i] = 1.0 / (1.0 + std::exp(-bias.strength * z));
  }
  return w;
}

namespace {

// Fenwick tree over nonnegative weights supporting removal and weighted
// selection by prefix sum.
class WeightTree {
 public:
  explicit WeightTree(const std::vector<double>& w) : tree_(w.size() + 1, 0.0), weight_(w) {
    for (std::size_t i = 0; i < w.size(); ++i) add(i, w[i]);
  }
  double total() const {
    double s = 0.0;
    for (std::size_t i = tree_.size() - 1; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }
  // Smallest index whose inclusive prefix sum exceeds u.
  std::size_t find(double u) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= u) {
        pos += step;
        u -= tree_[pos];
      }
    }
    return std::min(pos, weight_.size() - 1);
  }
  double weight(std::size_t i) const { return weight_[i]; }
  void remove(std::size_t i) {
    add(i, -weight_[i]);
    weight_[i] = 0.0;
  }
  // Recomputes the prefix sums from scratch, dropping accumulated residue.
  void rebuild() {
    std::fill(tree_.begin(), tree_.end(), 0.0);
    for (std::size_t i = 0; i < weight_.size(); ++i) add(i, weight_[i]);
  }

 private:
  void add(std::size_t i, double delta) {
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }
  std::vector<double> tree_;
  std::vector<double> weight_;
};

}  // namespace

IntegratedSample draw_sources(const IntegratedSample& population, const SimulationConfig& cfg) {
  cfg.validate();
  if (population.empty()) throw Error(ErrorKind::empty_input, "cannot draw sources from an empty population");
  const Schema& schema = population.schema();
  if (cfg.bias.kind != BiasModel::Kind::uniform &&
      (cfg.bias.feature >= schema.dimension() || schema.feature_kinds[cfg.bias.feature] != ColumnKind::numeric))
    throw Error(ErrorKind::config, "bias feature must be a numeric feature");

  const auto distinct = deduplicate(population.records());
  const auto weights = inclusion_weights(distinct, cfg.bias);
  const auto eligible = static_cast<std::size_t>(std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; }));
  for (std::size_t j = 0; j < cfg.sources; ++j) {
    if (cfg.source_size(j) > distinct.size())
      throw Error(ErrorKind::config, "source size " + std::to_string(cfg.source_size(j)) +
                                         " exceeds population size " + std::to_string(distinct.size()));
    if (cfg.source_size(j) > eligible)
      throw Error(ErrorKind::config, "source size " + std::to_string(cfg.source_size(j)) + " exceeds the " +
                                         std::to_string(eligible) + " records with nonzero inclusion weight");
  }

  std::vector<Record> out;
  for (std::size_t j = 0; j < cfg.sources; ++j) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(j)};
    std::mt19937_64 rng(seq);
    WeightTree tree(weights);
    for (std::size_t draw = 0; draw < cfg.source_size(j); ++draw) {
      std::size_t pick = 0;
      for (int attempt = 0;; ++attempt) {
        const double total = tree.total();
        pick = tree.find(std::uniform_real_distribution<double>(0.0, total)(rng));
        if (tree.weight(pick) > 0.0) break;
        // a removed index can only be hit through rounding in the prefix sums
        if (attempt % 8 == 7) tree.rebuild();
      }
      out.push_back(distinct[pick]);
      tree.remove(pick);
    }
  }
  return IntegratedSample(schema, std::move(out));
}

Simulation simulate(const IntegratedSample& base, const SimulationConfig& cfg) {
  cfg.validate();
  auto split = split_population(base, cfg.test_fraction, cfg.seed);
  IntegratedSample train = draw_sources(cfg.sources_from_test ? split.test : split.population, cfg);
  return {std::move(train), std::move(split.test)};
}

}  // namespace unkml
