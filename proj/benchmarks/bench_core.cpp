#include <benchmark/benchmark.h>

#include <random>

#include "unkml/bucketize.hpp"
#include "unkml/correct.hpp"
#include "unkml/models.hpp"
#include "unkml/species.hpp"

namespace {

using namespace unkml;

Schema one_feature() {
  Schema s;
  s.feature_names = {"x"};
  s.feature_kinds = {ColumnKind::numeric};
  s.label_name = "y";
  s.label_position = 1;
  return s;
}

// n draws with replacement from `domain` items on a line.
std::vector<Record> draws(std::size_t n, std::size_t domain, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, domain - 1);
  std::vector<Record> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(pick(rng));
    out.emplace_back(std::vector<Value>{x}, 2.0 * x + 1.0);
  }
  return out;
}

void BM_FrequencyProfileChao92(benchmark::State& state) {
  const auto rs = draws(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0)) / 5);
  for (auto _ : state) benchmark::DoNotOptimize(chao92(frequency_profile(rs)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FrequencyProfileChao92)->Range(1 << 10, 1 << 16);

void BM_DynamicBuckets(benchmark::State& state) {
  const auto rs = draws(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0)) / 2);
  for (auto _ : state) {
    auto set = dynamic_buckets(std::span<const Record>(rs), 0, 0.5);
    estimate_unknowns(set);
    benchmark::DoNotOptimize(set.total_unknown());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DynamicBuckets)->Range(1 << 10, 1 << 16);

void BM_SmoteSynthesize(benchmark::State& state) {
  const auto rs = draws(static_cast<std::size_t>(state.range(0)), 10'000);
  SmoteConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(smote_synthesize(rs, 1000, cfg));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SmoteSynthesize)->Range(64, 4096);

void BM_KdeSynthesize(benchmark::State& state) {
  const auto rs = draws(static_cast<std::size_t>(state.range(0)), 10'000);
  KdeConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(kde_synthesize(rs, 1000, cfg));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_KdeSynthesize)->Range(64, 4096);

void BM_WeightedPolyreg(benchmark::State& state) {
  const auto rs = draws(static_cast<std::size_t>(state.range(0)), 100'000);
  const IntegratedSample sample(one_feature(), rs);
  std::vector<double> w(rs.size(), 1.0);
  for (std::size_t i = 0; i < w.size(); i += 3) w[i] = 2.5;
  for (auto _ : state) benchmark::DoNotOptimize(fit(ModelSpec::parse("polyreg:3"), sample, w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WeightedPolyreg)->Range(1 << 10, 1 << 16);

}  // namespace

BENCHMARK_MAIN();
