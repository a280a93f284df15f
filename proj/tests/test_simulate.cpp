#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support.hpp"
#include "unkml/error.hpp"
#include "unkml/simulate.hpp"

using namespace unkml;

namespace {

IntegratedSample base_sample(std::size_t n) {
  std::vector<Record> rs;
  for (std::size_t i = 0; i < n; ++i) rs.push_back(test::point({double(i)}, 2.0 * i));
  return IntegratedSample(test::numeric_schema(1), std::move(rs));
}

std::multiset<std::string> keys(const IntegratedSample& s) {
  std::multiset<std::string> out;
  for (const auto& r : s.records()) out.insert(r.dedup_key());
  return out;
}

}  // namespace

TEST_CASE("split partitions the base and keeps its order") {
  const auto base = base_sample(101);
  const auto split = split_population(base, 0.3, 7);
  CHECK(split.test.size() == 30);
  CHECK(split.population.size() == 71);
  auto all = keys(split.test);
  for (const auto& k : keys(split.population)) all.insert(k);
  CHECK(all == keys(base));
  for (std::size_t i = 1; i < split.test.size(); ++i) CHECK(split.test[i - 1].numeric(0) < split.test[i].numeric(0));

  const auto again = split_population(base, 0.3, 7);
  CHECK(keys(again.test) == keys(split.test));
  CHECK(keys(split_population(base, 0.3, 8).test) != keys(split.test));
  CHECK_THROWS_AS(split_population(base, 0.0, 1), Error);
  CHECK_THROWS_AS(split_population(base_sample(2), 0.1, 1), Error);
}

TEST_CASE("sources are duplicate-free draws that overlap each other") {
  const auto pop = base_sample(100);
  SimulationConfig cfg;
  cfg.sources = 6;
  cfg.source_sizes = {40};
  cfg.seed = 3;
  const auto s = draw_sources(pop, cfg);
  REQUIRE(s.size() == 240);
  for (std::size_t j = 0; j < 6; ++j) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < 40; ++i) CHECK(seen.insert(s[j * 40 + i].dedup_key()).second);
  }
  CHECK(deduplicate(s).size() < s.size());
}

TEST_CASE("per-source sizes") {
  SimulationConfig cfg;
  cfg.sources = 3;
  cfg.source_sizes = {5, 10, 15};
  CHECK(draw_sources(base_sample(20), cfg).size() == 30);
  cfg.source_sizes = {5, 10};
  CHECK_THROWS_AS(draw_sources(base_sample(20), cfg), Error);
  cfg.source_sizes = {25};
  CHECK_THROWS_AS(draw_sources(base_sample(20), cfg), Error);
}

TEST_CASE("threshold bias with ratio 0 excludes the low region") {
  SimulationConfig cfg;
  cfg.sources = 4;
  cfg.source_sizes = {20};
  cfg.bias = {BiasModel::Kind::threshold, 0, 0.0, 50.0, 0.0};
  const auto drawn = draw_sources(base_sample(100), cfg);
  for (const auto& r : drawn.records()) CHECK(r.numeric(0) >= 50.0);
  cfg.source_sizes = {60};
  CHECK_THROWS_AS(draw_sources(base_sample(100), cfg), Error);
}

TEST_CASE("logistic bias shifts the sampled mean") {
  SimulationConfig cfg;
  cfg.sources = 20;
  cfg.source_sizes = {30};
  cfg.bias = {BiasModel::Kind::logistic, 0, 2.0, 0.0, 1.0};
  double mean = 0.0;
  const auto s = draw_sources(base_sample(200), cfg);
  for (const auto& r : s.records()) mean += r.numeric(0);
  mean /= double(s.size());
  CHECK(mean > 99.5 + 20.0);
  cfg.bias.strength = -2.0;
  mean = 0.0;
  const auto low = draw_sources(base_sample(200), cfg);
  for (const auto& r : low.records()) mean += r.numeric(0);
  CHECK(mean / double(s.size()) < 99.5 - 20.0);
}

TEST_CASE("inclusion weights") {
  auto rs = test::with_copies({{1, 1}, {2, 1}, {3, 1}});
  const auto t = inclusion_weights(rs, {BiasModel::Kind::threshold, 0, 0.0, 2.5, 0.25});
  CHECK(t == std::vector<double>{0.25, 0.25, 1.0});
  const auto l = inclusion_weights(rs, {BiasModel::Kind::logistic, 0, 1.0, 0.0, 1.0});
  CHECK(l[1] == doctest::Approx(0.5));
  CHECK(l[0] < l[1]);
  CHECK(l[2] > l[1]);
}

TEST_CASE("sources drawn from T form a subset of T") {
  SimulationConfig cfg;
  cfg.sources = 5;
  cfg.source_sizes = {10};
  cfg.sources_from_test = true;
  cfg.seed = 42;
  const auto sim = simulate(base_sample(200), cfg);
  const auto t = keys(sim.test);
  for (const auto& r : sim.train.records()) CHECK(t.count(r.dedup_key()) == 1);

  cfg.sources_from_test = false;
  const auto disjoint = simulate(base_sample(200), cfg);
  const auto t2 = keys(disjoint.test);
  for (const auto& r : disjoint.train.records()) CHECK(t2.count(r.dedup_key()) == 0);
}

TEST_CASE("simulation is reproducible from its seed") {
  SimulationConfig cfg;
  cfg.sources = 3;
  cfg.source_sizes = {15};
  cfg.seed = 9;
  const auto a = simulate(base_sample(100), cfg);
  const auto b = simulate(base_sample(100), cfg);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].dedup_key() == b.train[i].dedup_key());
}
