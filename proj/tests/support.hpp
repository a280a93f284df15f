#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "unkml/dataset.hpp"

namespace unkml::test {

// Schema with numeric features x0..x{d-1} and a numeric label y.
inline Schema numeric_schema(std::size_t d) {
  Schema s;
  for (std::size_t j = 0; j < d; ++j) {
    s.feature_names.push_back("x" + std::to_string(j));
    s.feature_kinds.push_back(ColumnKind::numeric);
  }
  s.label_name = "y";
  s.label_position = d;
  return s;
}

inline Record point(std::vector<double> x, double y) {
  std::vector<Value> f(x.begin(), x.end());
  return Record(std::move(f), y);
}

// One record per (x, copies) entry, copies duplicated in place; label = x.
inline std::vector<Record> with_copies(const std::vector<std::pair<double, int>>& spec) {
  std::vector<Record> out;
  for (auto [x, copies] : spec)
    for (int i = 0; i < copies; ++i) out.push_back(point({x}, x));
  return out;
}

// Multiset sample with random duplication over a small 1-D domain.
inline IntegratedSample random_multiset(std::mt19937_64& rng, std::size_t n, int domain) {
  std::uniform_int_distribution<int> pick(0, domain - 1);
  std::vector<Record> rs;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pick(rng);
    rs.push_back(point({x}, 2.0 * x));
  }
  return IntegratedSample(numeric_schema(1), std::move(rs));
}

}  // namespace unkml::test
