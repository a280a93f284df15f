#include "unkml/json_io.hpp"

namespace unkml {

using nlohmann::json;

json to_json(const FrequencyProfile& p) {
  json f = json::object();
  for (const auto& [i, fi] : p.counts) f[std::to_string(i)] = fi;
  return {{"c", p.distinct}, {"n", p.total}, {"f", std::move(f)}};
}

json to_json(const SpeciesEstimate& e) {
  return {{"coverage_hat", e.coverage_hat},
          {"cv_squared", e.cv_squared},
          {"d_chao92", e.d_chao92},
          {"unknown_count", e.unknown_count},
          {"low_coverage", e.low_coverage}};
}

json to_json(const BucketSet& set, const Schema& schema) {
  json buckets = json::array();
  for (const auto& b : set.buckets) {
    json jb = {{"lo", b.lo},
               {"hi", b.hi},
               {"c", b.profile.distinct},
               {"n", b.profile.total},
               {"f_1", b.profile.singletons()},
               {"profile", to_json(b.profile)},
               {"coverage", b.coverage},
               {"low_coverage", b.low_coverage},
               {"unknown_count", b.unknown_count()}};
    if (b.estimate) {
      jb["coverage_hat"] = b.estimate->coverage_hat;
      jb["cv_squared"] = b.estimate->cv_squared;
      jb["d_chao92"] = b.estimate->d_chao92;
      jb["estimate_low_coverage"] = b.estimate->low_coverage;
    } else {
      jb["coverage_hat"] = nullptr;
      jb["cv_squared"] = nullptr;
      jb["d_chao92"] = nullptr;
    }
    buckets.push_back(std::move(jb));
  }
  return {{"axis", set.axis},
          {"axis_name", schema.feature_names.at(set.axis)},
          {"theta", set.theta},
          {"total_unknown", set.total_unknown()},
          {"buckets", std::move(buckets)}};
}

json to_json(std::span<const EstimatedGroup> groups, const Schema& schema) {
  json out = json::array();
  for (const auto& g : groups) {
    json jg = to_json(g.buckets, schema);
    jg["class"] = g.class_label ? json(*g.class_label) : json(nullptr);
    out.push_back(std::move(jg));
  }
  return {{"label", schema.label_name}, {"groups", std::move(out)}};
}

json to_json(const EvaluationReport& r) {
  return {{"method", r.method}, {"train_score", r.train_score}, {"test_score", r.test_score},
          {"train_loss", r.train_loss}, {"test_loss", r.test_loss}, {"g_e", r.g_e},
          {"delta", r.delta}, {"n_s", r.n_s}, {"n_t", r.n_t},
          {"n_u", r.n_u}, {"seed", r.seed}, {"selection_model", r.selection_model},
          {"identity_residual", r.identity_residual}};
}

json to_json(const TrainedModel& model) {
  json coef = json::object();
  const auto names = model.coefficient_names();
  for (std::size_t i = 0; i < model.coefficients().size() && i < names.size(); ++i)
    coef[names[i]] = model.coefficients()[i];
  json out = {{"label", model.schema().label_name}};
  switch (model.kind()) {
    case ModelKind::linreg: out["kind"] = "linreg"; break;
    case ModelKind::polyreg: out["kind"] = "polyreg"; break;
    case ModelKind::logreg: out["kind"] = "logreg"; break;
    case ModelKind::knn: out["kind"] = "knn"; break;
  }
  if (model.kind() != ModelKind::knn) out["coefficients"] = std::move(coef);
  if (!model.classes().empty()) out["classes"] = model.classes();
  return out;
}

json to_json(const SimulationConfig& cfg, const Schema& schema) {
  json bias = {{"kind", std::string(to_string(cfg.bias.kind))}};
  if (cfg.bias.kind != BiasModel::Kind::uniform) bias["feature"] = schema.feature_names.at(cfg.bias.feature);
  if (cfg.bias.kind == BiasModel::Kind::logistic) bias["strength"] = cfg.bias.strength;
  if (cfg.bias.kind == BiasModel::Kind::threshold) {
    bias["cutoff"] = cfg.bias.cutoff;
    bias["ratio"] = cfg.bias.ratio;
  }
  return {{"sources", cfg.sources},
          {"source_sizes", cfg.source_sizes},
          {"bias", std::move(bias)},
          {"test_fraction", cfg.test_fraction},
          {"sources_from_test", cfg.sources_from_test},
          {"seed", cfg.seed}};
}

}  // namespace unkml
