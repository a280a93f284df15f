#include "unkml/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "unkml/error.hpp"
#include "unkml/json_io.hpp"

namespace unkml {

Command parse_command(std::string_view name) {
  if (name == "simulate") return Command::simulate;
  if (name == "estimate") return Command::estimate;
  if (name == "correct") return Command::correct;
  if (name == "evaluate") return Command::evaluate;
  if (name == "end2end") return Command::end2end;
  throw Error(ErrorKind::config, "unknown command '" + std::string(name) + "'");
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::simulate: return "simulate";
    case Command::estimate: return "estimate";
    case Command::correct: return "correct";
    case Command::evaluate: return "evaluate";
    case Command::end2end: return "end2end";
  }
  return "?";
}

void PipelineConfig::validate() const {
  bucketize.validate();
  kde.validate();
  smote.validate();
  if (model) model->validate();
  if (input.empty()) throw Error(ErrorKind::config, "--input is required");
  if (schema.label_column.empty()) throw Error(ErrorKind::config, "--label-col is required");
  if (bucketize.axis == AxisStrategy::fixed && axis_feature.empty())
    throw Error(ErrorKind::config, "fixed axis strategy needs an axis feature name");
  if (repeats < 1) throw Error(ErrorKind::config, "--repeats must be >= 1");
  if (command == Command::simulate || command == Command::end2end) {
    simulation.validate();
    if (simulation.bias.kind != BiasModel::Kind::uniform && bias_feature.empty())
      throw Error(ErrorKind::config, "a biased simulation needs --bias-feature");
  }
  const bool baseline_method = method == to_string(BaselineMode::two_stage_lr) ||
                               method == to_string(BaselineMode::two_stage_lr_ssb);
  if (command == Command::evaluate) {
    if (test.empty()) throw Error(ErrorKind::config, "evaluate needs --test");
    if (baseline_method && test_features.empty())
      throw Error(ErrorKind::config, "2-stage LR baselines need an explicit --test-features path");
  }

  const auto must_exist = [](const std::filesystem::path& p, std::string_view flag) {
    if (!p.empty() && !std::filesystem::is_regular_file(p))
      throw Error(ErrorKind::config, std::string(flag) + " '" + p.string() + "' does not exist");
  };
  must_exist(input, "--input");
  must_exist(test, "--test");
  must_exist(test_features, "--test-features");
  if (std::filesystem::exists(out_dir) && !std::filesystem::is_directory(out_dir))
    throw Error(ErrorKind::config, "--out-dir '" + out_dir.string() + "' is not a directory");
}

namespace {

// Files written by one run; removed again unless the run commits.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}
  Artifacts(const Artifacts&) = delete;
  Artifacts& operator=(const Artifacts&) = delete;
  ~Artifacts() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) std::filesystem::remove(p, ec);
  }

  void write(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / name;
    written_.push_back(path);
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  }
  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  RunResult commit() {
    committed_ = true;
    return {written_};
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
  bool committed_ = false;
};

std::size_t resolve_feature(const Schema& schema, const std::string& name, std::string_view what) {
  auto idx = schema.feature_index(name);
  if (!idx) throw Error(ErrorKind::schema, std::string(what) + " '" + name + "' is not a feature column");
  if (schema.feature_kinds[*idx] != ColumnKind::numeric)
    throw Error(ErrorKind::schema, std::string(what) + " '" + name + "' must be numeric");
  return *idx;
}

BucketizeConfig resolved_bucketize(const PipelineConfig& cfg, const Schema& schema) {
  BucketizeConfig b = cfg.bucketize;
  if (b.axis == AxisStrategy::fixed) b.fixed_axis = resolve_feature(schema, cfg.axis_feature, "axis feature");
  return b;
}

SimulationConfig resolved_simulation(const PipelineConfig& cfg, const Schema& schema, std::uint64_t seed) {
  SimulationConfig sim = cfg.simulation;
  sim.seed = seed;
  if (sim.bias.kind != BiasModel::Kind::uniform)
    sim.bias.feature = resolve_feature(schema, cfg.bias_feature, "bias feature");
  return sim;
}

CorrectionConfig correction_config(const PipelineConfig& cfg, const Schema& schema, std::uint64_t seed) {
  CorrectionConfig c;
  c.bucketize = resolved_bucketize(cfg, schema);
  c.kde = cfg.kde;
  c.smote = cfg.smote;
  c.seed = seed;
  return c;
}

ModelSpec model_for(const PipelineConfig& cfg, const Schema& schema) {
  if (cfg.model) return *cfg.model;
  return ModelSpec{schema.is_classification() ? ModelKind::logreg : ModelKind::linreg};
}

std::string csv_number(double v) { return canonical_number(v); }

std::string sample_csv(const IntegratedSample& s, const std::vector<double>* w = nullptr,
                       const std::vector<bool>* syn = nullptr) {
  std::ostringstream out;
  write_csv(out, s, w, syn);
  return out.str();
}

// De-duplicates a training set while carrying its weights along.
std::pair<IntegratedSample, std::vector<double>> dedup_weighted(const IntegratedSample& s,
                                                                const std::vector<double>& w) {
  std::vector<Record> records;
  std::vector<double> weights;
  std::unordered_map<std::string_view, bool> seen;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!seen.emplace(s[i].dedup_key(), true).second) continue;
    records.push_back(s[i]);
    if (!w.empty()) weights.push_back(w[i]);
  }
  return {IntegratedSample(s.schema(), std::move(records)), std::move(weights)};
}

ReportRow evaluate_method(std::string_view method, const ModelSpec& spec, const IntegratedSample& train,
                          const std::vector<double>& weights, const IntegratedSample& test, Loss loss_kind,
                          bool train_raw, std::uint64_t seed) {
  ReportRow row;
  row.seed = seed;
  row.method = std::string(method);
  TrainedModel model;
  try {
    model = fit(spec, train, weights);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::unsupported) throw;
    row.status = "unsupported";
    row.report.method = row.method;
    row.report.seed = seed;
    return row;
  }
  EvaluationOptions opts;
  opts.method = row.method;
  opts.loss = loss_kind;
  opts.deduplicate_train = !train_raw;
  opts.seed = seed;
  row.report = generalization_report(model, train, test, opts);
  return row;
}

}  // namespace

std::vector<ReportRow> run_repetition(const IntegratedSample& base, const PipelineConfig& config,
                                      std::uint64_t seed) {
  const Schema& schema = base.schema();
  const Simulation sim = simulate(base, resolved_simulation(config, schema, seed));
  const ModelSpec spec = model_for(config, schema);
  const Loss loss_kind = config.loss.value_or(default_loss(schema));
  const auto eval = [&](std::string_view method, const IntegratedSample& train, const std::vector<double>& w) {
    return evaluate_method(method, spec, train, w, sim.test, loss_kind, config.train_raw, seed);
  };

  std::vector<ReportRow> rows;
  const IntegratedSample original = deduplicate(sim.train);
  rows.push_back(eval(kOriginal, original, {}));
  rows.push_back(eval(kIdeal, sim.test, {}));

  const CorrectionConfig corr = correction_config(config, schema, seed);
  const auto groups = estimate_groups(sim.train, corr.bucketize);
  const auto weighted = apply_correction(sim.train, groups, CorrectionMode::weight, corr);
  rows.push_back(eval(kWeightByUnk, weighted.sample, weighted.weights));
  const auto kde = apply_correction(sim.train, groups, CorrectionMode::synth_kde, corr);
  rows.push_back(eval(kSynUnkKde, kde.sample, {}));
  const auto smote = apply_correction(sim.train, groups, CorrectionMode::synth_smote, corr);
  rows.push_back(eval(kSynUnkSmote, smote.sample, {}));

  if (config.baselines) {
    std::vector<std::vector<Value>> test_features;
    for (const auto& r : sim.test.records()) test_features.push_back(r.features());
    for (BaselineMode mode : {BaselineMode::two_stage_lr, BaselineMode::two_stage_lr_ssb}) {
      const auto w = two_stage_lr_weights(original, test_features, mode);
      rows.push_back(eval(to_string(mode), original, w.weights));
    }
  }
  return rows;
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "seed,method,status,train_score,test_score,train_loss,test_loss,g_e,delta,n_s,n_t,n_u\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << row.seed << ',' << '"' << row.method << '"' << ',' << row.status;
    if (row.status == "ok") {
      out << ',' << csv_number(r.train_score) << ',' << csv_number(r.test_score) << ',' << csv_number(r.train_loss)
          << ',' << csv_number(r.test_loss) << ',' << csv_number(r.g_e) << ',' << csv_number(r.delta) << ','
          << r.n_s << ',' << r.n_t << ',' << r.n_u;
    } else {
      out << ",,,,,,,,,";
    }
    out << '\n';
  }
  return out.str();
}

namespace {

RunResult run_simulate(const PipelineConfig& cfg, Artifacts& out) {
  const IntegratedSample base = load_csv(cfg.input, cfg.schema);
  const SimulationConfig sim_cfg = resolved_simulation(cfg, base.schema(), cfg.seed);
  const Simulation sim = simulate(base, sim_cfg);
  out.write("train.csv", sample_csv(sim.train));
  out.write("test.csv", sample_csv(sim.test));
  nlohmann::json manifest = {{"command", "simulate"},
                             {"seed", cfg.seed},
                             {"config", to_json(sim_cfg, base.schema())},
                             {"sizes",
                              {{"base", base.size()},
                               {"train", sim.train.size()},
                               {"train_distinct", deduplicate(sim.train).size()},
                               {"test", sim.test.size()}}}};
  out.write_json("manifest.json", manifest);
  return out.commit();
}

RunResult run_estimate(const PipelineConfig& cfg, Artifacts& out) {
  const IntegratedSample sample = load_csv(cfg.input, cfg.schema);
  const auto groups = estimate_groups(sample, resolved_bucketize(cfg, sample.schema()));
  out.write_json("estimate.json", to_json(std::span<const EstimatedGroup>(groups), sample.schema()));
  return out.commit();
}

RunResult run_correct(const PipelineConfig& cfg, Artifacts& out) {
  const IntegratedSample sample = load_csv(cfg.input, cfg.schema);
  const auto result = correct(sample, cfg.mode, correction_config(cfg, sample.schema(), cfg.seed));
  if (cfg.mode == CorrectionMode::weight)
    out.write("corrected.csv", sample_csv(result.sample, &result.weights));
  else
    out.write("corrected.csv", sample_csv(result.sample, nullptr, &result.synthetic));
  return out.commit();
}

RunResult run_evaluate(const PipelineConfig& cfg, Artifacts& out) {
  const AnnotatedSample train_in = load_annotated_csv(cfg.input, cfg.schema);
  const IntegratedSample test = load_csv(cfg.test, cfg.schema);
  if (!(test.schema().feature_names == train_in.sample.schema().feature_names))
    throw Error(ErrorKind::schema, "training and test CSVs have different feature columns");
  const Schema& schema = train_in.sample.schema();
  const ModelSpec spec = model_for(cfg, schema);
  const Loss loss_kind = cfg.loss.value_or(default_loss(schema));

  IntegratedSample train = train_in.sample;
  std::vector<double> weights = train_in.weights.value_or(std::vector<double>{});
  if (cfg.method == kIdeal) {
    train = test;
    weights.clear();
  } else if (!cfg.train_raw) {
    std::tie(train, weights) = dedup_weighted(train, weights);
  }
  for (BaselineMode mode : {BaselineMode::two_stage_lr, BaselineMode::two_stage_lr_ssb}) {
    if (cfg.method != to_string(mode)) continue;
    const auto features = load_feature_rows(cfg.test_features, schema);
    weights = two_stage_lr_weights(train, features, mode).weights;
  }

  const TrainedModel model = fit(spec, train, weights);
  EvaluationOptions opts;
  opts.method = cfg.method;
  opts.loss = loss_kind;
  opts.deduplicate_train = !cfg.train_raw;
  opts.seed = cfg.seed;
  const EvaluationReport report = generalization_report(model, train, test, opts);
  out.write_json("report.json", to_json(report));
  out.write_json("model.json", to_json(model));
  return out.commit();
}

RunResult run_end2end(const PipelineConfig& cfg, Artifacts& out) {
  const IntegratedSample base = load_csv(cfg.input, cfg.schema);
  // surface schema problems (bias/axis feature names) before spawning workers
  resolved_simulation(cfg, base.schema(), cfg.seed);
  resolved_bucketize(cfg, base.schema());

  std::vector<std::vector<ReportRow>> results(cfg.repeats);
  std::vector<std::exception_ptr> errors(cfg.repeats);
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::min<std::size_t>(
      cfg.repeats, cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < cfg.repeats; r = next++) {
          try {
            results[r] = run_repetition(base, cfg, cfg.seed + r);
          } catch (...) {
            errors[r] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ReportRow> rows;
  for (auto& rep : results)
    for (auto& row : rep) rows.push_back(std::move(row));
  out.write("report.csv", format_report_table(rows));

  nlohmann::json manifest = {{"command", "end2end"},
                             {"seed", cfg.seed},
                             {"repeats", cfg.repeats},
                             {"model", model_for(cfg, base.schema()).name()},
                             {"loss", std::string(to_string(cfg.loss.value_or(default_loss(base.schema()))))},
                             {"theta", cfg.bucketize.theta},
                             {"axis", std::string(to_string(cfg.bucketize.axis))},
                             {"smote_k", cfg.smote.k},
                             {"baselines", cfg.baselines},
                             {"simulation", to_json(resolved_simulation(cfg, base.schema(), cfg.seed), base.schema())}};
  out.write_json("manifest.json", manifest);
  return out.commit();
}

}  // namespace

RunResult run(const PipelineConfig& config) {
  config.validate();
  Artifacts out(config.out_dir);
  switch (config.command) {
    case Command::simulate: return run_simulate(config, out);
    case Command::estimate: return run_estimate(config, out);
    case Command::correct: return run_correct(config, out);
    case Command::evaluate: return run_evaluate(config, out);
    case Command::end2end: return run_end2end(config, out);
  }
  throw Error(ErrorKind::internal, "unhandled command");
}

}  // namespace unkml
