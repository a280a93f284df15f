#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "unkml/error.hpp"
#include "unkml/pipeline.hpp"

namespace unkml::cli {
namespace {

struct Options {
  PipelineConfig cfg;
  std::string axis = "correlation";
  std::string mode = "kde";
  std::string model;
  std::string loss;
  std::string bias = "uniform";
  std::vector<double> kde_bandwidth;
};

void add_common(CLI::App& app, Options& o) {
  auto& c = o.cfg;
  app.add_option("--input", c.input, "Input CSV (the integrated sample, or the base data for simulate/end2end)");
  app.add_option("--label-col", c.schema.label_column, "Label column name");
  app.add_option("--categorical", c.schema.categorical_columns, "Categorical column names")->delimiter(',');
  app.add_option("--features", c.schema.feature_columns, "Feature columns (default: all but label)")->delimiter(',');
  app.add_option("--out-dir", c.out_dir, "Directory for artifacts");
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--theta", c.bucketize.theta, "Bucket coverage threshold in (0,1]");
  app.add_option("--axis", o.axis, "Bucketing axis strategy")
      ->check(CLI::IsMember({"correlation", "variance", "entropy", "fixed"}));
  app.add_option("--axis-feature", c.axis_feature, "Feature used with --axis fixed");
  app.add_option("--mode", o.mode, "Correction mode")->check(CLI::IsMember({"weight", "kde", "smote"}));
  app.add_option("--smote-k", c.smote.k, "SMOTE neighbour count");
  app.add_option("--smote-per-dimension", c.smote.per_dimension_g, "Draw one interpolation factor per dimension");
  app.add_option("--kde-bandwidth", o.kde_bandwidth, "Fixed KDE bandwidth(s); default is Silverman")->delimiter(',');
  app.add_option("--model", o.model, "linreg | polyreg:D | logreg | knn:K");
  app.add_option("--loss", o.loss, "squared | absolute | zero_one")
      ->check(CLI::IsMember({"squared", "absolute", "zero_one"}));
  app.add_option("--method", c.method, "Report label for evaluate (Original, Ideal, 2-Stage LR, ...)");
  app.add_option("--train-raw", c.train_raw, "Average training loss over the raw multiset");
  app.add_option("--test", c.test, "Test CSV for evaluate");
  app.add_option("--test-features", c.test_features, "Unlabeled test features for the 2-stage LR baselines");
  app.add_option("--sources", c.simulation.sources, "Number of simulated sources");
  app.add_option("--source-size", c.simulation.source_sizes, "Source size, shared or one per source")->delimiter(',');
  app.add_option("--bias", o.bias, "Source bias model")->check(CLI::IsMember({"uniform", "logistic", "threshold"}));
  app.add_option("--bias-feature", c.bias_feature, "Numeric feature the bias acts on");
  app.add_option("--bias-strength", c.simulation.bias.strength, "Logistic bias slope on the z-scored feature");
  app.add_option("--cutoff", c.simulation.bias.cutoff, "Threshold bias cutoff");
  app.add_option("--ratio", c.simulation.bias.ratio, "Threshold bias relative weight below the cutoff");
  app.add_option("--test-fraction", c.simulation.test_fraction, "Fraction of the base held out as T");
  app.add_option("--subset-of-test", c.simulation.sources_from_test, "Draw sources from T itself");
  app.add_option("--repeats", c.repeats, "end2end repetitions (seeds seed..seed+r-1)");
  app.add_option("--baselines", c.baselines, "end2end: also report the 2-stage LR baselines");
  app.add_option("--threads", c.threads, "Worker threads (0 = hardware concurrency)");
}

void finish(Options& o, Command command) {
  auto& c = o.cfg;
  c.command = command;
  c.bucketize.axis = parse_axis_strategy(o.axis);
  c.mode = parse_correction_mode(o.mode);
  if (!o.model.empty()) c.model = ModelSpec::parse(o.model);
  if (!o.loss.empty()) c.loss = parse_loss(o.loss);
  c.simulation.bias.kind = parse_bias_kind(o.bias);
  if (!o.kde_bandwidth.empty()) {
    c.kde.rule = KdeConfig::Bandwidth::fixed;
    c.kde.fixed_bandwidth = o.kde_bandwidth;
  }
}

void report_error(std::ostream& err, std::string_view kind, const std::string& message,
                  std::optional<std::size_t> row = std::nullopt) {
  nlohmann::json j = {{"error", kind}, {"message", message}};
  if (row) j["row"] = *row;
  err << j.dump() << '\n';
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariate-shift correction from duplicate counts", "unkml"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  Options o;
  add_common(app, o);

  std::vector<std::pair<CLI::App*, Command>> commands;
  for (Command c : {Command::simulate, Command::estimate, Command::correct, Command::evaluate, Command::end2end}) {
    auto* sub = app.add_subcommand(std::string(to_string(c)));
    sub->fallthrough();
    commands.emplace_back(sub, c);
  }
  commands[0].first->description("Split a base CSV and draw biased overlapping sources");
  commands[1].first->description("Per-bucket coverage and unknown-count estimates as JSON");
  commands[2].first->description("Write the weighted or augmented training CSV");
  commands[3].first->description("Fit a model and write the generalization report");
  commands[4].first->description("Run every method over repeated simulations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "config_error", e.what());
    return 2;
  }

  try {
    for (const auto& [sub, command] : commands)
      if (sub->parsed()) finish(o, command);
    const RunResult result = run(o.cfg);
    for (const auto& p : result.artifacts) out << p.string() << '\n';
    return 0;
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what(), e.row());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "internal_error", e.what());
    return 1;
  }
}

}  // namespace unkml::cli
