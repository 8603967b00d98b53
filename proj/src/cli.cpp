#include "cbca/cli.hpp"

#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "cbca/commands.hpp"
#include "cbca/error.hpp"

namespace cbca {
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool quiet = false;

  std::vector<double> times;
  std::string frames_dir;
  std::string features_csv;
  std::string titration_csv;
  std::string model_path;
  std::optional<std::string> feature_mode;
  std::optional<int> k;
  std::optional<std::string> labels;
  std::vector<std::string> models;
};

FeatureMode parse_feature_mode(const std::string& s) {
  for (auto m : {FeatureMode::All, FeatureMode::TopK, FeatureMode::Paper})
    if (feature_mode_name(m) == s) return m;
  throw InputError("unknown feature mode '" + s + "'");
}

LabelMode parse_label_mode(const std::string& s) {
  for (auto m : {LabelMode::Global, LabelMode::Piecewise})
    if (label_mode_name(m) == s) return m;
  throw InputError("unknown label mode '" + s + "'");
}

CommandContext make_context(const Options& o, std::ostream& log) {
  CommandContext ctx;
  if (!o.config_path.empty()) ctx.config = load_config(o.config_path);
  if (o.seed) ctx.config.data_seed = ctx.config.model_seed = *o.seed;
  if (!o.times.empty()) ctx.config.dataset.times_min = ctx.config.dataset.titration_times_min = o.times;
  if (o.feature_mode) ctx.config.feature_mode = parse_feature_mode(*o.feature_mode);
  if (o.k) ctx.config.top_k = *o.k;
  if (o.labels) ctx.config.label_mode = parse_label_mode(*o.labels);
  if (!o.models.empty()) {
    ctx.config.models.clear();
    for (const auto& m : o.models) ctx.config.models.push_back(parse_model_kind(m));
  }
  ctx.config.validate();
  ctx.out_dir = o.out_dir;
  ctx.quiet = o.quiet;
  ctx.log = &log;
  return ctx;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Colorimetric oxidant analysis from video frames", "cbca"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Sets both the data and the model seed");
  app.add_option("--out", o.out_dir, "Output directory");
  app.add_flag("--quiet", o.quiet, "Suppress progress messages");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic frame dataset and titration table");
  synth->add_option("--times", o.times, "Sampling and titration times in minutes");

  auto* features = app.add_subcommand("features", "Extract per-window color features from frames");
  features->add_option("frames", o.frames_dir, "Directory with manifest.json")->required();

  auto add_train_flags = [&](CLI::App* sub) {
    sub->add_option("features", o.features_csv, "Feature CSV")->required();
    sub->add_option("titration", o.titration_csv, "Titration CSV")->required();
    sub->add_option("--labels", o.labels, "Label mode: global or piecewise");
  };
  auto* train = app.add_subcommand("train", "Fit and evaluate regression models");
  add_train_flags(train);
  train->add_option("--feature-mode", o.feature_mode, "Feature subset: all, top_k or paper");
  train->add_option("--k", o.k, "Subset size for top_k");
  train->add_option("--models", o.models, "Models to train (ols ridge forest gboost mlp)");

  auto* predict = app.add_subcommand("predict", "Predict oxidant concentration from features");
  predict->add_option("model", o.model_path, "Model artifact")->required();
  predict->add_option("features", o.features_csv, "Feature CSV")->required();

  auto* validate = app.add_subcommand("validate", "Compare predictions with titration measurements");
  validate->add_option("model", o.model_path, "Model artifact")->required();
  validate->add_option("features", o.features_csv, "Feature CSV")->required();
  validate->add_option("titration", o.titration_csv, "Titration CSV")->required();

  auto* stats = app.add_subcommand("stats", "Correlation and F-score tables");
  add_train_flags(stats);

  for (auto* sub : {synth, features, train, predict, validate, stats}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto ctx = make_context(o, err);
    if (synth->parsed()) cmd_synth(ctx);
    else if (features->parsed()) cmd_features(o.frames_dir, ctx);
    else if (train->parsed()) cmd_train(o.features_csv, o.titration_csv, ctx);
    else if (predict->parsed()) cmd_predict(o.model_path, o.features_csv, ctx);
    else if (validate->parsed()) cmd_validate(o.model_path, o.features_csv, o.titration_csv, ctx);
    else if (stats->parsed()) cmd_stats(o.features_csv, o.titration_csv, ctx);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace cbca
