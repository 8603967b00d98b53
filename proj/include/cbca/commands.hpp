#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cbca/chem.hpp"
#include "cbca/config.hpp"
#include "cbca/ml.hpp"
#include "cbca/stats.hpp"

namespace cbca {

struct CommandContext {
  AppConfig config;
  std::filesystem::path out_dir = ".";
  bool quiet = false;
  std::ostream* log = nullptr;  // progress messages unless quiet

  void info(const std::string& msg) const;
  std::filesystem::path out(const std::string& name) const { return out_dir / name; }
};

// Process exit status for an error: 2 input, 3 compatibility, 1 anything else.
int exit_code_for(const std::exception& e);

// A feature CSV read by column name: t_sec plus every column except kept_pixels.
struct FeatureTable {
  std::vector<double> t_sec;
  std::vector<std::string> names;
  Matrix x;
};
FeatureTable read_feature_table(const std::filesystem::path& path);

// Labels for each feature row from the titration records, per the label mode.
// `fit` receives the global line when that mode is used.
std::vector<LabeledSample> label_series(const FeatureSeries& series, const std::vector<TitrationRecord>& titration,
                                        LabelMode mode, std::optional<LineFit>* fit = nullptr);

// Feature names the config selects for training.
std::vector<std::string> selected_features(const AppConfig& config, const std::vector<LabeledSample>& samples);

// Writes frames/, manifest.json, titration.csv and labels.csv.
DatasetSummary cmd_synth(const CommandContext& ctx);

// Writes features.csv and diagnostics.json. Throws InputError when no window survives.
FeatureSeries cmd_features(const std::filesystem::path& frames_dir, const CommandContext& ctx);

struct ModelOutcome {
  ModelKind kind;
  std::optional<EvalReport> report;  // empty when fitting failed
  std::string error;
};

struct TrainSummary {
  std::vector<std::string> features;
  std::vector<ModelOutcome> models;
};

// Writes train_labels.csv, the stats outputs, model_<kind>.json per model and
// eval_report.json. Models that fail are recorded, and the command then throws.
TrainSummary cmd_train(const std::filesystem::path& features_csv, const std::filesystem::path& titration_csv,
                       const CommandContext& ctx);

// Writes predictions.csv (t_sec,predicted_ox_mg_l).
std::vector<std::pair<double, double>> cmd_predict(const std::filesystem::path& model_path,
                                                   const std::filesystem::path& features_csv, const CommandContext& ctx);

struct ValidationPoint {
  double t_min = 0.0;
  ReplicateStats measured;
  std::size_t replicates = 0;
  double predicted = 0.0;  // mean prediction over matched feature rows
  std::size_t rows = 0;
};

struct ValidationReport {
  std::vector<ValidationPoint> points;
  std::vector<double> unmatched_t_min;
  Metrics metrics;
};

// Feature rows within this many seconds of a titration time count toward it.
inline constexpr double kMatchWindowSec = 30.0;

// Writes validation_report.json and validation_points.csv.
ValidationReport cmd_validate(const std::filesystem::path& model_path, const std::filesystem::path& features_csv,
                              const std::filesystem::path& titration_csv, const CommandContext& ctx);

// Writes train_labels.csv, correlation.csv, f_scores.csv, feature_r2.csv and stats.json.
void cmd_stats(const std::filesystem::path& features_csv, const std::filesystem::path& titration_csv,
               const CommandContext& ctx);

}  // namespace cbca
