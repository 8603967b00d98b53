#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cbca/features.hpp"

namespace cbca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ModelKind { Ols, Ridge, Forest, GBoost, Mlp };

inline constexpr std::array<ModelKind, 5> kAllModelKinds = {ModelKind::Ols, ModelKind::Ridge, ModelKind::Forest,
                                                             ModelKind::GBoost, ModelKind::Mlp};

// "ols", "ridge", "forest", "gboost", "mlp".
std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct RidgeSpec {
  std::vector<double> alpha_grid{0.01, 0.1, 1.0, 10.0, 100.0};
  int inner_folds = 5;
  friend bool operator==(const RidgeSpec&, const RidgeSpec&) = default;
};

struct ForestSpec {
  int n_trees = 100;
  std::uint64_t seed = 42;
  int min_samples_leaf = 1;
  friend bool operator==(const ForestSpec&, const ForestSpec&) = default;
};

struct GBoostSpec {
  int n_stages = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  friend bool operator==(const GBoostSpec&, const GBoostSpec&) = default;
};

struct MlpSpec {
  std::vector<int> hidden{100, 100};
  int max_epochs = 2000;
  double learning_rate = 1e-3;
  int batch_size = 200;  // clipped to the training size
  double l2 = 1e-4;
  bool early_stopping = true;
  double validation_fraction = 0.1;
  int patience = 10;
  double tol = 1e-4;
  std::uint64_t seed = 42;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::Ols;
  RidgeSpec ridge;
  ForestSpec forest;
  GBoostSpec gboost;
  MlpSpec mlp;

  void validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Per-column min-max map fitted on training rows only. Constant columns map to 0.
struct MinMaxScaler {
  Vector min;
  Vector max;

  static MinMaxScaler fit(const Matrix& x);
  Matrix transform(const Matrix& x) const;
  friend bool operator==(const MinMaxScaler& a, const MinMaxScaler& b) { return a.min == b.min && a.max == b.max; }
};

std::pair<MinMaxScaler, Matrix> minmax_fit_transform(const Matrix& x);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded Fisher-Yates over 0..n-1; the first n - floor(test_frac * n) indices train.
Split train_test_split(std::size_t n, double test_frac = 0.2, std::uint64_t seed = 42);

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows);
Vector take_rows(const Vector& y, const std::vector<std::size_t>& rows);

// ---- learned parameters ---------------------------------------------------

struct LinearModel {
  Vector coef;
  double intercept = 0.0;
  double alpha = 0.0;  // 0 for OLS
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean target of the node's samples
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(const Matrix& x, Eigen::Index row) const;
};

struct ForestModel {
  std::vector<Tree> trees;
};

struct GBoostModel {
  double init = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  std::vector<double> stage_loss;  // training MSE after 0..n_stages trees
};

struct MlpModel {
  std::vector<Matrix> weights;  // weights[l] is fan_out x fan_in
  std::vector<Vector> biases;
  int epochs_run = 0;
  double best_validation_loss = 0.0;
};

using ModelParams = std::variant<LinearModel, ForestModel, GBoostModel, MlpModel>;

// ---- fitting on already-scaled data --------------------------------------

// Least squares with intercept via column-pivoted QR. Throws SingularSystem on rank deficiency.
LinearModel fit_ols(const Matrix& x, const Vector& y);
// Closed-form ridge on centered data; the intercept is not penalized.
LinearModel fit_ridge(const Matrix& x, const Vector& y, double alpha);
// Grid alpha with the best mean R^2 over unshuffled contiguous inner folds; ties go to the smaller alpha.
double select_ridge_alpha(const Matrix& x, const Vector& y, const RidgeSpec& spec);

// CART on the given sample indices (repeats allowed). max_depth < 0 means unlimited.
// Splits maximize variance reduction; ties keep the lowest feature, then the lowest threshold.
Tree fit_tree(const Matrix& x, const Vector& y, const std::vector<std::size_t>& samples, int max_depth,
              int min_samples_leaf);
ForestModel fit_forest(const Matrix& x, const Vector& y, const ForestSpec& spec);
GBoostModel fit_gboost(const Matrix& x, const Vector& y, const GBoostSpec& spec);
MlpModel fit_mlp(const Matrix& x, const Vector& y, const MlpSpec& spec);

Vector predict_params(const ModelParams& params, const Matrix& x_scaled);
// Predictions after the first `stages` trees (0 gives the initial constant).
Vector gboost_staged_predict(const GBoostModel& model, const Matrix& x_scaled, int stages);

// ---- full models ----------------------------------------------------------

struct TrainedModel {
  ModelSpec spec;
  MinMaxScaler scaler;
  std::vector<std::string> features;
  ModelParams params;
  double train_time_ms = 0.0;
  std::uint64_t data_fingerprint = 0;
};

// FNV-1a over feature names and the IEEE bits of x and y.
std::uint64_t data_fingerprint(const std::vector<std::string>& features, const Matrix& x, const Vector& y);

// Fits the scaler on x, then the model on the scaled rows. Columns of x follow `features`.
TrainedModel fit(const ModelSpec& spec, const std::vector<std::string>& features, const Matrix& x, const Vector& y);

// `features` must be a permutation of model.features; columns are reordered to match.
// Throws CompatibilityError otherwise.
Vector predict(const TrainedModel& model, const std::vector<std::string>& features, const Matrix& x);

struct Metrics {
  std::optional<double> r2;  // empty when y_true is constant
  double mse = 0.0;
  double mae = 0.0;
};

Metrics metrics(const Vector& y_true, const Vector& y_pred);
// R^2 alone; throws UndefinedStatistic when y_true is constant.
double r2_score(const Vector& y_true, const Vector& y_pred);

struct CvResult {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation over folds
  std::vector<double> fold_scores;
  std::vector<int> fold_of;  // fold index of each sample
};

// Seeded shuffle, then k contiguous folds; the first n % k folds hold one extra sample.
std::vector<int> kfold_assignment(std::size_t n, int k, std::uint64_t seed);

// Refits scaler and model on each training fold. Throws UndefinedStatistic if a test
// fold has constant targets.
CvResult cross_validate(const ModelSpec& spec, const std::vector<std::string>& features, const Matrix& x,
                        const Vector& y, int k = 5, std::uint64_t seed = 42);

struct EvalReport {
  double r2_train = 0.0;
  double r2_test = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  double cv_r2_mean = 0.0;
  double cv_r2_std = 0.0;
  double train_time_ms = 0.0;
};

struct Evaluation {
  EvalReport report;
  TrainedModel model;
  Split split;
  CvResult cv;
  Vector test_predictions;
};

// Split, fit (timed), test metrics, then CV on the training partition.
Evaluation evaluate(const ModelSpec& spec, const std::vector<std::string>& features, const Matrix& x,
                    const Vector& y, std::uint64_t seed = 42, int cv_folds = 5);

// ---- tables and artifacts -------------------------------------------------

// Columns `features` of the samples, and their labels.
Matrix feature_matrix(const std::vector<LabeledSample>& samples, const std::vector<std::string>& features);
Vector label_vector(const std::vector<LabeledSample>& samples);

inline constexpr int kArtifactFormatVersion = 1;

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

nlohmann::ordered_json spec_to_json(const ModelSpec& spec);
// Keys absent from `j` keep their defaults; unknown keys are InputError.
ModelSpec spec_from_json(const nlohmann::json& j, const std::string& where = "model");

}  // namespace cbca
