#include "cbca/ml.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>

#include "cbca/error.hpp"
#include "cbca/json_io.hpp"
#include "cbca/rng.hpp"

namespace cbca {

Vector predict_mlp(const MlpModel& m, const Matrix& x);

namespace {

constexpr std::array<std::string_view, 5> kKindNames = {"ols", "ridge", "forest", "gboost", "mlp"};

void check_finite(const Matrix& x, const Vector& y, const char* who) {
  if (x.rows() == 0) throw InvalidArgument(std::string(who) + ": no rows");
  if (x.rows() != y.size()) throw InvalidArgument(std::string(who) + ": feature/label row mismatch");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument(std::string(who) + ": non-finite input");
}

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) { return kKindNames[std::size_t(kind)]; }

ModelKind parse_model_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return ModelKind(i);
  throw InputError("unknown model kind '" + std::string(name) + "' (expected ols, ridge, forest, gboost or mlp)");
}

void ModelSpec::validate() const {
  auto bad = [](const std::string& m) { return InvalidArgument("model spec: " + m); };
  if (ridge.alpha_grid.empty()) throw bad("ridge alpha grid is empty");
  for (double a : ridge.alpha_grid)
    if (!(a > 0.0) || !std::isfinite(a)) throw bad("ridge alphas must be finite and > 0");
  if (ridge.inner_folds < 2) throw bad("ridge inner_folds must be >= 2");
  if (forest.n_trees < 1) throw bad("forest n_trees must be >= 1");
  if (forest.min_samples_leaf < 1) throw bad("forest min_samples_leaf must be >= 1");
  if (gboost.n_stages < 1) throw bad("gboost n_stages must be >= 1");
  if (!(gboost.learning_rate > 0.0) || !std::isfinite(gboost.learning_rate)) throw bad("gboost learning_rate must be > 0");
  if (gboost.max_depth < 1) throw bad("gboost max_depth must be >= 1");
  if (mlp.hidden.empty()) throw bad("mlp needs at least one hidden layer");
  for (int h : mlp.hidden)
    if (h < 1) throw bad("mlp layer widths must be >= 1");
  if (mlp.max_epochs < 1) throw bad("mlp max_epochs must be >= 1");
  if (!(mlp.learning_rate > 0.0)) throw bad("mlp learning_rate must be > 0");
  if (mlp.batch_size < 1) throw bad("mlp batch_size must be >= 1");
  if (!(mlp.l2 >= 0.0)) throw bad("mlp l2 must be >= 0");
  if (!(mlp.validation_fraction > 0.0 && mlp.validation_fraction < 1.0)) throw bad("mlp validation_fraction must be in (0, 1)");
  if (mlp.patience < 1) throw bad("mlp patience must be >= 1");
  if (!(mlp.tol >= 0.0)) throw bad("mlp tol must be >= 0");
}

// ---- scaling and splitting --------------------------------------------------

MinMaxScaler MinMaxScaler::fit(const Matrix& x) {
  if (x.rows() == 0) throw InvalidArgument("MinMaxScaler: empty table");
  return {x.colwise().minCoeff().transpose(), x.colwise().maxCoeff().transpose()};
}

Matrix MinMaxScaler::transform(const Matrix& x) const {
  if (x.cols() != min.size()) throw InvalidArgument("MinMaxScaler: column count mismatch");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double range = max(j) - min(j);
    if (range > 0.0)
      out.col(j) = (x.col(j).array() - min(j)) / range;
    else
      out.col(j).setZero();
  }
  return out;
}

std::pair<MinMaxScaler, Matrix> minmax_fit_transform(const Matrix& x) {
  auto s = MinMaxScaler::fit(x);
  return {s, s.transform(x)};
}

Split train_test_split(std::size_t n, double test_frac, std::uint64_t seed) {
  if (n < 5) throw InvalidArgument("train_test_split: need at least 5 samples");
  if (!(test_frac > 0.0 && test_frac < 1.0)) throw InvalidArgument("train_test_split: test_frac must be in (0, 1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng(seed).shuffle(idx);
  // The small epsilon keeps 0.2 * 10 from landing a hair under 2.
  const auto n_test = std::max<std::size_t>(1, std::size_t(std::floor(test_frac * double(n) + 1e-9)));
  Split s;
  s.train.assign(idx.begin(), idx.end() - std::ptrdiff_t(n_test));
  s.test.assign(idx.end() - std::ptrdiff_t(n_test), idx.end());
  return s;
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(Eigen::Index(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(Eigen::Index(i)) = x.row(Eigen::Index(rows[i]));
  return out;
}

Vector take_rows(const Vector& y, const std::vector<std::size_t>& rows) {
  Vector out(Eigen::Index(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(Eigen::Index(i)) = y(Eigen::Index(rows[i]));
  return out;
}

// ---- prediction ---------------------------------------------------------------

Vector predict_params(const ModelParams& params, const Matrix& x) {
  return std::visit(
      [&](const auto& m) -> Vector {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          if (x.cols() != m.coef.size()) throw InvalidArgument("predict: column count mismatch");
          return (x * m.coef).array() + m.intercept;
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          Vector out = Vector::Zero(x.rows());
          for (Eigen::Index i = 0; i < x.rows(); ++i) {
            double s = 0.0;
            for (const auto& t : m.trees) s += t.predict(x, i);
            out(i) = s / double(m.trees.size());
          }
          return out;
        } else if constexpr (std::is_same_v<T, GBoostModel>) {
          return gboost_staged_predict(m, x, int(m.trees.size()));
        } else {
          return predict_mlp(m, x);
        }
      },
      params);
}

std::uint64_t data_fingerprint(const std::vector<std::string>& features, const Matrix& x, const Vector& y) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto eat = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ b[i]) * 0x100000001b3ULL;
  };
  for (const auto& f : features) eat(f.c_str(), f.size() + 1);
  const std::int64_t dims[2] = {x.rows(), x.cols()};
  eat(dims, sizeof dims);
  eat(x.data(), sizeof(double) * std::size_t(x.size()));
  eat(y.data(), sizeof(double) * std::size_t(y.size()));
  return h;
}

TrainedModel fit(const ModelSpec& spec, const std::vector<std::string>& features, const Matrix& x, const Vector& y) {
  spec.validate();
  check_finite(x, y, "fit");
  if (Eigen::Index(features.size()) != x.cols()) throw InvalidArgument("fit: feature names do not match columns");
  TrainedModel m;
  m.spec = spec;
  m.features = features;
  m.data_fingerprint = data_fingerprint(features, x, y);
  m.train_time_ms = time_ms([&] {
    m.scaler = MinMaxScaler::fit(x);
    const Matrix xs = m.scaler.transform(x);
    switch (spec.kind) {
      case ModelKind::Ols: m.params = fit_ols(xs, y); break;
      case ModelKind::Ridge: m.params = fit_ridge(xs, y, select_ridge_alpha(xs, y, spec.ridge)); break;
      case ModelKind::Forest: m.params = fit_forest(xs, y, spec.forest); break;
      case ModelKind::GBoost: m.params = fit_gboost(xs, y, spec.gboost); break;
      case ModelKind::Mlp: m.params = fit_mlp(xs, y, spec.mlp); break;
    }
  });
  return m;
}

Vector predict(const TrainedModel& model, const std::vector<std::string>& features, const Matrix& x) {
  if (Eigen::Index(features.size()) != x.cols()) throw InvalidArgument("predict: feature names do not match columns");
  if (features.size() != model.features.size())
    throw CompatibilityError("predict: model expects " + std::to_string(model.features.size()) + " features, got " +
                             std::to_string(features.size()));
  Matrix ordered(x.rows(), x.cols());
  for (std::size_t j = 0; j < model.features.size(); ++j) {
    const auto it = std::find(features.begin(), features.end(), model.features[j]);
    if (it == features.end()) throw CompatibilityError("predict: missing feature '" + model.features[j] + "'");
    ordered.col(Eigen::Index(j)) = x.col(it - features.begin());
  }
  if (!ordered.allFinite()) throw InvalidArgument("predict: non-finite input");
  return predict_params(model.params, model.scaler.transform(ordered));
}

// ---- metrics, CV, evaluation ----------------------------------------------------

Metrics metrics(const Vector& y_true, const Vector& y_pred) {
  if (y_true.size() == 0 || y_true.size() != y_pred.size()) throw InvalidArgument("metrics: empty or mismatched vectors");
  const Vector e = y_pred - y_true;
  Metrics m;
  m.mse = e.squaredNorm() / double(e.size());
  m.mae = e.cwiseAbs().sum() / double(e.size());
  const bool constant = (y_true.array() == y_true(0)).all();
  if (!constant) m.r2 = 1.0 - e.squaredNorm() / (y_true.array() - y_true.mean()).square().sum();
  return m;
}

double r2_score(const Vector& y_true, const Vector& y_pred) {
  const auto m = metrics(y_true, y_pred);
  if (!m.r2) throw UndefinedStatistic("r2: constant target");
  return *m.r2;
}

std::vector<int> kfold_assignment(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("kfold: k must be >= 2");
  if (n < std::size_t(k)) throw InvalidArgument("kfold: fewer samples than folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng(seed).shuffle(perm);
  std::vector<int> fold(n);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = n / std::size_t(k) + (std::size_t(f) < n % std::size_t(k) ? 1 : 0);
    for (std::size_t i = 0; i < len; ++i) fold[perm[pos++]] = f;
  }
  return fold;
}

CvResult cross_validate(const ModelSpec& spec, const std::vector<std::string>& features, const Matrix& x,
                        const Vector& y, int k, std::uint64_t seed) {
  check_finite(x, y, "cross_validate");
  CvResult r;
  r.fold_of = kfold_assignment(std::size_t(x.rows()), k, seed);
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < r.fold_of.size(); ++i) (r.fold_of[i] == f ? te : tr).push_back(i);
    const auto model = fit(spec, features, take_rows(x, tr), take_rows(y, tr));
    const auto m = metrics(take_rows(y, te), predict(model, features, take_rows(x, te)));
    if (!m.r2) throw UndefinedStatistic("cross_validate: fold " + std::to_string(f) + " has a constant target");
    r.fold_scores.push_back(*m.r2);
  }
  r.mean = std::accumulate(r.fold_scores.begin(), r.fold_scores.end(), 0.0) / k;
  double ss = 0.0;
  for (double s : r.fold_scores) ss += (s - r.mean) * (s - r.mean);
  r.sd = std::sqrt(ss / (k - 1));
  return r;
}

Evaluation evaluate(const ModelSpec& spec, const std::vector<std::string>& features, const Matrix& x,
                    const Vector& y, std::uint64_t seed, int cv_folds) {
  check_finite(x, y, "evaluate");
  if (x.rows() < 10) throw InvalidArgument("evaluate: need at least 10 samples");
  Evaluation ev;
  ev.split = train_test_split(std::size_t(x.rows()), 0.2, seed);
  const Matrix xtr = take_rows(x, ev.split.train), xte = take_rows(x, ev.split.test);
  const Vector ytr = take_rows(y, ev.split.train), yte = take_rows(y, ev.split.test);
  ev.model = fit(spec, features, xtr, ytr);
  ev.report.train_time_ms = ev.model.train_time_ms;
  ev.report.r2_train = r2_score(ytr, predict(ev.model, features, xtr));
  ev.test_predictions = predict(ev.model, features, xte);
  const auto m = metrics(yte, ev.test_predictions);
  if (!m.r2) throw UndefinedStatistic("evaluate: test partition has a constant target");
  ev.report.r2_test = *m.r2;
  ev.report.mse = m.mse;
  ev.report.mae = m.mae;
  ev.cv = cross_validate(spec, features, xtr, ytr, cv_folds, seed);
  ev.report.cv_r2_mean = ev.cv.mean;
  ev.report.cv_r2_std = ev.cv.sd;
  return ev;
}

Matrix feature_matrix(const std::vector<LabeledSample>& samples, const std::vector<std::string>& features) {
  Matrix x(Eigen::Index(samples.size()), Eigen::Index(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) {
    const auto idx = feature_index(features[j]);
    if (!idx) throw InvalidArgument("unknown feature '" + features[j] + "'");
    for (std::size_t i = 0; i < samples.size(); ++i) x(Eigen::Index(i), Eigen::Index(j)) = samples[i].features[*idx];
  }
  return x;
}

Vector label_vector(const std::vector<LabeledSample>& samples) {
  Vector y(Eigen::Index(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) y(Eigen::Index(i)) = samples[i].label;
  return y;
}

}  // namespace cbca
