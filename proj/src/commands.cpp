#include "cbca/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "cbca/csv.hpp"
#include "cbca/error.hpp"
#include "cbca/json_io.hpp"
#include "cbca/pipeline.hpp"
#include "cbca/synth.hpp"

namespace cbca {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Non-finite values become null.
ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }
ojson num(const std::optional<double>& v) { return v ? num(*v) : ojson(nullptr); }

void write_json(const fs::path& path, const ojson& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string csv_num(double v) { return std::isfinite(v) ? format_fixed(v, 12) : ""; }

void ensure_out_dir(const CommandContext& ctx) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec || !fs::is_directory(ctx.out_dir)) throw InputError("cannot create output directory " + ctx.out_dir.string());
}

// Label regressed on one feature: slope, intercept, r2 (all NaN when undefined).
struct FeatureFit {
  double slope, intercept, r2;
};

FeatureFit feature_fit(const std::vector<LabeledSample>& s, std::size_t j) {
  const double nan = std::nan("");
  const double n = double(s.size());
  double mx = 0, my = 0;
  for (const auto& r : s) mx += r.features[j], my += r.label;
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& r : s) {
    sxx += (r.features[j] - mx) * (r.features[j] - mx);
    sxy += (r.features[j] - mx) * (r.label - my);
    syy += (r.label - my) * (r.label - my);
  }
  const bool xconst = std::all_of(s.begin(), s.end(), [&](const auto& r) { return r.features[j] == s[0].features[j]; });
  const bool yconst = std::all_of(s.begin(), s.end(), [&](const auto& r) { return r.label == s[0].label; });
  if (xconst) return {nan, nan, nan};
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, yconst ? nan : sxy * sxy / (sxx * syy)};
}

void write_stats_outputs(const std::vector<LabeledSample>& samples, const AppConfig& cfg, const CommandContext& ctx) {
  std::vector<OxLabel> labels;
  for (const auto& s : samples) labels.push_back({s.t_sec, s.label});
  write_labels_csv(labels, ctx.out("train_labels.csv"));

  const auto corr = correlation_matrix(samples);
  write_correlation_csv(corr, ctx.out("correlation.csv"));
  const auto scores = score_features(samples);
  write_scores_csv(scores, ctx.out("f_scores.csv"));

  std::ofstream fr(ctx.out("feature_r2.csv"), std::ios::binary);
  if (!fr) throw InputError("cannot write " + ctx.out("feature_r2.csv").string());
  fr << "feature,slope,intercept,r2\n";
  ojson fits = ojson::array();
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    const auto f = feature_fit(samples, j);
    fr << kFeatureNames[j] << ',' << csv_num(f.slope) << ',' << csv_num(f.intercept) << ',' << csv_num(f.r2) << '\n';
    fits.push_back({{"feature", kFeatureNames[j]}, {"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"r2", num(f.r2)}});
  }

  ojson j;
  j["n_samples"] = samples.size();
  j["label_mode"] = label_mode_name(cfg.label_mode);
  ojson values = ojson::array();
  for (const auto& row : corr.values) {
    ojson r = ojson::array();
    for (double v : row) r.push_back(num(v));
    values.push_back(r);
  }
  j["correlation"] = {{"labels", corr.labels}, {"values", values}, {"undefined", corr.undefined}};
  ojson sc = ojson::array();
  for (const auto& s : scores)
    sc.push_back({{"feature", s.feature},
                  {"pearson_r", num(s.r)},
                  {"f_score", num(s.f_score)},
                  {"f_score_infinite", std::isinf(s.f_score)},
                  {"p_value", num(s.p_value)},
                  {"univariate_r2", num(s.univariate_r2)}});
  j["f_scores"] = sc;
  j["feature_fits"] = fits;
  j["ranking"] = select_k_best(samples, int(kNumFeatures));
  j["top_k"] = {{"k", cfg.top_k}, {"features", select_k_best(samples, cfg.top_k)}};
  j["paper_subset"] = kPaperSubset;
  write_json(ctx.out("stats.json"), j);
}

std::vector<LabeledSample> load_labeled(const fs::path& features_csv, const fs::path& titration_csv,
                                        const CommandContext& ctx, std::optional<LineFit>* fit) {
  const auto series = read_features_csv(features_csv);
  const auto titration = read_titration_csv(titration_csv);
  auto samples = label_series(series, titration, ctx.config.label_mode, fit);
  ctx.info("labeled " + std::to_string(samples.size()) + " feature rows");
  return samples;
}

}  // namespace

void CommandContext::info(const std::string& msg) const {
  if (!quiet && log) *log << msg << '\n';
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const CompatibilityError*>(&e)) return 3;
  if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const NoRoiFound*>(&e) ||
      dynamic_cast<const EmptyMaskError*>(&e) || dynamic_cast<const SingularSystem*>(&e) ||
      dynamic_cast<const UndefinedStatistic*>(&e))
    return 2;
  return 1;
}

FeatureTable read_feature_table(const fs::path& path) {
  const auto csv = read_csv(path);
  const auto t_col = std::find(csv.header.begin(), csv.header.end(), "t_sec");
  if (t_col == csv.header.end()) throw InputError(path.string() + ": no t_sec column");
  FeatureTable t;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    if (csv.header[c] == "t_sec" || csv.header[c] == "kept_pixels") continue;
    t.names.push_back(csv.header[c]);
    cols.push_back(c);
  }
  if (csv.rows.empty()) throw InputError(path.string() + ": no data rows");
  t.x.resize(Eigen::Index(csv.rows.size()), Eigen::Index(cols.size()));
  const std::size_t tc = std::size_t(t_col - csv.header.begin());
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    if (row.size() != csv.header.size()) throw InputError(path.string() + ": ragged row " + std::to_string(i + 2));
    t.t_sec.push_back(parse_double(row[tc], path, i + 2));
    for (std::size_t j = 0; j < cols.size(); ++j)
      t.x(Eigen::Index(i), Eigen::Index(j)) = parse_double(row[cols[j]], path, i + 2);
  }
  return t;
}

std::vector<LabeledSample> label_series(const FeatureSeries& series, const std::vector<TitrationRecord>& titration,
                                        LabelMode mode, std::optional<LineFit>* fit) {
  if (titration.empty()) throw InputError("titration table is empty");
  try {
    if (mode == LabelMode::Global) {
      const auto line = fit_label_line(titration_points(titration));
      if (fit) *fit = line;
      return interpolate_labels(line, series);
    }
    if (fit) fit->reset();
    return interpolate_labels_piecewise(replicate_table(titration), series);
  } catch (const InvalidArgument& e) {
    throw InputError(std::string("cannot build labels: ") + e.what());
  }
}

std::vector<std::string> selected_features(const AppConfig& config, const std::vector<LabeledSample>& samples) {
  switch (config.feature_mode) {
    case FeatureMode::All: return {kFeatureNames.begin(), kFeatureNames.end()};
    case FeatureMode::TopK: return select_k_best(samples, config.top_k);
    case FeatureMode::Paper: return kPaperSubset;
  }
  return {};
}

DatasetSummary cmd_synth(const CommandContext& ctx) {
  ensure_out_dir(ctx);
  const auto spec = ctx.config.dataset_spec();
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw InputError(e.what());
  }
  auto summary = generate_dataset(spec, ctx.out_dir);
  ctx.info("wrote " + std::to_string(summary.frames) + " frames and " + std::to_string(summary.titration.size()) +
           " titration records to " + ctx.out_dir.string());
  return summary;
}

FeatureSeries cmd_features(const fs::path& frames_dir, const CommandContext& ctx) {
  const auto sources = load_frame_sources(frames_dir, ctx.config.pipeline);
  ensure_out_dir(ctx);
  PipelineDiagnostics diag;
  auto series = aggregate_windows(sources, ctx.config.pipeline, &diag);
  write_text_file(ctx.out("diagnostics.json"), diagnostics_json(diag));
  if (series.empty()) throw InputError("no feature windows survived (see diagnostics.json)");
  write_features_csv(series, ctx.out("features.csv"));
  ctx.info("wrote " + std::to_string(series.size()) + " feature rows from " + std::to_string(diag.frames_total) +
           " frames");
  return series;
}

TrainSummary cmd_train(const fs::path& features_csv, const fs::path& titration_csv, const CommandContext& ctx) {
  const AppConfig& cfg = ctx.config;
  std::optional<LineFit> line;
  const auto samples = load_labeled(features_csv, titration_csv, ctx, &line);
  if (samples.size() < 10) throw InputError("training needs at least 10 labeled rows, got " + std::to_string(samples.size()));
  ensure_out_dir(ctx);
  write_stats_outputs(samples, cfg, ctx);

  TrainSummary summary;
  summary.features = selected_features(cfg, samples);
  const Matrix x = feature_matrix(samples, summary.features);
  const Vector y = label_vector(samples);
  const auto split = train_test_split(samples.size(), 0.2, cfg.model_seed);

  ojson report;
  report["n_samples"] = samples.size();
  report["n_train"] = split.train.size();
  report["n_test"] = split.test.size();
  report["feature_mode"] = feature_mode_name(cfg.feature_mode);
  report["features"] = summary.features;
  report["label_mode"] = label_mode_name(cfg.label_mode);
  report["label_fit"] = line ? ojson{{"slope_per_min", line->slope}, {"intercept", line->intercept}, {"r2", line->r2}}
                             : ojson(nullptr);
  report["seed"] = cfg.model_seed;
  report["cv_folds"] = cfg.cv_folds;
  ojson models = ojson::array();
  std::string failures;
  for (auto kind : cfg.models) {
    ModelOutcome out{kind, std::nullopt, {}};
    ojson m;
    m["kind"] = model_kind_name(kind);
    try {
      const auto ev = evaluate(cfg.spec_for(kind), summary.features, x, y, cfg.model_seed, cfg.cv_folds);
      save_model(ev.model, ctx.out("model_" + std::string(model_kind_name(kind)) + ".json"));
      out.report = ev.report;
      const auto& r = ev.report;
      m["r2_train"] = num(r.r2_train);
      m["r2_test"] = num(r.r2_test);
      m["mse"] = num(r.mse);
      m["mae"] = num(r.mae);
      m["cv_r2_mean"] = num(r.cv_r2_mean);
      m["cv_r2_std"] = num(r.cv_r2_std);
      ojson folds = ojson::array();
      for (double s : ev.cv.fold_scores) folds.push_back(num(s));
      m["cv_fold_scores"] = folds;
      if (const auto* lin = std::get_if<LinearModel>(&ev.model.params); lin && kind == ModelKind::Ridge)
        m["ridge_alpha"] = lin->alpha;
      if (const auto* mlp = std::get_if<MlpModel>(&ev.model.params)) m["mlp_epochs"] = mlp->epochs_run;
      m["train_time_ms"] = r.train_time_ms;
      ctx.info(std::string(model_kind_name(kind)) + ": r2_test " + format_fixed(r.r2_test, 4) + ", cv " +
               format_fixed(r.cv_r2_mean, 4) + " +/- " + format_fixed(r.cv_r2_std, 4));
    } catch (const Error& e) {
      out.error = e.what();
      m["error"] = out.error;
      failures += (failures.empty() ? "" : "; ") + std::string(model_kind_name(kind)) + ": " + out.error;
    }
    models.push_back(m);
    summary.models.push_back(std::move(out));
  }
  report["models"] = models;
  write_json(ctx.out("eval_report.json"), report);
  if (!failures.empty()) throw InputError("some models failed (" + failures + ")");
  return summary;
}

std::vector<std::pair<double, double>> cmd_predict(const fs::path& model_path, const fs::path& features_csv,
                                                   const CommandContext& ctx) {
  const auto model = load_model(model_path);
  const auto table = read_feature_table(features_csv);
  Matrix x(table.x.rows(), Eigen::Index(model.features.size()));
  for (std::size_t j = 0; j < model.features.size(); ++j) {
    const auto it = std::find(table.names.begin(), table.names.end(), model.features[j]);
    if (it == table.names.end())
      throw CompatibilityError("feature '" + model.features[j] + "' required by the model is not in " + features_csv.string());
    x.col(Eigen::Index(j)) = table.x.col(it - table.names.begin());
  }
  const Vector p = predict(model, model.features, x);
  ensure_out_dir(ctx);
  std::ofstream out(ctx.out("predictions.csv"), std::ios::binary);
  if (!out) throw InputError("cannot write " + ctx.out("predictions.csv").string());
  out << "t_sec,predicted_ox_mg_l\n";
  std::vector<std::pair<double, double>> rows;
  for (std::size_t i = 0; i < table.t_sec.size(); ++i) {
    rows.emplace_back(table.t_sec[i], p(Eigen::Index(i)));
    out << format_fixed(table.t_sec[i], 6) << ',' << format_fixed(p(Eigen::Index(i)), 12) << '\n';
  }
  ctx.info("wrote " + std::to_string(rows.size()) + " predictions");
  return rows;
}

ValidationReport cmd_validate(const fs::path& model_path, const fs::path& features_csv, const fs::path& titration_csv,
                              const CommandContext& ctx) {
  const auto model = load_model(model_path);
  const auto series = read_features_csv(features_csv);
  const auto titration = read_titration_csv(titration_csv);
  if (titration.empty()) throw InputError("titration table is empty");
  std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
  Matrix all(Eigen::Index(series.size()), Eigen::Index(kNumFeatures));
  for (std::size_t i = 0; i < series.size(); ++i)
    for (std::size_t j = 0; j < kNumFeatures; ++j) all(Eigen::Index(i), Eigen::Index(j)) = series[i].features[j];
  Matrix x(all.rows(), Eigen::Index(model.features.size()));
  for (std::size_t j = 0; j < model.features.size(); ++j) x.col(Eigen::Index(j)) = all.col(Eigen::Index(*feature_index(model.features[j])));
  const Vector pred = predict(model, model.features, x);

  ValidationReport rep;
  std::map<double, std::size_t> counts;
  for (const auto& r : titration) ++counts[r.t_min];
  for (const auto& [t_min, stats] : replicate_table(titration)) {
    ValidationPoint p{t_min, stats, counts[t_min], 0.0, 0};
    double sum = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i)
      if (std::abs(series[i].t_sec - 60.0 * t_min) <= kMatchWindowSec) {
        sum += pred(Eigen::Index(i));
        ++p.rows;
      }
    if (p.rows == 0) {
      rep.unmatched_t_min.push_back(t_min);
      continue;
    }
    p.predicted = sum / double(p.rows);
    rep.points.push_back(p);
  }
  if (rep.points.size() < 2)
    throw InputError("validation needs at least 2 titration times with feature rows within " +
                     format_fixed(kMatchWindowSec, 0) + " s, found " + std::to_string(rep.points.size()));
  Vector measured(Eigen::Index(rep.points.size())), predicted(Eigen::Index(rep.points.size()));
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    measured(Eigen::Index(i)) = rep.points[i].measured.mean;
    predicted(Eigen::Index(i)) = rep.points[i].predicted;
  }
  rep.metrics = metrics(measured, predicted);

  ensure_out_dir(ctx);
  ojson j;
  j["model_kind"] = model_kind_name(model.spec.kind);
  j["features"] = model.features;
  j["match_window_sec"] = kMatchWindowSec;
  ojson pts = ojson::array();
  std::ofstream csv(ctx.out("validation_points.csv"), std::ios::binary);
  if (!csv) throw InputError("cannot write " + ctx.out("validation_points.csv").string());
  csv << "t_min,measured_mean_mg_l,measured_sd_mg_l,replicates,predicted_mg_l,rows,residual_mg_l\n";
  for (const auto& p : rep.points) {
    const double resid = p.predicted - p.measured.mean;
    pts.push_back({{"t_min", p.t_min},
                   {"measured_mean", p.measured.mean},
                   {"measured_sd", p.measured.sd},
                   {"replicates", p.replicates},
                   {"predicted", p.predicted},
                   {"rows", p.rows},
                   {"residual", resid}});
    csv << format_fixed(p.t_min, 6) << ',' << format_fixed(p.measured.mean, 12) << ','
        << format_fixed(p.measured.sd, 12) << ',' << p.replicates << ',' << format_fixed(p.predicted, 12) << ','
        << p.rows << ',' << format_fixed(resid, 12) << '\n';
  }
  j["points"] = pts;
  j["unmatched_t_min"] = rep.unmatched_t_min;
  j["r2"] = num(rep.metrics.r2);
  j["mse"] = rep.metrics.mse;
  j["mae"] = rep.metrics.mae;
  write_json(ctx.out("validation_report.json"), j);
  ctx.info("validation over " + std::to_string(rep.points.size()) + " timepoints: r2 " +
           (rep.metrics.r2 ? format_fixed(*rep.metrics.r2, 4) : std::string("undefined")));
  return rep;
}

void cmd_stats(const fs::path& features_csv, const fs::path& titration_csv, const CommandContext& ctx) {
  const auto samples = load_labeled(features_csv, titration_csv, ctx, nullptr);
  if (samples.size() < 3) throw InputError("stats need at least 3 labeled rows");
  ensure_out_dir(ctx);
  write_stats_outputs(samples, ctx.config, ctx);
  ctx.info("wrote correlation, F-score and per-feature fit tables");
}

}  // namespace cbca
