// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any
// selected criterion fails. Usage: cbca_acceptance [--criterion N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <omp.h>

#include "../unit/test_util.hpp"
#include "cbca/chem.hpp"
#include "cbca/cli.hpp"
#include "cbca/color_space.hpp"
#include "cbca/config.hpp"
#include "cbca/json_io.hpp"
#include "cbca/kernels.hpp"
#include "cbca/ml.hpp"
#include "cbca/stats.hpp"
#include "cbca/synth.hpp"

using namespace cbca;
using cbca::test::max_channel_diff;
using cbca::test::random_image;
using cbca::test::strip_timing;
using cbca::test::TempDir;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// ---- tolerances and limits --------------------------------------------------

constexpr int kKernelCases = 120;
constexpr int kMaxSide = 16;
constexpr int kClaheTolerance = 1;
constexpr double kKernelLimitSec = 30.0;

constexpr int kColorTolerance = 1;
constexpr double kColorLimitSec = 5.0;

constexpr int kRegressionProblems = 100;
constexpr double kOlsTolerance = 1e-8;
constexpr double kRidgeAlpha = 1e-10;
constexpr double kRidgeTolerance = 1e-8;
constexpr double kLossSlack = 1e-12;   // relative to the stage-0 loss
constexpr double kRangeSlack = 1e-12;  // relative to the target range
constexpr double kRegressionLimitSec = 60.0;

constexpr double kPearsonTolerance = 1e-12;
constexpr double kFTolerance = 1e-12;  // relative
constexpr double kPTolerance = 1e-8;
constexpr int kStatTrials = 200;

constexpr double kTestR2Min = 0.99;
constexpr double kValidationR2Min = 0.98;
constexpr double kRampLow = 0.33, kRampHigh = 4.00, kRampTolerance = 0.005;
constexpr double kEndToEndLimitSec = 300.0;

constexpr double kTopKLossMaxPoints = 2.0;

constexpr double kLabelTolerance = 1e-9;
constexpr double kFitR2Tolerance = 1e-12;

struct Outcome {
  bool pass = true;
  std::string detail;
  double limit_sec = 0.0;  // 0 means no runtime limit
};

// Accumulates clause results into an outcome.
struct Clauses {
  Outcome out;
  void add(bool ok, const std::string& text) {
    out.pass = out.pass && ok;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string(ok ? "" : "FAILED ") + text;
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// ---- 1: kernels ---------------------------------------------------------------

Outcome kernel_suite() {
  Clauses c;
  c.out.limit_sec = kKernelLimitSec;
  int bilateral = 0, adaptive = 0, range = 0, black = 0, hist = 0, clahe = 0, clahe_worst = 0;
  for (int seed = 0; seed < kKernelCases; ++seed) {
    std::mt19937 rng(1000 + seed);
    const int w = 1 + int(rng() % kMaxSide), h = 1 + int(rng() % kMaxSide);
    const Image rgb = random_image(rng, w, h);

    const int d = 1 + 2 * int(rng() % 5);
    const double sc = 10.0 + double(rng() % 100), ss = 1.0 + double(rng() % 100);
    bilateral += kernels::bilateral_filter(rgb, d, sc, ss) == reference::bilateral_filter(rgb, d, sc, ss);

    const Image gray = random_image(rng, w, h, ColorSpace::Gray);
    const int block = 3 + 2 * int(rng() % 5);
    adaptive += kernels::adaptive_threshold_gaussian(gray, block, 2.0) ==
                reference::adaptive_threshold_gaussian(gray, block, 2.0);

    // Masks and histograms against per-pixel brute force.
    const Image hsv = random_image(rng, w, h, ColorSpace::Hsv);
    HsvBounds b;
    b.lo = {std::uint8_t(rng() % 90), std::uint8_t(rng() % 128), std::uint8_t(rng() % 128)};
    b.hi = {std::uint8_t(90 + rng() % 91), std::uint8_t(128 + rng() % 128), std::uint8_t(128 + rng() % 128)};
    const Mask m = kernels::hsv_range_mask(hsv, b);
    bool ok = true;
    for (std::size_t i = 0; i < hsv.size(); ++i) {
      const Pixel8 p = hsv.pixels()[i];
      bool in = true;
      for (int ch = 0; ch < 3; ++ch) in = in && b.lo[ch] <= p[ch] && p[ch] <= b.hi[ch];
      ok = ok && m[i] == in;
    }
    range += ok;

    const Pixel8 lo{std::uint8_t(rng() % 60), std::uint8_t(rng() % 60), std::uint8_t(rng() % 60)};
    const Mask k = kernels::near_black_mask(rgb, lo, {255, 255, 255});
    ok = true;
    for (std::size_t i = 0; i < rgb.size(); ++i) {
      const Pixel8 p = rgb.pixels()[i];
      ok = ok && k[i] == (p.c0 >= lo.c0 && p.c1 >= lo.c1 && p.c2 >= lo.c2);
    }
    black += ok;

    const int bins = 1 << (1 + rng() % 8);
    const RgbHistogram hg = kernels::rgb_histogram(rgb, k, bins);
    std::array<std::vector<std::uint64_t>, 3> tally;
    for (auto& t : tally) t.assign(std::size_t(bins), 0);
    for (std::size_t i = 0; i < rgb.size(); ++i)
      if (k[i])
        for (int ch = 0; ch < 3; ++ch) ++tally[ch][std::size_t(rgb.pixels()[i][ch] * bins / 256)];
    hist += hg.counts == tally;

    const int tx = 1 + int(rng() % 8), ty = 1 + int(rng() % 8);
    const Image ca = kernels::clahe_l_channel(rgb, 2.0, tx, ty), cb = reference::clahe_l_channel(rgb, 2.0, tx, ty);
    int worst = 0;
    for (std::size_t i = 0; i < ca.size(); ++i) worst = std::max(worst, max_channel_diff(ca.pixels()[i], cb.pixels()[i]));
    clahe_worst = std::max(clahe_worst, worst);
    clahe += worst <= kClaheTolerance;
  }
  const auto n = std::to_string(kKernelCases);
  c.add(bilateral == kKernelCases, "bilateral exact " + std::to_string(bilateral) + "/" + n);
  c.add(adaptive == kKernelCases, "adaptive threshold exact " + std::to_string(adaptive) + "/" + n);
  c.add(range == kKernelCases && black == kKernelCases,
        "masks exact " + std::to_string(range) + "+" + std::to_string(black) + "/" + n + "+" + n);
  c.add(hist == kKernelCases, "histogram exact " + std::to_string(hist) + "/" + n);
  c.add(clahe == kKernelCases, "CLAHE within 1 " + std::to_string(clahe) + "/" + n + " (worst " +
                                   std::to_string(clahe_worst) + ")");
  return c.out;
}

// ---- 2: color spaces --------------------------------------------------------------

Outcome color_suite() {
  Clauses c;
  c.out.limit_sec = kColorLimitSec;
  int worst = 0;
  for (int r = 0; r < 256; r += 17)
    for (int g = 0; g < 256; g += 17)
      for (int b = 0; b < 256; b += 17) {
        const Pixel8 hsv = rgb_to_hsv({std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)});
        worst = std::max(worst, max_channel_diff(hsv, rgb_to_hsv(hsv_to_rgb(hsv))));
      }
  c.add(worst <= kColorTolerance, "HSV round trip on 16^3 grid worst " + std::to_string(worst));

  // 8-bit Lab: L*255/100, a+128, b+128. Red is L 53.24, a 80.09, b 67.20.
  const std::vector<std::pair<Pixel8, Pixel8>> refs = {
      {{255, 255, 255}, {255, 128, 128}}, {{0, 0, 0}, {0, 128, 128}}, {{255, 0, 0}, {136, 208, 195}}};
  int lab_worst = 0;
  for (const auto& [rgb, lab] : refs) lab_worst = std::max(lab_worst, max_channel_diff(rgb_to_lab(rgb), lab));
  c.add(lab_worst <= kColorTolerance, "white/black/red Lab worst " + std::to_string(lab_worst));
  return c.out;
}

// ---- 3: regression --------------------------------------------------------------

std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Normal equations of [1 | X] solved directly: intercept first, then coefficients.
std::vector<double> normal_equations(const Matrix& x, const Vector& y) {
  const std::size_t p = std::size_t(x.cols()) + 1;
  std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> row{1.0};
    for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
    for (std::size_t r = 0; r < p; ++r) {
      b[r] += row[r] * y(i);
      for (std::size_t k = 0; k < p; ++k) a[r][k] += row[r] * row[k];
    }
  }
  return gauss_solve(a, b);
}

struct Problem {
  Matrix x;
  Vector y;
};

Problem random_problem(std::mt19937_64& rng, int n = 50, int p = 4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  Problem pr{Matrix(n, p), Vector(n)};
  std::vector<double> beta(static_cast<std::size_t>(p));
  for (auto& b : beta) b = 4.0 * z(rng);
  const double b0 = z(rng);
  for (int i = 0; i < n; ++i) {
    double v = b0 + 0.3 * z(rng);
    for (int j = 0; j < p; ++j) {
      pr.x(i, j) = u(rng);
      v += beta[std::size_t(j)] * pr.x(i, j);
    }
    pr.y(i) = v;
  }
  return pr;
}

// Worst excess of predictions beyond [min y, max y], at training rows and at probe points.
double range_excess(const ModelParams& params, const Problem& pr, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix probes(200, pr.x.cols());
  for (Eigen::Index i = 0; i < probes.rows(); ++i)
    for (Eigen::Index j = 0; j < probes.cols(); ++j) probes(i, j) = u(rng);
  const double lo = pr.y.minCoeff(), hi = pr.y.maxCoeff();
  double worst = 0.0;
  for (const Matrix* m : {&pr.x, static_cast<const Matrix*>(&probes)}) {
    const Vector p = predict_params(params, *m);
    for (Eigen::Index i = 0; i < p.size(); ++i) worst = std::max({worst, p(i) - hi, lo - p(i)});
  }
  return worst / (hi - lo);
}

Outcome regression_suite() {
  Clauses c;
  c.out.limit_sec = kRegressionLimitSec;
  std::mt19937_64 rng(2024);
  double ols_worst = 0.0, ridge_worst = 0.0;
  int monotone = 0, forest_in = 0, gboost_in = 0;
  double gboost_worst = 0.0;
  for (int t = 0; t < kRegressionProblems; ++t) {
    const Problem pr = random_problem(rng);
    const auto ols = fit_ols(pr.x, pr.y);
    const auto oracle = normal_equations(pr.x, pr.y);
    ols_worst = std::max(ols_worst, std::abs(ols.intercept - oracle[0]));
    for (Eigen::Index j = 0; j < ols.coef.size(); ++j)
      ols_worst = std::max(ols_worst, std::abs(ols.coef(j) - oracle[std::size_t(j) + 1]));

    const auto ridge = fit_ridge(pr.x, pr.y, kRidgeAlpha);
    ridge_worst = std::max({ridge_worst, std::abs(ridge.intercept - ols.intercept), (ridge.coef - ols.coef).cwiseAbs().maxCoeff()});

    const auto gb = fit_gboost(pr.x, pr.y, GBoostSpec{});
    bool mono = true;
    for (std::size_t s = 1; s < gb.stage_loss.size(); ++s)
      mono = mono && gb.stage_loss[s] <= gb.stage_loss[s - 1] + kLossSlack * gb.stage_loss[0];
    monotone += mono;

    ForestSpec fs;
    fs.seed = std::uint64_t(t);
    forest_in += range_excess(fit_forest(pr.x, pr.y, fs), pr, rng) <= kRangeSlack;
    const double ge = range_excess(gb, pr, rng);
    gboost_worst = std::max(gboost_worst, ge);
    gboost_in += ge <= kRangeSlack;
  }
  const auto n = std::to_string(kRegressionProblems);
  c.add(ols_worst <= kOlsTolerance, "OLS vs normal equations worst " + fmt(ols_worst, 3) + " on " + n + " 50x4 problems");
  c.add(ridge_worst <= kRidgeTolerance, "ridge alpha=" + fmt(kRidgeAlpha, 1) + " vs OLS worst " + fmt(ridge_worst, 3));
  c.add(monotone == kRegressionProblems, "GBoost stage loss nonincreasing " + std::to_string(monotone) + "/" + n);
  c.add(forest_in == kRegressionProblems, "forest within target range " + std::to_string(forest_in) + "/" + n);
  c.add(gboost_in == kRegressionProblems, "GBoost within target range " + std::to_string(gboost_in) + "/" + n +
                                               " (worst excess " + fmt(gboost_worst, 3) + " of the range)");
  return c.out;
}

// ---- 4: statistics ----------------------------------------------------------------

double f_tail_quadrature(double f, double d1, double d2) {
  auto g = [&](double u) {
    const double x = u * u;
    return 2.0 * u * std::pow(x, d1 / 2.0 - 1.0) * std::pow(1.0 + d1 * x / d2, -(d1 + d2) / 2.0);
  };
  using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double inf = std::numeric_limits<double>::infinity();
  return Q::integrate(g, std::sqrt(f), inf, 20, 1e-14) / Q::integrate(g, 0.0, inf, 20, 1e-14);
}

Outcome stats_suite() {
  Clauses c;
  const double r = pearson(std::vector{1.0, 2.0, 3.0, 4.0}, std::vector{1.0, 3.0, 2.0, 4.0});
  c.add(std::abs(r - 0.8) <= kPearsonTolerance, "pearson hand case |r - 0.8| = " + fmt(std::abs(r - 0.8), 3));

  std::mt19937_64 rng(77);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> nn(4, 60);
  double f_worst = 0.0, p_worst = 0.0;
  for (int t = 0; t < kStatTrials; ++t) {
    const int n = nn(rng);
    std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    const double mix = z(rng);
    for (int i = 0; i < n; ++i) {
      x[std::size_t(i)] = z(rng);
      y[std::size_t(i)] = mix * x[std::size_t(i)] + z(rng);
    }
    const auto s = univariate_f(x, y);
    const double direct = s.r * s.r * (n - 2) / (1.0 - s.r * s.r);
    f_worst = std::max(f_worst, std::abs(s.f_score - direct) / std::max(1.0, direct));
    p_worst = std::max(p_worst, std::abs(s.p_value - f_tail_quadrature(s.f_score, 1.0, n - 2.0)));
  }
  c.add(f_worst <= kFTolerance, "F vs direct formula worst rel " + fmt(f_worst, 3) + " on " + std::to_string(kStatTrials));
  c.add(p_worst <= kPTolerance, "p vs F(1,n-2) quadrature worst " + fmt(p_worst, 3));
  return c.out;
}

// ---- 5-7: end to end --------------------------------------------------------------

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) std::cerr << "cbca " << args.back() << " failed (" << code << "): " << err.str();
  return code;
}

const char* const kValidationTimes[] = {"2", "5", "8", "12", "16"};
constexpr std::uint64_t kValidationSeed = 4242;

// synth -> features -> train (all five models) on the default 18-minute ramp, then a
// separately seeded validation recording at 2/5/8/12/16 min validated with OLS and GBoost.
bool end_to_end(const fs::path& root, int threads) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads);
  auto p = [&](const char* name) { return (root / name).string(); };
  std::vector<std::string> vsynth{"--quiet", "--seed", std::to_string(kValidationSeed), "--out", p("vdata"), "synth", "--times"};
  for (const char* t : kValidationTimes) vsynth.push_back(t);
  const bool ok = cli({"--quiet", "--out", p("data"), "synth"}) == 0 &&
                  cli({"--quiet", "--out", p("feat"), "features", p("data")}) == 0 &&
                  cli({"--quiet", "--out", p("train"), "train", p("feat") + "/features.csv", p("data") + "/titration.csv"}) == 0 &&
                  cli(vsynth) == 0 && cli({"--quiet", "--out", p("vfeat"), "features", p("vdata")}) == 0 &&
                  cli({"--quiet", "--out", p("val_ols"), "validate", p("train") + "/model_ols.json",
                       p("vfeat") + "/features.csv", p("vdata") + "/titration.csv"}) == 0 &&
                  cli({"--quiet", "--out", p("val_gboost"), "validate", p("train") + "/model_gboost.json",
                       p("vfeat") + "/features.csv", p("vdata") + "/titration.csv"}) == 0;
  omp_set_num_threads(saved);
  return ok;
}

TempDir& scratch() {
  static TempDir dir("acceptance");
  return dir;
}

// The end-to-end run shared by criteria 5 and 6, made on first use.
const fs::path* shared_run() {
  static std::optional<bool> ok;
  static const fs::path root = scratch() / "e2e";
  if (!ok) ok = end_to_end(root, omp_get_max_threads());
  return *ok ? &root : nullptr;
}

std::map<std::string, double> test_r2(const fs::path& report) {
  std::map<std::string, double> r;
  const auto j = read_json_file(report);
  for (const auto& m : j["models"])
    if (m.contains("r2_test") && m["r2_test"].is_number()) r[m["kind"].get<std::string>()] = m["r2_test"].get<double>();
  return r;
}

Outcome end_to_end_suite() {
  Clauses c;
  c.out.limit_sec = kEndToEndLimitSec;
  const fs::path* root = shared_run();
  if (!root) {
    c.add(false, "pipeline run failed");
    return c.out;
  }
  const auto truth = read_labels_csv(*root / "data" / "labels.csv");
  double lo = 1e300, hi = -1e300;
  for (const auto& l : truth) lo = std::min(lo, l.ox_tot_mg_l), hi = std::max(hi, l.ox_tot_mg_l);
  c.add(std::abs(lo - kRampLow) <= kRampTolerance && std::abs(hi - kRampHigh) <= kRampTolerance,
        "ramp " + fmt(lo, 3) + "-" + fmt(hi, 3) + " mg/L over " + std::to_string(truth.size()) + " timepoints");
  const auto r2 = test_r2(*root / "train" / "eval_report.json");
  for (const char* kind : {"ols", "gboost"}) {
    const double v = r2.count(kind) ? r2.at(kind) : -1.0;
    c.add(v >= kTestR2Min, std::string(kind) + " test R2 " + fmt(v, 6));
  }
  for (const char* kind : {"ols", "gboost"}) {
    const auto rep = read_json_file(*root / ("val_" + std::string(kind)) / "validation_report.json");
    const double v = rep["r2"].is_number() ? rep["r2"].get<double>() : -1.0;
    c.add(v >= kValidationR2Min && rep["points"].size() == std::size(kValidationTimes),
          std::string(kind) + " validation R2 " + fmt(v, 6) + " over " + std::to_string(rep["points"].size()) + " times");
  }
  return c.out;
}

Outcome feature_selection_suite() {
  Clauses c;
  const fs::path* root = shared_run();
  if (!root) {
    c.add(false, "pipeline run failed");
    return c.out;
  }
  const auto stats = read_json_file(*root / "train" / "stats.json");
  const std::string first = stats["ranking"][0];
  c.add(first == "hsv_s", "top F-score feature " + first);

  const fs::path top = scratch() / "top4";
  const int code = cli({"--quiet", "--out", top.string(), "train", (*root / "feat" / "features.csv").string(),
                        (*root / "data" / "titration.csv").string(), "--feature-mode", "top_k", "--k", "4"});
  if (code != 0) {
    c.add(false, "top-4 training failed");
    return c.out;
  }
  const auto all = test_r2(*root / "train" / "eval_report.json"), four = test_r2(top / "eval_report.json");
  for (auto kind : kAllModelKinds) {
    const std::string k(model_kind_name(kind));
    const double loss = 100.0 * ((all.count(k) ? all.at(k) : 0.0) - (four.count(k) ? four.at(k) : -1.0));
    c.add(loss <= kTopKLossMaxPoints, k + " top-4 loss " + fmt(loss, 3) + " pts");
  }
  return c.out;
}

// Relative paths of regular files under root, sorted.
std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism_suite() {
  Clauses c;
  c.out.limit_sec = 2 * kEndToEndLimitSec;
  const fs::path a = scratch() / "det_1thread", b = scratch() / "det_4threads";
  if (!end_to_end(a, 1) || !end_to_end(b, 4)) {
    c.add(false, "pipeline run failed");
    return c.out;
  }
  const auto fa = files_under(a), fb = files_under(b);
  c.add(fa == fb, "same file set (" + std::to_string(fa.size()) + " files)");
  int differ = 0, json_files = 0;
  std::string first_diff;
  for (const auto& rel : fa) {
    if (!fs::exists(b / rel)) continue;
    bool same;
    if (rel.extension() == ".json") {
      ++json_files;
      same = strip_timing(ojson::parse(slurp(a / rel))) == strip_timing(ojson::parse(slurp(b / rel)));
    } else {
      same = slurp(a / rel) == slurp(b / rel);
    }
    if (!same && differ++ == 0) first_diff = rel.string();
  }
  c.add(differ == 0, "1 vs 4 threads: " + std::to_string(differ) + " differing files" +
                         (first_diff.empty() ? "" : " (first " + first_diff + ")") + ", " +
                         std::to_string(json_files) + " JSON compared without *_ms fields");
  return c.out;
}

// ---- 8: titration arithmetic ------------------------------------------------------

Outcome titration_suite() {
  Clauses c;
  TempDir dir("acceptance_titr");
  DatasetSpec spec;
  spec.n_timepoints = 10;
  spec.frames_per_timepoint = 1;
  spec.scene.width = 16;
  spec.scene.height = 12;
  spec.scene.vessel = {2, 2, 12, 8};
  const auto summary = generate_dataset(spec, dir.path());

  const auto records = read_titration_csv(dir / "titration.csv");
  double ox_worst = 0.0;
  for (const auto& rec : records) ox_worst = std::max(ox_worst, std::abs(ox_tot(rec) - spec.slope * rec.t_min));
  c.add(ox_worst <= kLabelTolerance, "ox_tot from CSV vs generator worst " + fmt(ox_worst, 3));

  const auto fit = fit_label_line(titration_points(records));
  c.add(std::abs(fit.r2 - 1.0) <= kFitR2Tolerance, "linear titration fit |r2 - 1| = " + fmt(std::abs(fit.r2 - 1.0), 3));

  const auto truth = read_labels_csv(dir / "labels.csv");
  FeatureSeries series;
  for (const auto& l : truth) series.push_back({l.t_sec, {}, 1});
  const auto labeled = interpolate_labels(fit, series);
  double label_worst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    label_worst = std::max(label_worst, std::abs(labeled[i].label - truth[i].ox_tot_mg_l));
  c.add(label_worst <= kLabelTolerance && truth.size() == summary.labels.size(),
        "interpolated labels vs truth worst " + fmt(label_worst, 3) + " over " + std::to_string(truth.size()) + " rows");
  return c.out;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "kernel oracles", kernel_suite},
      {2, "color spaces", color_suite},
      {3, "regression oracles", regression_suite},
      {4, "statistics", stats_suite},
      {5, "end-to-end synthetic reproduction", end_to_end_suite},
      {6, "feature selection", feature_selection_suite},
      {7, "determinism", determinism_suite},
      {8, "titration arithmetic", titration_suite},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: cbca_acceptance [--criterion N]...\n";
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& cr : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), cr.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt(sec, 3) + " s";
    if (o.limit_sec > 0.0) {
      const bool in_time = sec < o.limit_sec;
      o.pass = o.pass && in_time;
      timing += std::string(in_time ? " < " : " EXCEEDS ") + fmt(o.limit_sec, 3) + " s";
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << cr.id << " (" << cr.title << "): " << o.detail
              << " [" << timing << "]" << std::endl;
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
