#include "cbca/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "cbca/error.hpp"

namespace cbca {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

bool has_variance(std::span<const double> v) {
  return std::any_of(v.begin(), v.end(), [&](double a) { return a != v.front(); });
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_fixed(v, 12);
}

std::vector<double> column(const std::vector<LabeledSample>& s, std::size_t j) {
  std::vector<double> c(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) c[i] = j < kNumFeatures ? s[i].features[j] : s[i].label;
  return c;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
  if (x.size() < 2) throw InvalidArgument("pearson: need at least 2 values");
  if (!has_variance(x) || !has_variance(y)) throw UndefinedStatistic("pearson: zero-variance input");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double f_upper_tail(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InvalidArgument("f_upper_tail: degrees of freedom must be > 0");
  if (std::isnan(f)) throw InvalidArgument("f_upper_tail: NaN statistic");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return boost::math::ibeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

FeatureScore univariate_f(std::span<const double> x, std::span<const double> y, std::string name) {
  if (x.size() < 3) throw InvalidArgument("univariate_f: need n >= 3");
  FeatureScore s;
  s.feature = std::move(name);
  s.r = pearson(x, y);
  const double r2 = s.r * s.r;
  const double dof = double(x.size()) - 2.0;
  s.univariate_r2 = r2;
  if (r2 >= 1.0) {
    s.f_score = kInf;
    s.p_value = 0.0;
  } else {
    s.f_score = r2 * dof / (1.0 - r2);
    s.p_value = f_upper_tail(s.f_score, 1.0, dof);
  }
  return s;
}

CorrelationMatrix correlation_matrix(const std::vector<LabeledSample>& samples) {
  if (samples.size() < 2) throw InvalidArgument("correlation_matrix: need at least 2 samples");
  constexpr std::size_t m = kNumFeatures + 1;
  CorrelationMatrix out;
  for (auto n : kFeatureNames) out.labels.emplace_back(n);
  out.labels.emplace_back(kTargetName);
  std::vector<std::vector<double>> cols(m);
  out.undefined.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    cols[j] = column(samples, j);
    out.undefined[j] = !has_variance(cols[j]);
  }
  out.values.assign(m, std::vector<double>(m, kNaN));
  for (std::size_t i = 0; i < m; ++i) {
    if (out.undefined[i]) continue;
    out.values[i][i] = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      if (out.undefined[j]) continue;
      out.values[i][j] = out.values[j][i] = pearson(cols[i], cols[j]);
    }
  }
  return out;
}

std::vector<FeatureScore> score_features(const std::vector<LabeledSample>& samples) {
  if (samples.size() < 3) throw InvalidArgument("score_features: need at least 3 samples");
  const auto y = column(samples, kNumFeatures);
  const bool y_ok = has_variance(y);
  std::vector<FeatureScore> out;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    const auto x = column(samples, j);
    if (!y_ok || !has_variance(x)) {
      out.push_back({std::string(kFeatureNames[j]), kNaN, 0.0, 1.0, 0.0});
      continue;
    }
    out.push_back(univariate_f(x, y, std::string(kFeatureNames[j])));
  }
  return out;
}

std::vector<std::string> select_k_best(const std::vector<LabeledSample>& samples, int k) {
  if (k < 1 || k > int(kNumFeatures)) throw InvalidArgument("select_k_best: k must be in [1, 9]");
  const auto scores = score_features(samples);
  std::vector<std::size_t> order(kNumFeatures);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].f_score > scores[b].f_score; });
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) out.push_back(scores[order[i]].feature);
  return out;
}

void write_correlation_csv(const CorrelationMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "feature";
  for (const auto& l : m.labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out << m.labels[i];
    for (double v : m.values[i]) out << ',' << fmt(v);
    out << '\n';
  }
}

void write_scores_csv(const std::vector<FeatureScore>& scores, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "feature,pearson_r,f_score,p_value,univariate_r2\n";
  for (const auto& s : scores)
    out << s.feature << ',' << fmt(s.r) << ',' << fmt(s.f_score) << ',' << fmt(s.p_value) << ','
        << fmt(s.univariate_r2) << '\n';
}

}  // namespace cbca
