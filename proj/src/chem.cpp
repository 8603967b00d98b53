#include "cbca/chem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cbca/csv.hpp"
#include "cbca/error.hpp"

namespace cbca {
namespace {

// 1 meq of oxidant liberates iodine titrated as 24 mg of total oxidant.
constexpr double kMgPerMeq = 24.0;

void validate(const TitrationRecord& r) {
  if (!(r.v_sample_ml > 0.0)) throw InvalidArgument("titration: v_sample_ml must be > 0");
  if (!(r.normality > 0.0)) throw InvalidArgument("titration: normality must be > 0");
  if (!(r.v_titrant_ml >= 0.0)) throw InvalidArgument("titration: v_titrant_ml must be >= 0");
  if (!std::isfinite(r.v_sample_ml + r.normality + r.v_titrant_ml + r.t_min))
    throw InvalidArgument("titration: non-finite field");
}

std::vector<LabeledSample> label_rows(const FeatureSeries& series, auto&& label_of) {
  std::vector<LabeledSample> out;
  out.reserve(series.size());
  for (const auto& row : series) out.push_back({row.t_sec, row.features, std::max(0.0, label_of(row.t_sec / 60.0))});
  return out;
}

}  // namespace

double ox_tot(const TitrationRecord& rec) {
  validate(rec);
  return rec.v_titrant_ml * rec.normality * kMgPerMeq / rec.v_sample_ml;
}

ReplicateStats replicate_stats(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("replicate_stats: no values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

LineFit fit_label_line(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw InvalidArgument("fit_label_line: need at least 2 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) mx += x, my += y;
  mx /= n, my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_label_line: all times are identical");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - (fit.slope * x + fit.intercept);
    ss_res += e * e;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

std::vector<std::pair<double, double>> titration_points(const std::vector<TitrationRecord>& records) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(records.size());
  for (const auto& r : records) pts.emplace_back(r.t_min, ox_tot(r));
  return pts;
}

std::map<double, ReplicateStats> replicate_table(const std::vector<TitrationRecord>& records) {
  std::map<double, std::vector<double>> by_time;
  for (const auto& r : records) by_time[r.t_min].push_back(ox_tot(r));
  std::map<double, ReplicateStats> out;
  for (const auto& [t, vals] : by_time) out[t] = replicate_stats(vals);
  return out;
}

std::vector<LabeledSample> interpolate_labels(const LineFit& fit, const FeatureSeries& series) {
  if (!std::isfinite(fit.slope) || !std::isfinite(fit.intercept)) throw InvalidArgument("interpolate_labels: bad fit");
  return label_rows(series, [&](double t_min) { return fit.slope * t_min + fit.intercept; });
}

std::vector<LabeledSample> interpolate_labels_piecewise(const std::map<double, ReplicateStats>& table,
                                                        const FeatureSeries& series) {
  if (table.size() < 2) throw InvalidArgument("piecewise labels need at least two titration times");
  std::vector<std::pair<double, double>> knots;
  for (const auto& [t, s] : table) knots.emplace_back(t, s.mean);
  return label_rows(series, [&](double t_min) {
    auto hi = std::upper_bound(knots.begin(), knots.end(), t_min,
                               [](double t, const auto& k) { return t < k.first; });
    if (hi == knots.begin()) ++hi;
    if (hi == knots.end()) --hi;
    const auto lo = hi - 1;
    const double f = (t_min - lo->first) / (hi->first - lo->first);
    return lo->second + f * (hi->second - lo->second);
  });
}

std::vector<TitrationRecord> read_titration_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require_header(t, {"t_min", "v_titrant_ml", "normality", "v_sample_ml", "replicate_id"}, path);
  std::vector<TitrationRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    const std::size_t line = r + 2;
    TitrationRecord rec{parse_double(f[0], path, line), parse_double(f[1], path, line),
                        parse_double(f[2], path, line), parse_double(f[3], path, line), f[4]};
    try {
      validate(rec);
    } catch (const InvalidArgument& e) {
      throw InputError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw InputError(path.string() + ": no titration records");
  return out;
}

void write_titration_csv(const std::vector<TitrationRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "t_min,v_titrant_ml,normality,v_sample_ml,replicate_id\n";
  for (const auto& r : records)
    out << format_fixed(r.t_min) << ',' << format_fixed(r.v_titrant_ml, 12) << ',' << format_fixed(r.normality)
        << ',' << format_fixed(r.v_sample_ml) << ',' << r.replicate_id << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

std::vector<OxLabel> read_labels_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require_header(t, {"t_sec", "ox_tot_mg_l"}, path);
  std::vector<OxLabel> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const OxLabel l{parse_double(t.rows[r][0], path, r + 2), parse_double(t.rows[r][1], path, r + 2)};
    if (l.ox_tot_mg_l < 0.0) throw InputError(path.string() + ":" + std::to_string(r + 2) + ": negative label");
    out.push_back(l);
  }
  return out;
}

void write_labels_csv(const std::vector<OxLabel>& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "t_sec,ox_tot_mg_l\n";
  for (const auto& l : labels) out << format_fixed(l.t_sec) << ',' << format_fixed(l.ox_tot_mg_l, 12) << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace cbca
