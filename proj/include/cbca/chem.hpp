#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cbca/features.hpp"

namespace cbca {

struct TitrationRecord {
  double t_min = 0.0;
  double v_titrant_ml = 0.0;
  double normality = 0.0;  // eq/L
  double v_sample_ml = 0.0;
  std::string replicate_id;
};

struct OxLabel {
  double t_sec = 0.0;
  double ox_tot_mg_l = 0.0;
};

// Concentration against time in minutes.
struct LineFit {
  double slope = 0.0;      // mg/L per minute
  double intercept = 0.0;  // mg/L
  double r2 = 0.0;
};

struct ReplicateStats {
  double mean = 0.0;
  double sd = 0.0;  // n-1 denominator; 0 for a single value
};

// mg/L from an iodometric back titration: V_titrant * N * 24 / V_sample.
double ox_tot(const TitrationRecord& rec);

ReplicateStats replicate_stats(const std::vector<double>& values);

// Ordinary least squares of concentration on t_min. r2 = 1 when the fit is exact.
LineFit fit_label_line(const std::vector<std::pair<double, double>>& points);

// (t_min, ox_tot) for every record, in input order.
std::vector<std::pair<double, double>> titration_points(const std::vector<TitrationRecord>& records);

// Replicate statistics keyed by t_min.
std::map<double, ReplicateStats> replicate_table(const std::vector<TitrationRecord>& records);

// Label = max(0, slope * t_sec / 60 + intercept) for every row.
std::vector<LabeledSample> interpolate_labels(const LineFit& fit, const FeatureSeries& series);

// Piecewise-linear alternative through the replicate means (sorted by time), extended
// linearly past either end, clamped at 0. Needs at least two distinct times.
std::vector<LabeledSample> interpolate_labels_piecewise(const std::map<double, ReplicateStats>& table,
                                                        const FeatureSeries& series);

// Titration CSV: t_min,v_titrant_ml,normality,v_sample_ml,replicate_id
std::vector<TitrationRecord> read_titration_csv(const std::filesystem::path& path);
void write_titration_csv(const std::vector<TitrationRecord>& records, const std::filesystem::path& path);

// Labels CSV: t_sec,ox_tot_mg_l
std::vector<OxLabel> read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::vector<OxLabel>& labels, const std::filesystem::path& path);

}  // namespace cbca
