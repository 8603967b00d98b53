#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cbca/features.hpp"

namespace cbca {

// Sample Pearson r. Throws UndefinedStatistic when either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// P(F > f) for F ~ F(d1, d2), via the regularized incomplete beta function.
double f_upper_tail(double f, double d1, double d2);

struct FeatureScore {
  std::string feature;
  double r = 0.0;
  double f_score = 0.0;  // r^2 (n-2) / (1-r^2); +inf when |r| = 1
  double p_value = 1.0;
  double univariate_r2 = 0.0;
};

// Univariate regression of y on x. Needs n >= 3 and nonconstant x and y.
FeatureScore univariate_f(std::span<const double> x, std::span<const double> y, std::string name = {});

// Label name used for the target column in every table.
inline constexpr const char* kTargetName = "ox_tot_mg_l";

// Pearson r over the 9 features and the label. Entries involving a zero-variance
// column are NaN and the column is flagged.
struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;
  std::vector<bool> undefined;
};

CorrelationMatrix correlation_matrix(const std::vector<LabeledSample>& samples);

// Scores for all 9 features in canonical order; zero-variance features score
// F = 0, p = 1 so selection still completes on degenerate data.
std::vector<FeatureScore> score_features(const std::vector<LabeledSample>& samples);

// Feature names by descending F, ties in canonical order; the first k.
std::vector<std::string> select_k_best(const std::vector<LabeledSample>& samples, int k = 4);

// The four-feature subset the paper carries through its reduced-feature models.
inline const std::vector<std::string> kPaperSubset = {"rgb_b", "hsv_s", "lab_a", "lab_b"};

void write_correlation_csv(const CorrelationMatrix& m, const std::filesystem::path& path);
void write_scores_csv(const std::vector<FeatureScore>& scores, const std::filesystem::path& path);

}  // namespace cbca
