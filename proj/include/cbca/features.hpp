#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cbca {

inline constexpr std::size_t kNumFeatures = 9;

// Canonical feature order; every table, ranking tie-break and CSV column follows it.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "rgb_r", "rgb_g", "rgb_b", "hsv_h", "hsv_s", "hsv_v", "lab_l", "lab_a", "lab_b"};

using FeatureVector = std::array<double, kNumFeatures>;

// Index of a canonical feature name, or nullopt.
std::optional<std::size_t> feature_index(std::string_view name);

struct FeatureRow {
  double t_sec = 0.0;
  FeatureVector features{};
  std::uint64_t kept_pixels = 0;
};

// Rows are strictly increasing in t_sec.
using FeatureSeries = std::vector<FeatureRow>;

struct LabeledSample {
  double t_sec = 0.0;
  FeatureVector features{};
  double label = 0.0;  // [Ox]_tot, mg/L
};

// Header: t_sec,<9 features>,kept_pixels; reals printed with 6 decimals.
void write_features_csv(const FeatureSeries& series, const std::filesystem::path& path);
FeatureSeries read_features_csv(const std::filesystem::path& path);

// Fixed-point decimal text with `decimals` digits, "-0.000000" normalized to "0.000000".
std::string format_fixed(double v, int decimals = 6);

}  // namespace cbca
