#include "cbca/features.hpp"

#include <cstdio>
#include <fstream>

#include "cbca/csv.hpp"
#include "cbca/error.hpp"

namespace cbca {
namespace {

std::vector<std::string> feature_header() {
  std::vector<std::string> h{"t_sec"};
  for (auto n : kFeatureNames) h.emplace_back(n);
  h.emplace_back("kept_pixels");
  return h;
}

}  // namespace

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (kFeatureNames[i] == name) return i;
  return std::nullopt;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

void write_features_csv(const FeatureSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  const auto header = feature_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : series) {
    out << format_fixed(row.t_sec);
    for (double f : row.features) out << ',' << format_fixed(f);
    out << ',' << row.kept_pixels << '\n';
  }
  if (!out) throw InputError("write failed: " + path.string());
}

FeatureSeries read_features_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require_header(t, feature_header(), path);
  FeatureSeries series;
  series.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    const std::size_t line = r + 2;
    FeatureRow row;
    row.t_sec = parse_double(f[0], path, line);
    for (std::size_t i = 0; i < kNumFeatures; ++i) row.features[i] = parse_double(f[i + 1], path, line);
    const double kept = parse_double(f.back(), path, line);
    if (kept < 0 || kept != static_cast<double>(static_cast<std::uint64_t>(kept)))
      throw InputError(path.string() + ":" + std::to_string(line) + ": kept_pixels must be a count");
    row.kept_pixels = static_cast<std::uint64_t>(kept);
    if (!series.empty() && !(row.t_sec > series.back().t_sec))
      throw InputError(path.string() + ":" + std::to_string(line) + ": t_sec must be strictly increasing");
    series.push_back(row);
  }
  return series;
}

}  // namespace cbca
