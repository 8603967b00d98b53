#pragma once

#include <cmath>
#include <vector>

#include "cbca/color_space.hpp"

namespace cbca::detail {

inline int lightness_level(const LabF& lab) { return round_to_u8(lab.l * 255.0 / 100.0); }

// Rebuild an RGB pixel after its quantized lightness moved from old_level to new_level.
// Unchanged levels return the source pixel untouched.
inline Pixel8 relight(Pixel8 src, const LabF& lab, int old_level, int new_level) {
  if (old_level == new_level) return src;
  LabF out = lab;
  out.l = std::max(0.0, lab.l + (new_level - old_level) * 100.0 / 255.0);
  return lab_f_to_rgb(out);
}

inline std::vector<double> color_weights(double sigma_color) {
  std::vector<double> w(256);
  for (int d = 0; d < 256; ++d) w[d] = std::exp(-static_cast<double>(d * d) / (2.0 * sigma_color * sigma_color));
  return w;
}

inline double space_weight(int dx, int dy, double sigma_space) {
  return std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * sigma_space * sigma_space));
}

}  // namespace cbca::detail
