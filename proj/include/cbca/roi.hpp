#pragma once

#include <array>
#include <cstdint>

#include "cbca/image.hpp"

namespace cbca {

struct RoiBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool fits(int width, int height) const {
    return x >= 0 && y >= 0 && w >= 1 && h >= 1 && x + w <= width && y + h <= height;
  }
  friend bool operator==(const RoiBox&, const RoiBox&) = default;
};

enum class RoiMode { Fixed, Auto };

struct RoiConfig {
  RoiMode mode = RoiMode::Fixed;
  // In fixed mode a box with w == 0 or h == 0 selects the whole frame.
  RoiBox box{};
  double min_area_frac = 0.05;

  friend bool operator==(const RoiConfig&, const RoiConfig&) = default;
};

// Otsu threshold over a 256-bin histogram: the level t maximizing between-class
// variance of {<= t} vs {> t}. Lowest t wins ties.
int otsu_threshold(const std::array<std::uint64_t, 256>& hist);

// Fixed mode returns the configured box (or the full frame). Auto mode returns the
// bounding box of the largest 4-connected component of {S > otsu(S)} whose area is
// at least min_area_frac of the frame; throws NoRoiFound otherwise.
RoiBox detect_roi(const Image& rgb, const RoiConfig& config);

Image crop(const Image& img, const RoiBox& box);

}  // namespace cbca
