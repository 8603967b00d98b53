#include "cbca/roi.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "cbca/color_space.hpp"

namespace cbca {

int otsu_threshold(const std::array<std::uint64_t, 256>& hist) {
  double total = 0.0, sum_all = 0.0;
  for (int v = 0; v < 256; ++v) {
    total += static_cast<double>(hist[v]);
    sum_all += static_cast<double>(v) * static_cast<double>(hist[v]);
  }
  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += static_cast<double>(hist[t]);
    sum0 += static_cast<double>(t) * static_cast<double>(hist[t]);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  if (best < 0.0) {
    // Single populated level: nothing lies strictly above it.
    for (int v = 255; v >= 0; --v)
      if (hist[v] > 0) return v;
  }
  return best_t;
}

RoiBox detect_roi(const Image& rgb, const RoiConfig& config) {
  require_space(rgb, ColorSpace::Rgb, "detect_roi");
  const int w = rgb.width(), h = rgb.height();
  if (config.mode == RoiMode::Fixed) {
    if (config.box.w == 0 || config.box.h == 0) return {0, 0, w, h};
    if (!config.box.fits(w, h))
      throw InvalidArgument("detect_roi: fixed box does not fit a " + std::to_string(w) + "x" +
                            std::to_string(h) + " frame");
    return config.box;
  }

  const Image hsv = to_hsv(rgb);
  std::array<std::uint64_t, 256> hist{};
  for (const auto& p : hsv.pixels()) ++hist[p.c1];
  const int t = otsu_threshold(hist);

  const std::size_t n = hsv.size();
  std::vector<std::uint8_t> on(n);
  for (std::size_t i = 0; i < n; ++i) on[i] = hsv.pixels()[i].c1 > t ? 1 : 0;

  std::vector<int> label(n, -1);
  std::vector<std::size_t> stack;
  RoiBox best{};
  std::size_t best_area = 0;
  int next = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!on[seed] || label[seed] >= 0) continue;
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    std::size_t area = 0;
    stack.assign(1, seed);
    label[seed] = next;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
      ++area;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny[k]) * w + nx[k];
        if (on[j] && label[j] < 0) {
          label[j] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
    if (area > best_area) {
      best_area = area;
      best = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    }
  }

  if (best_area == 0 || static_cast<double>(best_area) < config.min_area_frac * static_cast<double>(n))
    throw NoRoiFound("detect_roi: no saturated component covers " + std::to_string(config.min_area_frac) +
                     " of the frame");
  return best;
}

Image crop(const Image& img, const RoiBox& box) {
  if (!box.fits(img.width(), img.height()))
    throw InvalidArgument("crop: box (" + std::to_string(box.x) + "," + std::to_string(box.y) + "," +
                          std::to_string(box.w) + "," + std::to_string(box.h) + ") outside image");
  Image out(box.w, box.h, img.space());
  for (int y = 0; y < box.h; ++y) {
    const auto src = img.row(box.y + y).subspan(static_cast<std::size_t>(box.x), static_cast<std::size_t>(box.w));
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

}  // namespace cbca
