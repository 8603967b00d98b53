#include <algorithm>
#include <array>
#include <cmath>

#include "cbca/color_space.hpp"
#include "cbca/kernels.hpp"
#include "kernels_detail.hpp"

namespace cbca::reference {

Mask hsv_range_mask(const Image& hsv, const HsvBounds& bounds) {
  require_space(hsv, ColorSpace::Hsv, "hsv_range_mask");
  bounds.validate();
  Mask out(hsv.width(), hsv.height());
  for (int y = 0; y < hsv.height(); ++y)
    for (int x = 0; x < hsv.width(); ++x) {
      const Pixel8 p = hsv.at(x, y);
      bool in = true;
      for (int ch = 0; ch < 3; ++ch) in = in && bounds.lo[ch] <= p[ch] && p[ch] <= bounds.hi[ch];
      out.set(x, y, in);
    }
  return out;
}

Mask near_black_mask(const Image& rgb, Pixel8 lo, Pixel8 hi) {
  require_space(rgb, ColorSpace::Rgb, "near_black_mask");
  Mask out(rgb.width(), rgb.height());
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x) {
      const Pixel8 p = rgb.at(x, y);
      bool in = true;
      for (int ch = 0; ch < 3; ++ch) in = in && lo[ch] <= p[ch] && p[ch] <= hi[ch];
      out.set(x, y, in);
    }
  return out;
}

RgbHistogram rgb_histogram(const Image& rgb, const Mask& keep, int bins) {
  require_same_dims(rgb, keep, "rgb_histogram");
  RgbHistogram out;
  out.bins = bins;
  for (auto& c : out.counts) c.assign(static_cast<std::size_t>(bins), 0);
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x)
      if (keep.at(x, y))
        for (int ch = 0; ch < 3; ++ch) ++out.counts[ch][rgb.at(x, y)[ch] * bins / 256];
  return out;
}

Image bilateral_filter(const Image& rgb, int diameter, double sigma_color, double sigma_space) {
  require_space(rgb, ColorSpace::Rgb, "bilateral_filter");
  const int r = diameter / 2;
  const int w = rgb.width(), h = rgb.height();
  Image out(w, h, ColorSpace::Rgb);
  auto gc = [&](int d) { return std::exp(-static_cast<double>(d * d) / (2.0 * sigma_color * sigma_color)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Pixel8 c = rgb.at(x, y);
      double sw = 0.0;
      double s[3] = {0.0, 0.0, 0.0};
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx * dx + dy * dy > r * r) continue;
          const Pixel8 q = rgb.at(reflect101(x + dx, w), reflect101(y + dy, h));
          const double ws = std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * sigma_space * sigma_space));
          const double wgt = ws * (gc(std::abs(q.c0 - c.c0)) * gc(std::abs(q.c1 - c.c1)) * gc(std::abs(q.c2 - c.c2)));
          sw += wgt;
          for (int ch = 0; ch < 3; ++ch) s[ch] += wgt * q[ch];
        }
      }
      out.at(x, y) = {round_to_u8(s[0] / sw), round_to_u8(s[1] / sw), round_to_u8(s[2] / sw)};
    }
  }
  return out;
}

Mask adaptive_threshold_gaussian(const Image& gray, int block_size, double c) {
  require_space(gray, ColorSpace::Gray, "adaptive_threshold_gaussian");
  const auto k = gaussian_kernel_1d(block_size);
  const int r = block_size / 2;
  Mask out(gray.width(), gray.height());
  for (int y = 0; y < gray.height(); ++y)
    for (int x = 0; x < gray.width(); ++x) {
      double mean = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          mean += k[dy + r] * k[dx + r] *
                  gray.at(reflect101(x + dx, gray.width()), reflect101(y + dy, gray.height())).c0;
      out.set(x, y, gray.at(x, y).c0 > mean - c);
    }
  return out;
}

Image clahe_lightness(const Image& rgb, double clip_limit, int tiles_x, int tiles_y) {
  require_space(rgb, ColorSpace::Rgb, "clahe_lightness");
  const int w = rgb.width(), h = rgb.height();
  const int tw = (w + tiles_x - 1) / tiles_x;
  const int th = (h + tiles_y - 1) / tiles_y;
  const double area = static_cast<double>(tw) * th;

  auto level_at = [&](int x, int y) {
    return detail::lightness_level(rgb_to_lab_f(rgb.at(std::min(x, w - 1), std::min(y, h - 1))));
  };

  // LUT value of `v` in tile (tx, ty), rebuilt from scratch on every call.
  auto tile_lut = [&](int tx, int ty, int v) {
    std::array<double, 256> hist{};
    for (int y = ty * th; y < (ty + 1) * th; ++y)
      for (int x = tx * tw; x < (tx + 1) * tw; ++x) hist[level_at(x, y)] += 1.0;
    const double clip = clip_limit * area / 256.0;
    double excess = 0.0;
    for (auto& c : hist)
      if (c > clip) {
        excess += c - clip;
        c = clip;
      }
    double below = 0.0;
    for (int u = 0; u < v; ++u) below += hist[u] + excess / 256.0;
    return (255.0 * below + v * (hist[v] + excess / 256.0)) / area;
  };

  // Cache per tile so the reference stays usable on 16x16 inputs.
  std::vector<std::array<double, 256>> cache(static_cast<std::size_t>(tiles_x * tiles_y));
  std::vector<std::array<bool, 256>> have(cache.size());
  for (auto& hv : have) hv.fill(false);
  auto lut = [&](int tx, int ty, int v) {
    const std::size_t t = static_cast<std::size_t>(ty) * tiles_x + tx;
    if (!have[t][v]) {
      cache[t][v] = tile_lut(tx, ty, v);
      have[t][v] = true;
    }
    return cache[t][v];
  };

  Image out(w, h, ColorSpace::Gray);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int v = level_at(x, y);
      const double fx = (x + 0.5) / tw - 0.5, fy = (y + 0.5) / th - 0.5;
      const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
      const double ax = fx - x0, ay = fy - y0;
      const int tx0 = std::clamp(x0, 0, tiles_x - 1), tx1 = std::clamp(x0 + 1, 0, tiles_x - 1);
      const int ty0 = std::clamp(y0, 0, tiles_y - 1), ty1 = std::clamp(y0 + 1, 0, tiles_y - 1);
      const double top = (1.0 - ax) * lut(tx0, ty0, v) + ax * lut(tx1, ty0, v);
      const double bot = (1.0 - ax) * lut(tx0, ty1, v) + ax * lut(tx1, ty1, v);
      out.at(x, y) = {round_to_u8((1.0 - ay) * top + ay * bot), 0, 0};
    }
  }
  return out;
}

Image clahe_l_channel(const Image& rgb, double clip_limit, int tiles_x, int tiles_y) {
  const Image levels = clahe_lightness(rgb, clip_limit, tiles_x, tiles_y);
  Image out(rgb.width(), rgb.height(), ColorSpace::Rgb);
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x) {
      const LabF lab = rgb_to_lab_f(rgb.at(x, y));
      out.at(x, y) = detail::relight(rgb.at(x, y), lab, detail::lightness_level(lab), levels.at(x, y).c0);
    }
  return out;
}

}  // namespace cbca::reference
