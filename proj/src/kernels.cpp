#include "cbca/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cbca/color_space.hpp"
#include "kernels_detail.hpp"

namespace cbca {

void HsvBounds::validate() const {
  if (hi.c0 > 180 || lo.c0 > 180) throw InvalidArgument("HSV hue bounds must lie in [0,180]");
  for (int ch = 0; ch < 3; ++ch)
    if (lo[ch] > hi[ch]) throw InvalidArgument("HSV bounds: lo > hi on channel " + std::to_string(ch));
}

std::vector<double> gaussian_kernel_1d(int size) {
  if (size < 1 || size % 2 == 0) throw InvalidArgument("Gaussian kernel size must be odd and >= 1");
  const double sigma = 0.3 * ((size - 1) * 0.5 - 1.0) + 0.8;
  const int r = size / 2;
  std::vector<double> k(size);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    k[i] = std::exp(-static_cast<double>((i - r) * (i - r)) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

namespace kernels {
namespace {

std::vector<int> reflected_indices(int n, int pad) {
  std::vector<int> idx(static_cast<std::size_t>(n + 2 * pad));
  for (int i = -pad; i < n + pad; ++i) idx[i + pad] = reflect101(i, n);
  return idx;
}

}  // namespace

Mask hsv_range_mask(const Image& hsv, const HsvBounds& bounds) {
  require_space(hsv, ColorSpace::Hsv, "hsv_range_mask");
  bounds.validate();
  Mask out(hsv.width(), hsv.height());
  const auto px = hsv.pixels();
  const long n = static_cast<long>(px.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out.set(static_cast<std::size_t>(i), bounds.contains(px[i]));
  return out;
}

HsvBounds dynamic_hsv_bounds(const Image& hsv, double clip_lo, double clip_hi) {
  require_space(hsv, ColorSpace::Hsv, "dynamic_hsv_bounds");
  if (hsv.empty()) throw InvalidArgument("dynamic_hsv_bounds: empty image");
  if (!(clip_lo >= 0.0 && clip_lo < clip_hi && clip_hi <= 1.0))
    throw InvalidArgument("dynamic_hsv_bounds: need 0 <= clip_lo < clip_hi <= 1");

  std::array<std::array<std::uint64_t, 256>, 3> hist{};
  for (const auto& p : hsv.pixels())
    for (int ch = 0; ch < 3; ++ch) ++hist[ch][p[ch]];

  const double n = static_cast<double>(hsv.size());
  HsvBounds b;
  for (int ch = 0; ch < 3; ++ch) {
    std::uint64_t below = 0;
    int lo = 255;
    for (int v = 0; v < 256; ++v) {
      below += hist[ch][v];
      if (static_cast<double>(below) > clip_lo * n) { lo = v; break; }
    }
    std::uint64_t above = 0;
    int hi = 0;
    for (int v = 255; v >= 0; --v) {
      above += hist[ch][v];
      if (static_cast<double>(above) > (1.0 - clip_hi) * n) { hi = v; break; }
    }
    b.lo[ch] = static_cast<std::uint8_t>(lo);
    b.hi[ch] = static_cast<std::uint8_t>(std::max(lo, hi));
  }
  return b;
}

namespace {

void check_clahe_args(const Image& rgb, double clip_limit, int tiles_x, int tiles_y) {
  require_space(rgb, ColorSpace::Rgb, "clahe");
  if (!(clip_limit > 0.0)) throw InvalidArgument("clahe: clip_limit must be > 0");
  if (tiles_x < 1 || tiles_y < 1) throw InvalidArgument("clahe: tile grid must be >= 1x1");
}

// Equalized level for every pixel of a w x h level plane.
std::vector<std::uint8_t> equalize_levels(const std::vector<std::uint8_t>& level, int w, int h,
                                          double clip_limit, int tiles_x, int tiles_y) {
  const int tw = (w + tiles_x - 1) / tiles_x;
  const int th = (h + tiles_y - 1) / tiles_y;
  const double area = static_cast<double>(tw) * th;

  const int n_tiles = tiles_x * tiles_y;
  std::vector<std::array<double, 256>> luts(static_cast<std::size_t>(n_tiles));
  const double clip = clip_limit * area / 256.0;
#pragma omp parallel for schedule(static)
  for (int t = 0; t < n_tiles; ++t) {
    const int tx = t % tiles_x, ty = t / tiles_x;
    std::array<double, 256> hist{};
    for (int y = ty * th; y < (ty + 1) * th; ++y) {
      const int sy = std::min(y, h - 1);
      for (int x = tx * tw; x < (tx + 1) * tw; ++x) {
        const int sx = std::min(x, w - 1);
        hist[level[static_cast<std::size_t>(sy) * w + sx]] += 1.0;
      }
    }
    double excess = 0.0;
    for (auto& c : hist) {
      if (c > clip) {
        excess += c - clip;
        c = clip;
      }
    }
    const double spread = excess / 256.0;
    double below = 0.0;
    auto& lut = luts[t];
    for (int v = 0; v < 256; ++v) {
      const double c = hist[v] + spread;
      lut[v] = (255.0 * below + v * c) / area;
      below += c;
    }
  }

  std::vector<std::uint8_t> mapped(level.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const double fy = (y + 0.5) / th - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const double ay = fy - y0;
    const int ty0 = std::clamp(y0, 0, tiles_y - 1), ty1 = std::clamp(y0 + 1, 0, tiles_y - 1);
    for (int x = 0; x < w; ++x) {
      const double fx = (x + 0.5) / tw - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const double ax = fx - x0;
      const int tx0 = std::clamp(x0, 0, tiles_x - 1), tx1 = std::clamp(x0 + 1, 0, tiles_x - 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const int v = level[i];
      const double top = (1.0 - ax) * luts[ty0 * tiles_x + tx0][v] + ax * luts[ty0 * tiles_x + tx1][v];
      const double bot = (1.0 - ax) * luts[ty1 * tiles_x + tx0][v] + ax * luts[ty1 * tiles_x + tx1][v];
      mapped[i] = round_to_u8((1.0 - ay) * top + ay * bot);
    }
  }
  return mapped;
}

}  // namespace

Image clahe_lightness(const Image& rgb, double clip_limit, int tiles_x, int tiles_y) {
  check_clahe_args(rgb, clip_limit, tiles_x, tiles_y);
  const auto src = rgb.pixels();
  const long n = static_cast<long>(rgb.size());
  std::vector<std::uint8_t> level(rgb.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) level[i] = static_cast<std::uint8_t>(detail::lightness_level(rgb_to_lab_f(src[i])));
  const auto mapped = equalize_levels(level, rgb.width(), rgb.height(), clip_limit, tiles_x, tiles_y);
  Image out(rgb.width(), rgb.height(), ColorSpace::Gray);
  auto dst = out.pixels();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) dst[i] = {mapped[i], 0, 0};
  return out;
}

Image clahe_l_channel(const Image& rgb, double clip_limit, int tiles_x, int tiles_y) {
  check_clahe_args(rgb, clip_limit, tiles_x, tiles_y);
  const auto src = rgb.pixels();
  const long n = static_cast<long>(rgb.size());
  std::vector<LabF> lab(rgb.size());
  std::vector<std::uint8_t> level(rgb.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    lab[i] = rgb_to_lab_f(src[i]);
    level[i] = static_cast<std::uint8_t>(detail::lightness_level(lab[i]));
  }
  const auto mapped = equalize_levels(level, rgb.width(), rgb.height(), clip_limit, tiles_x, tiles_y);
  Image out(rgb.width(), rgb.height(), ColorSpace::Rgb);
  auto dst = out.pixels();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) dst[i] = detail::relight(src[i], lab[i], level[i], mapped[i]);
  return out;
}

Image bilateral_filter(const Image& rgb, int diameter, double sigma_color, double sigma_space) {
  require_space(rgb, ColorSpace::Rgb, "bilateral_filter");
  if (diameter < 1 || diameter % 2 == 0) throw InvalidArgument("bilateral: diameter must be odd and >= 1");
  if (!(sigma_color > 0.0) || !(sigma_space > 0.0)) throw InvalidArgument("bilateral: sigmas must be > 0");

  const int r = diameter / 2;
  const int w = rgb.width(), h = rgb.height();
  struct Tap {
    int dx, dy;
    double weight;
  };
  std::vector<Tap> taps;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r * r) taps.push_back({dx, dy, detail::space_weight(dx, dy, sigma_space)});
  const auto cw = detail::color_weights(sigma_color);
  const auto xs = reflected_indices(w, r);
  const auto ys = reflected_indices(h, r);

  Image out(w, h, ColorSpace::Rgb);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Pixel8 c = rgb.at(x, y);
      double sw = 0.0, s0 = 0.0, s1 = 0.0, s2 = 0.0;
      for (const auto& t : taps) {
        const Pixel8 q = rgb.at(xs[x + t.dx + r], ys[y + t.dy + r]);
        const double wgt =
            t.weight * (cw[std::abs(q.c0 - c.c0)] * cw[std::abs(q.c1 - c.c1)] * cw[std::abs(q.c2 - c.c2)]);
        sw += wgt;
        s0 += wgt * q.c0;
        s1 += wgt * q.c1;
        s2 += wgt * q.c2;
      }
      out.at(x, y) = {round_to_u8(s0 / sw), round_to_u8(s1 / sw), round_to_u8(s2 / sw)};
    }
  }
  return out;
}

Mask near_black_mask(const Image& rgb, Pixel8 lo, Pixel8 hi) {
  require_space(rgb, ColorSpace::Rgb, "near_black_mask");
  for (int ch = 0; ch < 3; ++ch)
    if (lo[ch] > hi[ch]) throw InvalidArgument("near_black_mask: lo > hi");
  Mask out(rgb.width(), rgb.height());
  const auto px = rgb.pixels();
  const long n = static_cast<long>(px.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const Pixel8 p = px[i];
    out.set(static_cast<std::size_t>(i), lo.c0 <= p.c0 && p.c0 <= hi.c0 && lo.c1 <= p.c1 &&
                                             p.c1 <= hi.c1 && lo.c2 <= p.c2 && p.c2 <= hi.c2);
  }
  return out;
}

RgbHistogram rgb_histogram(const Image& rgb, const Mask& keep, int bins) {
  require_space(rgb, ColorSpace::Rgb, "rgb_histogram");
  require_same_dims(rgb, keep, "rgb_histogram");
  if (bins < 1 || bins > 256) throw InvalidArgument("rgb_histogram: bins must be in [1,256]");

  RgbHistogram out;
  out.bins = bins;
  for (auto& c : out.counts) c.assign(static_cast<std::size_t>(bins), 0);
  const auto px = rgb.pixels();
  const int h = rgb.height(), w = rgb.width();
#pragma omp parallel
  {
    std::array<std::vector<std::uint64_t>, 3> local;
    for (auto& c : local) c.assign(static_cast<std::size_t>(bins), 0);
#pragma omp for schedule(static) nowait
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (!keep[i]) continue;
        for (int ch = 0; ch < 3; ++ch) ++local[ch][px[i][ch] * bins / 256];
      }
    }
#pragma omp critical(cbca_histogram_merge)
    for (int ch = 0; ch < 3; ++ch)
      for (int b = 0; b < bins; ++b) out.counts[ch][b] += local[ch][b];
  }
  return out;
}

Mask adaptive_threshold_gaussian(const Image& gray, int block_size, double c) {
  require_space(gray, ColorSpace::Gray, "adaptive_threshold_gaussian");
  if (block_size < 3 || block_size % 2 == 0)
    throw InvalidArgument("adaptive_threshold: block_size must be odd and >= 3");
  const auto k = gaussian_kernel_1d(block_size);
  const int r = block_size / 2;
  const int w = gray.width(), h = gray.height();
  const auto xs = reflected_indices(w, r);
  const auto ys = reflected_indices(h, r);

  Mask out(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double mean = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          mean += k[dy + r] * k[dx + r] * gray.at(xs[x + dx + r], ys[y + dy + r]).c0;
      out.set(x, y, gray.at(x, y).c0 > mean - c);
    }
  }
  return out;
}

}  // namespace kernels
}  // namespace cbca
