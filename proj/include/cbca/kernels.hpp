#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cbca/image.hpp"

namespace cbca {

// Inclusive channelwise bounds, H in [0,180], S and V in [0,255].
struct HsvBounds {
  Pixel8 lo{0, 0, 0};
  Pixel8 hi{180, 255, 255};

  void validate() const;
  friend bool operator==(const HsvBounds&, const HsvBounds&) = default;
  bool contains(Pixel8 p) const {
    return lo.c0 <= p.c0 && p.c0 <= hi.c0 && lo.c1 <= p.c1 && p.c1 <= hi.c1 && lo.c2 <= p.c2 &&
           p.c2 <= hi.c2;
  }
};

struct RgbHistogram {
  int bins = 256;
  std::array<std::vector<std::uint64_t>, 3> counts;
};

// Reflect-101 index into [0, n): -1 -> 1, n -> n-2.
inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
  return i;
}

// Normalized 1-D Gaussian of odd size with OpenCV's default sigma for that size.
std::vector<double> gaussian_kernel_1d(int size);

// Kernels below parallelize over rows or tiles with OpenMP. Output is bit-identical
// for any thread count and matches the serial versions in cbca::reference.
namespace kernels {

Mask hsv_range_mask(const Image& hsv, const HsvBounds& bounds);

// Per-channel bounds at the given lower/upper quantiles of the pixel distribution.
// lo is the smallest value v with count(<= v) > clip_lo * n; hi is the largest v with
// count(>= v) > (1 - clip_hi) * n. Defaults give the channel min and max.
HsvBounds dynamic_hsv_bounds(const Image& hsv, double clip_lo = 0.0, double clip_hi = 1.0);

// Fast-marching inpainting of `holes`. Pixels are filled in increasing arrival time
// from the hole boundary (heap ties broken by row-major index); each filled value is
// the weighted sum of I(q) + grad I(q) . (p - q) over known q within `radius`, with
// weights combining direction, distance and level-set terms. Serial by nature.
Image inpaint_telea(const Image& rgb, const Mask& holes, int radius);

// CLAHE on the Lab lightness of an RGB image. Tiles that do not divide the image
// are padded by edge replication. Histograms are clipped at
// clip_limit * tile_pixels / 256 and the excess spread uniformly over all bins in a
// single pass. The tile LUT maps level v to (255 * pixels_below + v * pixels_at) /
// tile_pixels: the bin lands inside its CDF interval at v's own relative position,
// so 0 and 255 are fixed and a constant tile maps to itself. a* and b* are left untouched; pixels whose level
// does not move are copied verbatim.
Image clahe_l_channel(const Image& rgb, double clip_limit, int tiles_x, int tiles_y);

// The equalized L' levels that clahe_l_channel writes back, before any gamut
// clamping of the recombined color. Gray output.
Image clahe_lightness(const Image& rgb, double clip_limit, int tiles_x, int tiles_y);

// Joint Gaussian bilateral filter over a disk of the given diameter.
// Color distance is Euclidean in RGB; borders reflect-101.
Image bilateral_filter(const Image& rgb, int diameter, double sigma_color, double sigma_space);

// True (keep) where lo <= pixel <= hi channelwise.
Mask near_black_mask(const Image& rgb, Pixel8 lo = {1, 1, 1}, Pixel8 hi = {255, 255, 255});

// Per-channel counts over kept pixels; value v falls in bin v * bins / 256.
RgbHistogram rgb_histogram(const Image& rgb, const Mask& keep, int bins = 256);

// Pixel true iff value > (Gaussian-weighted block mean - c). Gray input, reflect-101.
Mask adaptive_threshold_gaussian(const Image& gray, int block_size, double c);

}  // namespace kernels

// Straightforward single-threaded implementations kept as test references.
namespace reference {

Mask hsv_range_mask(const Image& hsv, const HsvBounds& bounds);
Mask near_black_mask(const Image& rgb, Pixel8 lo, Pixel8 hi);
RgbHistogram rgb_histogram(const Image& rgb, const Mask& keep, int bins);
Image bilateral_filter(const Image& rgb, int diameter, double sigma_color, double sigma_space);
Mask adaptive_threshold_gaussian(const Image& gray, int block_size, double c);
Image clahe_l_channel(const Image& rgb, double clip_limit, int tiles_x, int tiles_y);
Image clahe_lightness(const Image& rgb, double clip_limit, int tiles_x, int tiles_y);

}  // namespace reference

}  // namespace cbca
