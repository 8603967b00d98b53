#include "cbca/color_space.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace cbca {
namespace {

// sRGB primaries, D65 white.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

constexpr double kDelta = 6.0 / 29.0;

struct Mat3 {
  double m[3][3];
};

Mat3 invert(const double a[3][3]) {
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  Mat3 r{};
  r.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
  r.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
  r.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
  r.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
  r.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
  r.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
  r.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
  r.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
  r.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  return r;
}

const Mat3& xyz_to_rgb() {
  static const Mat3 inv = invert(kRgbToXyz);
  return inv;
}

const std::array<double, 256>& linear_lut() {
  static const std::array<double, 256> lut = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[i] = srgb_to_linear(i / 255.0);
    return t;
  }();
  return lut;
}

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

template <typename F>
Image map_pixels(const Image& src, ColorSpace out_space, F&& f) {
  Image out(src.width(), src.height(), out_space);
  auto in = src.pixels();
  auto dst = out.pixels();
  const long n = static_cast<long>(in.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) dst[i] = f(in[i]);
  return out;
}

}  // namespace

std::uint8_t round_to_u8(double v) {
  const double r = std::round(v);
  if (!(r > 0.0)) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

Pixel8 rgb_to_hsv(Pixel8 rgb) {
  const int r = rgb.c0, g = rgb.c1, b = rgb.c2;
  const int vmax = std::max({r, g, b});
  const int vmin = std::min({r, g, b});
  const int diff = vmax - vmin;
  if (diff == 0) return {0, 0, static_cast<std::uint8_t>(vmax)};

  const double s = 255.0 * diff / vmax;
  double h;
  if (vmax == r)
    h = 60.0 * (g - b) / diff;
  else if (vmax == g)
    h = 120.0 + 60.0 * (b - r) / diff;
  else
    h = 240.0 + 60.0 * (r - g) / diff;
  if (h < 0.0) h += 360.0;
  int hq = static_cast<int>(std::round(h / 2.0));
  if (hq >= 180) hq = 0;  // 360 degrees wraps onto red
  return {static_cast<std::uint8_t>(hq), round_to_u8(s), static_cast<std::uint8_t>(vmax)};
}

Pixel8 hsv_to_rgb(Pixel8 hsv) {
  const double v = hsv.c2 / 255.0;
  const double s = hsv.c1 / 255.0;
  if (hsv.c1 == 0) return {hsv.c2, hsv.c2, hsv.c2};
  double h = (hsv.c0 * 2.0) / 60.0;
  const int sector = static_cast<int>(std::floor(h)) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r, g, b;
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  return {round_to_u8(r * 255.0), round_to_u8(g * 255.0), round_to_u8(b * 255.0)};
}

LabF rgb_to_lab_f(Pixel8 rgb) {
  const auto& lut = linear_lut();
  const double r = lut[rgb.c0], g = lut[rgb.c1], b = lut[rgb.c2];
  const double x = (kRgbToXyz[0][0] * r + kRgbToXyz[0][1] * g + kRgbToXyz[0][2] * b) / kWhiteX;
  const double y = (kRgbToXyz[1][0] * r + kRgbToXyz[1][1] * g + kRgbToXyz[1][2] * b) / kWhiteY;
  const double z = (kRgbToXyz[2][0] * r + kRgbToXyz[2][1] * g + kRgbToXyz[2][2] * b) / kWhiteZ;
  const double fx = lab_f(x), fy = lab_f(y), fz = lab_f(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

namespace {

std::array<double, 3> lab_to_linear_rgb(const LabF& lab) {
  const double fy = (lab.l + 16.0) / 116.0;
  const double fx = fy + lab.a / 500.0;
  const double fz = fy - lab.b / 200.0;
  const double x = lab_f_inv(fx) * kWhiteX;
  const double y = lab_f_inv(fy) * kWhiteY;
  const double z = lab_f_inv(fz) * kWhiteZ;
  const auto& m = xyz_to_rgb().m;
  return {m[0][0] * x + m[0][1] * y + m[0][2] * z, m[1][0] * x + m[1][1] * y + m[1][2] * z,
          m[2][0] * x + m[2][1] * y + m[2][2] * z};
}

}  // namespace

Pixel8 lab_f_to_rgb(const LabF& lab) {
  const auto lin = lab_to_linear_rgb(lab);
  auto encode = [](double c) { return round_to_u8(linear_to_srgb(std::clamp(c, 0.0, 1.0)) * 255.0); };
  return {encode(lin[0]), encode(lin[1]), encode(lin[2])};
}

bool lab_in_gamut(Pixel8 lab) {
  const auto lin = lab_to_linear_rgb(decode_lab(lab));
  return std::all_of(lin.begin(), lin.end(), [](double c) { return c >= 0.0 && c <= 1.0; });
}

LabF decode_lab(Pixel8 lab) {
  return {lab.c0 * 100.0 / 255.0, lab.c1 - 128.0, lab.c2 - 128.0};
}

Pixel8 encode_lab(const LabF& lab) {
  return {round_to_u8(lab.l * 255.0 / 100.0), round_to_u8(lab.a + 128.0), round_to_u8(lab.b + 128.0)};
}

Pixel8 rgb_to_lab(Pixel8 rgb) { return encode_lab(rgb_to_lab_f(rgb)); }

Pixel8 lab_to_rgb(Pixel8 lab) { return lab_f_to_rgb(decode_lab(lab)); }

Image to_hsv(const Image& rgb) {
  require_space(rgb, ColorSpace::Rgb, "to_hsv");
  return map_pixels(rgb, ColorSpace::Hsv, [](Pixel8 p) { return rgb_to_hsv(p); });
}

Image to_lab(const Image& rgb) {
  require_space(rgb, ColorSpace::Rgb, "to_lab");
  return map_pixels(rgb, ColorSpace::Lab, [](Pixel8 p) { return rgb_to_lab(p); });
}

Image hsv_to_rgb(const Image& hsv) {
  require_space(hsv, ColorSpace::Hsv, "hsv_to_rgb");
  return map_pixels(hsv, ColorSpace::Rgb, [](Pixel8 p) { return hsv_to_rgb(p); });
}

Image lab_to_rgb(const Image& lab) {
  require_space(lab, ColorSpace::Lab, "lab_to_rgb");
  return map_pixels(lab, ColorSpace::Rgb, [](Pixel8 p) { return lab_to_rgb(p); });
}

Image to_gray_l(const Image& rgb) {
  require_space(rgb, ColorSpace::Rgb, "to_gray_l");
  return map_pixels(rgb, ColorSpace::Gray, [](Pixel8 p) { return Pixel8{rgb_to_lab(p).c0, 0, 0}; });
}

}  // namespace cbca
