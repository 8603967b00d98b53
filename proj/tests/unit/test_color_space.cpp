#include <doctest.h>

#include <cmath>
#include <random>

#include "cbca/color_space.hpp"
#include "test_util.hpp"

using namespace cbca;
using cbca::test::max_channel_diff;

TEST_CASE("rgb_to_hsv examples") {
  CHECK(rgb_to_hsv({255, 0, 0}) == Pixel8{0, 255, 255});
  CHECK(rgb_to_hsv({128, 128, 128}) == Pixel8{0, 0, 128});
  CHECK(rgb_to_hsv({0, 0, 255}) == Pixel8{120, 255, 255});
  CHECK(rgb_to_hsv({0, 255, 0}) == Pixel8{60, 255, 255});
}

TEST_CASE("hue just below 360 degrees wraps to 0") {
  // (255, 0, 1): hue = 360 - 60/255 deg, halves to 179.88 -> rounds to 180 -> 0.
  CHECK(rgb_to_hsv({255, 0, 1}).c0 == 0);
}

TEST_CASE("achromatic pixels have zero saturation and hue") {
  for (int v = 0; v < 256; ++v) {
    const auto p = static_cast<std::uint8_t>(v);
    const Pixel8 hsv = rgb_to_hsv({p, p, p});
    CHECK(hsv.c0 == 0);
    CHECK(hsv.c1 == 0);
    CHECK(hsv.c2 == p);
  }
}

TEST_CASE("hsv_to_rgb examples") {
  CHECK(hsv_to_rgb(Pixel8{0, 255, 255}) == Pixel8{255, 0, 0});
  CHECK(hsv_to_rgb(Pixel8{0, 0, 128}) == Pixel8{128, 128, 128});
}

TEST_CASE("HSV codes of the 16^3 grid survive HSV -> RGB -> HSV within 1") {
  int worst = 0;
  for (int r = 0; r < 256; r += 17)
    for (int g = 0; g < 256; g += 17)
      for (int b = 0; b < 256; b += 17) {
        const Pixel8 hsv = rgb_to_hsv({std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)});
        worst = std::max(worst, max_channel_diff(hsv, rgb_to_hsv(hsv_to_rgb(hsv))));
      }
  CHECK(worst <= 1);
}

TEST_CASE("RGB -> HSV -> RGB stays within the 2-degree hue quantization bound") {
  // One hue code spans 2 deg; at S=V=255 that is 255*2/60 = 8.5 levels of the
  // middle channel, so half a code moves it by at most 4.
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> byte(0, 255);
  int worst = 0;
  for (int i = 0; i < 200000; ++i) {
    const Pixel8 p{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))};
    worst = std::max(worst, max_channel_diff(p, hsv_to_rgb(rgb_to_hsv(p))));
  }
  CHECK(worst <= 4);
  // V is the max channel and survives exactly.
  for (int i = 0; i < 1000; ++i) {
    const Pixel8 p{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))};
    const Pixel8 q = hsv_to_rgb(rgb_to_hsv(p));
    REQUIRE(std::max({q.c0, q.c1, q.c2}) == std::max({p.c0, p.c1, p.c2}));
  }
}

TEST_CASE("Lab encodings of black, white and red") {
  CHECK(rgb_to_lab({0, 0, 0}) == Pixel8{0, 128, 128});
  CHECK(rgb_to_lab({255, 255, 255}) == Pixel8{255, 128, 128});
  // Independent reference (skimage/OpenCV): L*=53.2406 a*=80.0923 b*=67.2028.
  CHECK(max_channel_diff(rgb_to_lab({255, 0, 0}), Pixel8{136, 208, 195}) <= 1);
  const LabF red = rgb_to_lab_f({255, 0, 0});
  CHECK(red.l == doctest::Approx(53.2406).epsilon(1e-4));
  CHECK(red.a == doctest::Approx(80.0923).epsilon(1e-4));
  CHECK(red.b == doctest::Approx(67.2028).epsilon(1e-4));
}

TEST_CASE("lab_to_rgb examples") {
  CHECK(lab_to_rgb(Pixel8{0, 128, 128}) == Pixel8{0, 0, 0});
  CHECK(max_channel_diff(lab_to_rgb(Pixel8{255, 128, 128}), Pixel8{255, 255, 255}) <= 1);
}

namespace {

// Oracle gamut test: decode with the textbook formulas independently of the
// library and check that linear RGB lies inside the unit cube.
bool in_gamut_oracle(Pixel8 lab) {
  const double l = lab.c0 * 100.0 / 255.0, a = lab.c1 - 128.0, b = lab.c2 - 128.0;
  auto finv = [](double t) { return t > 6.0 / 29.0 ? t * t * t : 3.0 * (6.0 / 29.0) * (6.0 / 29.0) * (t - 4.0 / 29.0); };
  const double fy = (l + 16.0) / 116.0;
  const double x = 0.95047 * finv(fy + a / 500.0), y = finv(fy), z = 1.08883 * finv(fy - b / 200.0);
  const double rgb[3] = {3.2404542 * x - 1.5371385 * y - 0.4985314 * z,
                         -0.9692660 * x + 1.8760108 * y + 0.0415560 * z,
                         0.0556434 * x - 0.2040259 * y + 1.0572252 * z};
  for (double c : rgb)
    if (c < -1e-6 || c > 1.0 + 1e-6) return false;
  return true;
}

}  // namespace

TEST_CASE("in-gamut Lab codes survive Lab -> RGB -> Lab within 2") {
  int worst = 0, tested = 0;
  for (int l = 0; l < 256; l += 3)
    for (int a = 0; a < 256; a += 3)
      for (int b = 0; b < 256; b += 3) {
        const Pixel8 lab{std::uint8_t(l), std::uint8_t(a), std::uint8_t(b)};
        if (!lab_in_gamut(lab)) continue;
        ++tested;
        worst = std::max(worst, max_channel_diff(lab, rgb_to_lab(lab_to_rgb(lab))));
      }
  CHECK(tested > 50000);
  CHECK(worst <= 2);
}

TEST_CASE("lab_in_gamut agrees with an independent decode") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> byte(0, 255);
  int mismatches = 0;
  for (int i = 0; i < 100000; ++i) {
    const Pixel8 lab{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))};
    mismatches += lab_in_gamut(lab) != in_gamut_oracle(lab);
  }
  // Published matrix is rounded to 7 digits; only knife-edge codes may differ.
  CHECK(mismatches <= 5);
}

TEST_CASE("unquantized Lab round trip is exact after rounding") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 20000; ++i) {
    const Pixel8 p{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))};
    REQUIRE(lab_f_to_rgb(rgb_to_lab_f(p)) == p);
  }
}

TEST_CASE("Lab L' is monotone in relative luminance") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> byte(0, 255);
  auto luminance = [](Pixel8 p) {
    return 0.2126729 * srgb_to_linear(p.c0 / 255.0) + 0.7151522 * srgb_to_linear(p.c1 / 255.0) +
           0.0721750 * srgb_to_linear(p.c2 / 255.0);
  };
  for (int i = 0; i < 50000; ++i) {
    Pixel8 a{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))};
    Pixel8 b{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))};
    if (luminance(a) > luminance(b)) std::swap(a, b);
    REQUIRE(rgb_to_lab(a).c0 <= rgb_to_lab(b).c0);
  }
}

TEST_CASE("image conversions check tags") {
  Image hsv(2, 2, ColorSpace::Hsv);
  CHECK_THROWS_AS(to_lab(hsv), InvalidArgument);
  CHECK_THROWS_AS(to_hsv(hsv), InvalidArgument);
  Image rgb(2, 2, ColorSpace::Rgb, {255, 0, 0});
  const Image h = to_hsv(rgb);
  CHECK(h.space() == ColorSpace::Hsv);
  CHECK(h.at(1, 1) == Pixel8{0, 255, 255});
  CHECK(hsv_to_rgb(h) == rgb);
}
