#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cbca/color_space.hpp"
#include "cbca/kernels.hpp"
#include "test_util.hpp"

using namespace cbca;
using cbca::test::max_channel_diff;
using cbca::test::random_image;
using cbca::test::random_mask;
using cbca::test::with_thread_counts;

namespace {

Image gray_image(int w, int h, std::uint8_t v) { return Image(w, h, ColorSpace::Gray, {v, 0, 0}); }

}  // namespace

// ---------------------------------------------------------------- masks

TEST_CASE("hsv_range_mask examples") {
  const HsvBounds bright{{0, 0, 200}, {180, 255, 255}};
  const Image black(4, 3, ColorSpace::Hsv);
  CHECK(kernels::hsv_range_mask(black, bright).count() == 0);

  const Image one(1, 1, ColorSpace::Hsv, {10, 50, 220});
  CHECK(kernels::hsv_range_mask(one, bright).count() == 1);

  CHECK_THROWS_AS(kernels::hsv_range_mask(Image(2, 2, ColorSpace::Rgb), bright), InvalidArgument);
  CHECK_THROWS_AS(kernels::hsv_range_mask(black, HsvBounds{{10, 0, 0}, {5, 255, 255}}), InvalidArgument);
}

TEST_CASE("hsv_range_mask matches per-pixel comparison") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(seed);
    const Image img = random_image(rng, 8, 8, ColorSpace::Hsv);
    const HsvBounds b{{20, 40, 60}, {120, 200, 230}};
    const Mask m = kernels::hsv_range_mask(img, b);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        const Pixel8 p = img.at(x, y);
        const bool expect = p.c0 >= 20 && p.c0 <= 120 && p.c1 >= 40 && p.c1 <= 200 && p.c2 >= 60 && p.c2 <= 230;
        REQUIRE(m.at(x, y) == expect);
      }
    REQUIRE(m == reference::hsv_range_mask(img, b));
  }
}

TEST_CASE("near_black_mask examples and oracle") {
  CHECK_FALSE(kernels::near_black_mask(Image(1, 1, ColorSpace::Rgb, {0, 5, 5}))[0]);
  CHECK(kernels::near_black_mask(Image(1, 1, ColorSpace::Rgb, {1, 1, 1}))[0]);
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(seed);
    const Image img = random_image(rng, 9, 7);
    const Mask m = kernels::near_black_mask(img, {30, 0, 10}, {200, 255, 250});
    for (std::size_t i = 0; i < img.size(); ++i) {
      const Pixel8 p = img.pixels()[i];
      REQUIRE(m[i] == (p.c0 >= 30 && p.c0 <= 200 && p.c2 >= 10 && p.c2 <= 250));
    }
    REQUIRE(m == reference::near_black_mask(img, {30, 0, 10}, {200, 255, 250}));
  }
}

TEST_CASE("dynamic_hsv_bounds") {
  SUBCASE("constant image") {
    const Image img(5, 4, ColorSpace::Hsv, {25, 90, 150});
    const HsvBounds b = kernels::dynamic_hsv_bounds(img);
    CHECK(b.lo == Pixel8{25, 90, 150});
    CHECK(b.hi == Pixel8{25, 90, 150});
  }
  SUBCASE("defaults are per-channel min and max") {
    std::mt19937 rng(5);
    const Image img = random_image(rng, 13, 11, ColorSpace::Hsv);
    const HsvBounds b = kernels::dynamic_hsv_bounds(img);
    for (int ch = 0; ch < 3; ++ch) {
      int lo = 255, hi = 0;
      for (const auto& p : img.pixels()) {
        lo = std::min<int>(lo, p[ch]);
        hi = std::max<int>(hi, p[ch]);
      }
      CHECK(b.lo[ch] == lo);
      CHECK(b.hi[ch] == hi);
    }
  }
  SUBCASE("1st/99th percentile on a 100-pixel ramp") {
    Image img(10, 10, ColorSpace::Hsv);
    std::vector<int> order(100);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937(1));
    for (int i = 0; i < 100; ++i)
      img.pixels()[i] = {std::uint8_t(order[i]), std::uint8_t(order[i] + 100), std::uint8_t(order[i] + 150)};
    // Sort-based oracle: lo = sorted[floor(0.01 n)], hi = sorted[n - 1 - floor(0.01 n)].
    const HsvBounds b = kernels::dynamic_hsv_bounds(img, 0.01, 0.99);
    CHECK(b.lo == Pixel8{1, 101, 151});
    CHECK(b.hi == Pixel8{98, 198, 248});
  }
  CHECK_THROWS_AS(kernels::dynamic_hsv_bounds(Image(2, 2, ColorSpace::Hsv), 0.5, 0.4), InvalidArgument);
}

// ------------------------------------------------------------ histogram

TEST_CASE("rgb_histogram examples") {
  const Image zeros(2, 2, ColorSpace::Rgb);
  const auto h = kernels::rgb_histogram(zeros, Mask(2, 2, true), 256);
  for (int ch = 0; ch < 3; ++ch) {
    CHECK(h.counts[ch][0] == 4);
    CHECK(std::accumulate(h.counts[ch].begin(), h.counts[ch].end(), std::uint64_t{0}) == 4);
  }
  const auto none = kernels::rgb_histogram(zeros, Mask(2, 2, false), 256);
  for (int ch = 0; ch < 3; ++ch)
    CHECK(std::accumulate(none.counts[ch].begin(), none.counts[ch].end(), std::uint64_t{0}) == 0);
  CHECK_THROWS_AS(kernels::rgb_histogram(zeros, Mask(3, 2, true), 256), InvalidArgument);
}

TEST_CASE("rgb_histogram matches a tally oracle") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(seed);
    const Image img = random_image(rng, 8, 8);
    const Mask keep = random_mask(rng, 8, 8);
    for (int bins : {256, 16}) {
      const auto h = kernels::rgb_histogram(img, keep, bins);
      std::array<std::vector<std::uint64_t>, 3> tally;
      for (auto& t : tally) t.assign(bins, 0);
      for (std::size_t i = 0; i < img.size(); ++i)
        if (keep[i])
          for (int ch = 0; ch < 3; ++ch) tally[ch][img.pixels()[i][ch] / (256 / bins)]++;
      REQUIRE(h.counts == tally);
      REQUIRE(std::accumulate(h.counts[0].begin(), h.counts[0].end(), std::uint64_t{0}) == keep.count());
      REQUIRE(h.counts == reference::rgb_histogram(img, keep, bins).counts);
    }
  }
}

// ------------------------------------------------------------ bilateral

TEST_CASE("bilateral leaves a constant image unchanged") {
  const Image img(12, 9, ColorSpace::Rgb, {120, 60, 33});
  CHECK(kernels::bilateral_filter(img, 9, 75, 75) == img);
}

TEST_CASE("bilateral preserves an isolated bright pixel when sigma_color is small") {
  Image img(5, 5, ColorSpace::Rgb);
  img.at(2, 2) = {250, 250, 250};
  const Image out = kernels::bilateral_filter(img, 5, 10.0, 75.0);
  // Direct double sum: every neighbour differs by 250 per channel, so its colour
  // weight is exp(-3 * 250^2 / 200), negligible next to the centre weight 1.
  double sw = 0.0, s = 0.0;
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx) {
      if (dx * dx + dy * dy > 4) continue;
      const bool centre = dx == 0 && dy == 0;
      const double ws = std::exp(-(dx * dx + dy * dy) / (2.0 * 75 * 75));
      const double wc = centre ? 1.0 : std::exp(-3.0 * 250 * 250 / (2.0 * 10 * 10));
      sw += ws * wc;
      s += ws * wc * (centre ? 250.0 : 0.0);
    }
  CHECK(std::abs(out.at(2, 2).c0 - s / sw) <= 1.0);
  CHECK(std::abs(int(out.at(2, 2).c0) - 250) <= 1);
}

TEST_CASE("bilateral matches the naive reference exactly") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(seed);
    const int w = 1 + int(rng() % 16), h = 1 + int(rng() % 16);
    const Image img = random_image(rng, w, h);
    const int d = 1 + 2 * int(rng() % 5);
    REQUIRE(kernels::bilateral_filter(img, d, 75, 75) == reference::bilateral_filter(img, d, 75, 75));
  }
  std::mt19937 rng(99);
  const Image img = random_image(rng, 7, 7);
  CHECK(kernels::bilateral_filter(img, 9, 30, 5) == reference::bilateral_filter(img, 9, 30, 5));
}

TEST_CASE("bilateral errors") {
  const Image img(3, 3, ColorSpace::Rgb);
  CHECK_THROWS_AS(kernels::bilateral_filter(img, 4, 75, 75), InvalidArgument);
  CHECK_THROWS_AS(kernels::bilateral_filter(img, 9, 0, 75), InvalidArgument);
  CHECK_THROWS_AS(kernels::bilateral_filter(img, 9, 75, -1), InvalidArgument);
}

// --------------------------------------------------- adaptive threshold

TEST_CASE("adaptive threshold on constant images") {
  const Image img = gray_image(10, 8, 93);
  CHECK(kernels::adaptive_threshold_gaussian(img, 11, 2.0).count() == img.size());
  CHECK(kernels::adaptive_threshold_gaussian(img, 11, -2.0).count() == 0);
  CHECK_THROWS_AS(kernels::adaptive_threshold_gaussian(img, 10, 2.0), InvalidArgument);
  CHECK_THROWS_AS(kernels::adaptive_threshold_gaussian(Image(3, 3, ColorSpace::Rgb), 3, 2.0), InvalidArgument);
}

TEST_CASE("adaptive threshold on an 11x11 step edge matches a direct weighted mean") {
  Image img = gray_image(11, 11, 40);
  for (int y = 0; y < 11; ++y)
    for (int x = 6; x < 11; ++x) img.at(x, y).c0 = 200;

  // Independent oracle: 2-D Gaussian with sigma = 0.3((11-1)/2 - 1) + 0.8, normalized
  // over the full block, reflect-101 borders.
  const double sigma = 0.3 * (5 - 1) + 0.8;
  auto refl = [](int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); };
  const Mask mask = kernels::adaptive_threshold_gaussian(img, 11, 2.0);
  double wsum = 0.0;
  for (int dy = -5; dy <= 5; ++dy)
    for (int dx = -5; dx <= 5; ++dx) wsum += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) {
      double m = 0.0;
      for (int dy = -5; dy <= 5; ++dy)
        for (int dx = -5; dx <= 5; ++dx)
          m += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)) / wsum * img.at(refl(x + dx, 11), refl(y + dy, 11)).c0;
      REQUIRE(mask.at(x, y) == (img.at(x, y).c0 > m - 2.0));
    }
}

TEST_CASE("adaptive threshold matches the serial reference") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(seed);
    const Image img = random_image(rng, 1 + int(rng() % 16), 1 + int(rng() % 16), ColorSpace::Gray);
    const int block = 3 + 2 * int(rng() % 5);
    REQUIRE(kernels::adaptive_threshold_gaussian(img, block, 2.0) ==
            reference::adaptive_threshold_gaussian(img, block, 2.0));
  }
}

// ----------------------------------------------------------------- CLAHE

TEST_CASE("CLAHE keeps constant images constant") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> byte(0, 255);
  int worst = 0;
  for (int i = 0; i < 200; ++i) {
    const Pixel8 c{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))};
    const Image img(32, 24, ColorSpace::Rgb, c);
    const Image out = kernels::clahe_l_channel(img, 2.0, 8, 8);
    for (const auto& p : out.pixels()) REQUIRE(p == out.pixels()[0]);
    worst = std::max(worst, std::abs(int(rgb_to_lab(out.pixels()[0]).c0) - int(rgb_to_lab(c).c0)));
    REQUIRE(out.pixels()[0] == c);
  }
  CHECK(worst == 0);
}

TEST_CASE("CLAHE with an unbounded clip on one tile is plain histogram equalization of L") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    std::mt19937 rng(seed);
    const Image img = random_image(rng, 8, 8);
    const Image out = kernels::clahe_lightness(img, 1e9, 1, 1);
    // Oracle: level v maps to (255 * #pixels below v + v * #pixels at v) / N.
    std::vector<int> levels;
    for (const auto& p : img.pixels()) levels.push_back(rgb_to_lab(p).c0);
    for (std::size_t i = 0; i < img.size(); ++i) {
      const int v = levels[i];
      const double below = double(std::count_if(levels.begin(), levels.end(), [&](int u) { return u < v; }));
      const double at = double(std::count(levels.begin(), levels.end(), v));
      const int expect = int(std::round((255.0 * below + v * at) / 64.0));
      REQUIRE(std::abs(int(out.pixels()[i].c0) - expect) <= 1);
    }
  }
}

TEST_CASE("CLAHE on a 16x16 two-tone image with 2x2 tiles matches a hand-stepped computation") {
  const Pixel8 dark{40, 30, 20}, light{200, 180, 150};
  Image img(16, 16, ColorSpace::Rgb, light);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x) img.at(x, y) = dark;
  const int ld = rgb_to_lab(dark).c0, ll = rgb_to_lab(light).c0;
  REQUIRE(ld < ll);

  // Tiles are 8x8 (64 px); clip = 2 * 64 / 256 = 0.5.
  // Tile (0,0): 64 dark. Tiles (1,0) and (0,1): 32 dark + 32 light. Tile (1,1): 16 dark + 48 light.
  auto lut = [&](double n_dark, double n_light, int level) {
    const double clip = 0.5;
    const double excess = std::max(0.0, n_dark - clip) + std::max(0.0, n_light - clip);
    const double spread = excess / 256.0;
    const double hd = std::min(n_dark, clip) + spread, hl = std::min(n_light, clip) + spread;
    // Every other bin holds `spread`.
    if (level == ld) return (255.0 * ld * spread + ld * hd) / 64.0;
    return (255.0 * ((ll - 1) * spread + hd) + ll * hl) / 64.0;
  };
  const double counts[2][2][2] = {{{64, 0}, {32, 32}}, {{32, 32}, {16, 48}}};  // [ty][tx][dark,light]
  const Image levels = kernels::clahe_lightness(img, 2.0, 2, 2);
  const Image out = kernels::clahe_l_channel(img, 2.0, 2, 2);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const int level = (x < 12 && y < 12) ? ld : ll;
      const double fx = (x + 0.5) / 8 - 0.5, fy = (y + 0.5) / 8 - 0.5;
      const int x0 = int(std::floor(fx)), y0 = int(std::floor(fy));
      const double ax = fx - x0, ay = fy - y0;
      const int tx0 = std::clamp(x0, 0, 1), tx1 = std::clamp(x0 + 1, 0, 1);
      const int ty0 = std::clamp(y0, 0, 1), ty1 = std::clamp(y0 + 1, 0, 1);
      auto L = [&](int ty, int tx) { return lut(counts[ty][tx][0], counts[ty][tx][1], level); };
      const double v = (1 - ay) * ((1 - ax) * L(ty0, tx0) + ax * L(ty0, tx1)) + ay * ((1 - ax) * L(ty1, tx0) + ax * L(ty1, tx1));
      REQUIRE(std::abs(int(levels.at(x, y).c0) - int(std::round(v))) <= 1);
      // Both tones stay in gamut, so the recombined pixel carries the level.
      REQUIRE(std::abs(int(rgb_to_lab(out.at(x, y)).c0) - int(levels.at(x, y).c0)) <= 1);
    }
}

TEST_CASE("CLAHE matches the serial reference within 1") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(seed);
    const Image img = random_image(rng, 1 + int(rng() % 16), 1 + int(rng() % 16));
    const int tx = 1 + int(rng() % 8), ty = 1 + int(rng() % 8);
    const Image a = kernels::clahe_l_channel(img, 2.0, tx, ty);
    const Image b = reference::clahe_l_channel(img, 2.0, tx, ty);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(max_channel_diff(a.pixels()[i], b.pixels()[i]) <= 1);
    const Image la = kernels::clahe_lightness(img, 2.0, tx, ty);
    const Image lb = reference::clahe_lightness(img, 2.0, tx, ty);
    for (std::size_t i = 0; i < la.size(); ++i) REQUIRE(std::abs(la.pixels()[i].c0 - lb.pixels()[i].c0) <= 1);
  }
}

TEST_CASE("CLAHE leaves a* and b* alone when the level does not move") {
  std::mt19937 rng(23);
  const Image img = random_image(rng, 24, 24);
  const Image levels = kernels::clahe_lightness(img, 2.0, 4, 4);
  const Image out = kernels::clahe_l_channel(img, 2.0, 4, 4);
  int unchanged = 0;
  for (std::size_t i = 0; i < img.size(); ++i)
    if (levels.pixels()[i].c0 == rgb_to_lab(img.pixels()[i]).c0) {
      ++unchanged;
      REQUIRE(out.pixels()[i] == img.pixels()[i]);
    }
  CHECK(unchanged > 0);
}

TEST_CASE("CLAHE fixes black and white on any histogram") {
  for (unsigned seed = 0; seed < 30; ++seed) {
    std::mt19937 rng(seed);
    Image img = random_image(rng, 20, 20);
    for (int i = 0; i < 20; ++i) img.at(i, i) = {0, 0, 0}, img.at(19 - i, i) = {255, 255, 255};
    const Image levels = kernels::clahe_lightness(img, 2.0, 3, 3);
    const Image out = kernels::clahe_l_channel(img, 2.0, 3, 3);
    for (int i = 0; i < 20; ++i) {
      REQUIRE(levels.at(i, i).c0 == 0);
      REQUIRE(out.at(i, i) == Pixel8{0, 0, 0});
      REQUIRE(levels.at(19 - i, i).c0 == 255);
    }
  }
}

TEST_CASE("CLAHE level map is monotone within a single tile") {
  std::mt19937 rng(31);
  const Image img = random_image(rng, 16, 16);
  const Image levels = kernels::clahe_lightness(img, 2.0, 1, 1);
  for (std::size_t i = 0; i < img.size(); ++i)
    for (std::size_t j = 0; j < img.size(); ++j)
      if (rgb_to_lab(img.pixels()[i]).c0 < rgb_to_lab(img.pixels()[j]).c0)
        REQUIRE(levels.pixels()[i].c0 <= levels.pixels()[j].c0);
}

TEST_CASE("CLAHE errors") {
  const Image img(4, 4, ColorSpace::Rgb);
  CHECK_THROWS_AS(kernels::clahe_l_channel(img, 0.0, 8, 8), InvalidArgument);
  CHECK_THROWS_AS(kernels::clahe_l_channel(img, 2.0, 0, 8), InvalidArgument);
  CHECK_THROWS_AS(kernels::clahe_l_channel(Image(4, 4, ColorSpace::Lab), 2.0, 8, 8), InvalidArgument);
  CHECK_THROWS_AS(kernels::clahe_lightness(img, -1.0, 8, 8), InvalidArgument);
}

// ----------------------------------------------------------------- Telea

TEST_CASE("inpaint with an empty mask is the identity") {
  std::mt19937 rng(1);
  const Image img = random_image(rng, 10, 10);
  CHECK(kernels::inpaint_telea(img, Mask(10, 10), 3) == img);
}

TEST_CASE("a single hole in a constant field takes the field value") {
  Image img(9, 9, ColorSpace::Rgb, {70, 140, 210});
  img.at(4, 4) = {255, 255, 255};
  Mask holes(9, 9);
  holes.set(4, 4, true);
  CHECK(kernels::inpaint_telea(img, holes, 3).at(4, 4) == Pixel8{70, 140, 210});
}

TEST_CASE("a 2-pixel hole across a horizontal gradient is filled near the gradient") {
  Image img(16, 5, ColorSpace::Rgb);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 16; ++x) {
      const auto v = std::uint8_t(20 + 10 * x);
      img.at(x, y) = {v, v, v};
    }
  Mask holes(16, 5);
  holes.set(7, 2, true);
  holes.set(8, 2, true);
  Image damaged = img;
  damaged.at(7, 2) = {0, 0, 0};
  damaged.at(8, 2) = {0, 0, 0};
  const Image out = kernels::inpaint_telea(damaged, holes, 3);
  CHECK(max_channel_diff(out.at(7, 2), img.at(7, 2)) <= 2);
  CHECK(max_channel_diff(out.at(8, 2), img.at(8, 2)) <= 2);
}

TEST_CASE("inpaint never modifies non-hole pixels and is deterministic") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(seed);
    const int w = 2 + int(rng() % 15), h = 2 + int(rng() % 15);
    const Image img = random_image(rng, w, h);
    Mask holes = random_mask(rng, w, h, 0.3);
    if (holes.count() == holes.size()) holes.set(0, false);
    const Image out = kernels::inpaint_telea(img, holes, 3);
    for (std::size_t i = 0; i < img.size(); ++i)
      if (!holes[i]) REQUIRE(out.pixels()[i] == img.pixels()[i]);
    REQUIRE(out == kernels::inpaint_telea(img, holes, 3));
  }
}

TEST_CASE("inpaint errors") {
  const Image img(3, 3, ColorSpace::Rgb);
  CHECK_THROWS_AS(kernels::inpaint_telea(img, Mask(3, 3, true), 3), InvalidArgument);
  CHECK_THROWS_AS(kernels::inpaint_telea(img, Mask(3, 3), 0), InvalidArgument);
  CHECK_THROWS_AS(kernels::inpaint_telea(img, Mask(2, 3), 3), InvalidArgument);
}

// ------------------------------------------------------ thread invariance

TEST_CASE("parallel kernels are independent of thread count") {
  std::mt19937 rng(123);
  const Image img = random_image(rng, 97, 61);
  const Mask keep = random_mask(rng, 97, 61);
  {
    auto [a, b] = with_thread_counts([&] { return kernels::bilateral_filter(img, 9, 75, 75); });
    CHECK(a == b);
  }
  {
    auto [a, b] = with_thread_counts([&] { return kernels::clahe_l_channel(img, 2.0, 8, 8); });
    CHECK(a == b);
  }
  {
    const Image gray = to_gray_l(img);
    auto [a, b] = with_thread_counts([&] { return kernels::adaptive_threshold_gaussian(gray, 11, 2.0); });
    CHECK(a == b);
  }
  {
    auto [a, b] = with_thread_counts([&] { return kernels::rgb_histogram(img, keep, 256).counts; });
    CHECK(a == b);
  }
}
