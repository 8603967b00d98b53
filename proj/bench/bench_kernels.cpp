// Serial reference vs OpenMP kernels on a synthetic frame-sized input.
// Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <random>

#include "cbca/color_space.hpp"
#include "cbca/kernels.hpp"

namespace {

cbca::Image make_frame(int w, int h) {
  std::mt19937 rng(42);
  std::uniform_int_distribution<int> noise(-12, 12);
  cbca::Image img(w, h, cbca::ColorSpace::Rgb);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int base = 60 + (x * 120) / w;
      img.at(x, y) = {cbca::round_to_u8(base + 60 + noise(rng)), cbca::round_to_u8(base + noise(rng)),
                      cbca::round_to_u8(base - 40 + noise(rng))};
    }
  return img;
}

const cbca::Image& frame() {
  static const cbca::Image f = make_frame(320, 240);
  return f;
}

void BM_BilateralParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(cbca::kernels::bilateral_filter(frame(), 9, 75, 75));
}
void BM_BilateralSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(cbca::reference::bilateral_filter(frame(), 9, 75, 75));
}
void BM_ClaheParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(cbca::kernels::clahe_l_channel(frame(), 2.0, 8, 8));
}
void BM_ClaheSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(cbca::reference::clahe_l_channel(frame(), 2.0, 8, 8));
}
void BM_AdaptiveThresholdParallel(benchmark::State& state) {
  const cbca::Image gray = cbca::to_gray_l(frame());
  for (auto _ : state) benchmark::DoNotOptimize(cbca::kernels::adaptive_threshold_gaussian(gray, 11, 2.0));
}
void BM_AdaptiveThresholdSerial(benchmark::State& state) {
  const cbca::Image gray = cbca::to_gray_l(frame());
  for (auto _ : state) benchmark::DoNotOptimize(cbca::reference::adaptive_threshold_gaussian(gray, 11, 2.0));
}
void BM_HistogramParallel(benchmark::State& state) {
  const cbca::Mask keep(frame().width(), frame().height(), true);
  for (auto _ : state) benchmark::DoNotOptimize(cbca::kernels::rgb_histogram(frame(), keep, 256));
}
void BM_HistogramSerial(benchmark::State& state) {
  const cbca::Mask keep(frame().width(), frame().height(), true);
  for (auto _ : state) benchmark::DoNotOptimize(cbca::reference::rgb_histogram(frame(), keep, 256));
}
void BM_InpaintTelea(benchmark::State& state) {
  cbca::Mask holes(frame().width(), frame().height());
  for (int y = 100; y < 110; ++y)
    for (int x = 150; x < 170; ++x) holes.set(x, y, true);
  for (auto _ : state) benchmark::DoNotOptimize(cbca::kernels::inpaint_telea(frame(), holes, 3));
}

}  // namespace

BENCHMARK(BM_BilateralParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BilateralSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClaheParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClaheSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdaptiveThresholdParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AdaptiveThresholdSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HistogramParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HistogramSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InpaintTelea)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
