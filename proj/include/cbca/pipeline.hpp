#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cbca/features.hpp"
#include "cbca/image.hpp"
#include "cbca/kernels.hpp"
#include "cbca/roi.hpp"

namespace cbca {

struct PipelineConfig {
  RoiConfig roi;
  // Dynamic HSV mask quantiles; 0 and 1 keep the observed per-channel min..max.
  double hsv_clip_lo = 0.0;
  double hsv_clip_hi = 1.0;
  bool inpaint_bright = true;
  HsvBounds bright{{0, 0, 200}, {180, 255, 255}};
  int inpaint_radius = 3;
  double clahe_clip = 2.0;
  int clahe_tiles_x = 8;
  int clahe_tiles_y = 8;
  int bilateral_diameter = 9;
  double bilateral_sigma_color = 75.0;
  double bilateral_sigma_space = 75.0;
  Pixel8 keep_lo{1, 1, 1};
  Pixel8 keep_hi{255, 255, 255};
  // Gaussian adaptive threshold on L', ANDed into the keep mask when enabled.
  bool adaptive_threshold = false;
  int adaptive_block = 11;
  double adaptive_c = 2.0;
  // Frame rate assumed for a bare frame directory without a manifest.
  double fps = 30.0;
  // Emit one window every window_stride_sec seconds (a positive whole number).
  double window_stride_sec = 1.0;

  void validate() const;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

inline constexpr std::size_t kNumStages = 8;
inline constexpr std::array<const char*, kNumStages> kStageNames = {
    "load", "roi", "hsv_mask", "inpaint", "clahe", "bilateral", "near_black", "features"};

using StageTimings = std::array<double, kNumStages>;

struct FrameResult {
  FeatureVector features{};
  std::uint64_t kept_pixels = 0;
  RgbHistogram histogram;
  StageTimings timings_ms{};
};

// Stages 2..8 on an RGB frame. Throws EmptyMaskError when no pixel survives.
FrameResult process_frame(const Image& rgb, const PipelineConfig& config);

struct FrameSource {
  std::vector<std::filesystem::path> frames;
  double fps = 30.0;
  double start_time = 0.0;
};

// A directory with manifest.json ({"fps", "segments": [{"start_time", "frames"}]},
// frame paths relative to the directory), or else its sorted .ppm/.png files as a
// single segment at config.fps starting at 0.
std::vector<FrameSource> load_frame_sources(const std::filesystem::path& dir, const PipelineConfig& config);

struct PipelineDiagnostics {
  std::uint64_t frames_total = 0;
  std::uint64_t frames_processed = 0;
  std::uint64_t frames_empty = 0;
  std::uint64_t frames_trailing_dropped = 0;
  std::uint64_t windows_total = 0;
  std::uint64_t windows_skipped_by_stride = 0;
  std::uint64_t windows_dropped_empty = 0;
  std::uint64_t windows_emitted = 0;
  StageTimings stage_ms{};
  double total_ms = 0.0;
};

// window = round(fps) frames, trailing partial window dropped; each emitted row is
// the mean of the non-empty frame vectors of its window at t_sec = start_time + index.
// Frames run in parallel; the reduction is ordered, so output is thread-count invariant.
FeatureSeries aggregate_windows(const std::vector<FrameSource>& sources, const PipelineConfig& config,
                                PipelineDiagnostics* diagnostics = nullptr);

// Diagnostics as JSON text; timing fields live under "timings_ms".
std::string diagnostics_json(const PipelineDiagnostics& d);

}  // namespace cbca
