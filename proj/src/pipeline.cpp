#include "cbca/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "cbca/color_space.hpp"
#include "cbca/image_io.hpp"

namespace cbca {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool whole_number(double v) { return std::isfinite(v) && std::abs(v - std::round(v)) < 1e-9; }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("pipeline config: " + what);
}

}  // namespace

void PipelineConfig::validate() const {
  require(roi.min_area_frac > 0.0 && roi.min_area_frac <= 1.0, "roi.min_area_frac must be in (0,1]");
  require(roi.box.x >= 0 && roi.box.y >= 0 && roi.box.w >= 0 && roi.box.h >= 0, "roi.box must be nonnegative");
  require(hsv_clip_lo >= 0.0 && hsv_clip_lo < hsv_clip_hi && hsv_clip_hi <= 1.0,
          "need 0 <= hsv_clip_lo < hsv_clip_hi <= 1");
  bright.validate();
  require(inpaint_radius >= 1, "inpaint_radius must be >= 1");
  require(clahe_clip > 0.0, "clahe_clip must be > 0");
  require(clahe_tiles_x >= 1 && clahe_tiles_y >= 1, "clahe tile grid must be >= 1x1");
  require(bilateral_diameter >= 1 && bilateral_diameter % 2 == 1, "bilateral_diameter must be odd and >= 1");
  require(bilateral_sigma_color > 0.0 && bilateral_sigma_space > 0.0, "bilateral sigmas must be > 0");
  for (int ch = 0; ch < 3; ++ch) require(keep_lo[ch] <= keep_hi[ch], "keep_lo must not exceed keep_hi");
  require(adaptive_block >= 3 && adaptive_block % 2 == 1, "adaptive_block must be odd and >= 3");
  require(std::isfinite(adaptive_c), "adaptive_c must be finite");
  require(fps > 0.0 && std::isfinite(fps) && std::lround(fps) >= 1, "fps must round to at least 1");
  require(window_stride_sec >= 1.0 && whole_number(window_stride_sec), "window_stride_sec must be a whole number >= 1");
}

FrameResult process_frame(const Image& rgb, const PipelineConfig& config) {
  require_space(rgb, ColorSpace::Rgb, "process_frame");
  FrameResult res;
  auto& tm = res.timings_ms;

  auto t = Clock::now();
  const Image roi = crop(rgb, detect_roi(rgb, config.roi));
  tm[1] = ms_since(t);

  t = Clock::now();
  const Image hsv = to_hsv(roi);
  Mask keep = kernels::hsv_range_mask(hsv, kernels::dynamic_hsv_bounds(hsv, config.hsv_clip_lo, config.hsv_clip_hi));
  tm[2] = ms_since(t);

  t = Clock::now();
  Image work = roi;
  if (config.inpaint_bright) {
    const Mask bright = kernels::hsv_range_mask(hsv, config.bright);
    const std::size_t n_bright = bright.count();
    if (n_bright == bright.size()) throw EmptyMaskError("every pixel is a bright highlight");
    if (n_bright > 0) work = kernels::inpaint_telea(work, bright, config.inpaint_radius);
  }
  tm[3] = ms_since(t);

  t = Clock::now();
  work = kernels::clahe_l_channel(work, config.clahe_clip, config.clahe_tiles_x, config.clahe_tiles_y);
  tm[4] = ms_since(t);

  t = Clock::now();
  work = kernels::bilateral_filter(work, config.bilateral_diameter, config.bilateral_sigma_color,
                                   config.bilateral_sigma_space);
  tm[5] = ms_since(t);

  t = Clock::now();
  keep &= kernels::near_black_mask(work, config.keep_lo, config.keep_hi);
  if (config.adaptive_threshold)
    keep &= kernels::adaptive_threshold_gaussian(to_gray_l(work), config.adaptive_block, config.adaptive_c);
  const std::size_t kept = keep.count();
  if (kept == 0) throw EmptyMaskError("no pixel survived masking");
  tm[6] = ms_since(t);

  t = Clock::now();
  res.histogram = kernels::rgb_histogram(work, keep, 256);
  res.kept_pixels = kept;
  const double n = static_cast<double>(kept);
  for (int ch = 0; ch < 3; ++ch) {
    std::uint64_t s = 0;
    for (int v = 0; v < 256; ++v) s += res.histogram.counts[ch][v] * static_cast<std::uint64_t>(v);
    res.features[ch] = static_cast<double>(s) / n;
  }
  // Integer sums keep the reduction exact under any thread schedule.
  std::uint64_t h0 = 0, h1 = 0, h2 = 0, l0 = 0, l1 = 0, l2 = 0;
  const auto px = work.pixels();
  const long total = static_cast<long>(px.size());
#pragma omp parallel for schedule(static) reduction(+ : h0, h1, h2, l0, l1, l2)
  for (long i = 0; i < total; ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    const Pixel8 h = rgb_to_hsv(px[i]);
    const Pixel8 l = rgb_to_lab(px[i]);
    h0 += h.c0, h1 += h.c1, h2 += h.c2;
    l0 += l.c0, l1 += l.c1, l2 += l.c2;
  }
  res.features[3] = h0 / n, res.features[4] = h1 / n, res.features[5] = h2 / n;
  res.features[6] = l0 / n, res.features[7] = l1 / n, res.features[8] = l2 / n;
  tm[7] = ms_since(t);
  return res;
}

std::vector<FrameSource> load_frame_sources(const std::filesystem::path& dir, const PipelineConfig& config) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError("frame directory not found: " + dir.string());
  const fs::path manifest = dir / "manifest.json";
  std::vector<FrameSource> out;
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(manifest.string() + ": " + e.what());
    }
    auto bad = [&](const std::string& what) { return InputError(manifest.string() + ": " + what); };
    if (!j.is_object()) throw bad("expected an object");
    for (const auto& [k, v] : j.items())
      if (k != "fps" && k != "segments") throw bad("unknown key '" + k + "'");
    if (!j.contains("fps") || !j["fps"].is_number()) throw bad("'fps' must be a number");
    const double fps = j["fps"].get<double>();
    if (!(fps > 0.0) || std::lround(fps) < 1) throw bad("'fps' must round to at least 1");
    if (!j.contains("segments") || !j["segments"].is_array() || j["segments"].empty())
      throw bad("'segments' must be a nonempty array");
    for (const auto& seg : j["segments"]) {
      if (!seg.is_object()) throw bad("segment must be an object");
      for (const auto& [k, v] : seg.items())
        if (k != "start_time" && k != "frames") throw bad("unknown segment key '" + k + "'");
      FrameSource src;
      src.fps = fps;
      if (seg.contains("start_time")) {
        if (!seg["start_time"].is_number()) throw bad("'start_time' must be a number");
        src.start_time = seg["start_time"].get<double>();
      }
      if (!seg.contains("frames") || !seg["frames"].is_array() || seg["frames"].empty())
        throw bad("segment 'frames' must be a nonempty array");
      for (const auto& f : seg["frames"]) {
        if (!f.is_string()) throw bad("frame entries must be strings");
        src.frames.push_back(dir / f.get<std::string>());
      }
      out.push_back(std::move(src));
    }
    return out;
  }
  FrameSource src;
  src.fps = config.fps;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_image_file(e.path())) src.frames.push_back(e.path());
  if (src.frames.empty()) throw InputError("no .ppm/.png frames in " + dir.string());
  std::sort(src.frames.begin(), src.frames.end());
  out.push_back(std::move(src));
  return out;
}

FeatureSeries aggregate_windows(const std::vector<FrameSource>& sources, const PipelineConfig& config,
                                PipelineDiagnostics* diagnostics) {
  config.validate();
  const auto t_start = Clock::now();
  PipelineDiagnostics diag;
  const long stride = std::lround(config.window_stride_sec);

  struct Window {
    double t_sec;
    std::size_t first_job;
    std::size_t n_frames;
  };
  std::vector<Window> windows;
  std::vector<const std::filesystem::path*> jobs;
  for (const auto& src : sources) {
    if (!(src.fps > 0.0) || std::lround(src.fps) < 1) throw InvalidArgument("frame source fps must round to >= 1");
    if (src.frames.empty()) throw InvalidArgument("frame source has no frames");
    const std::size_t window = static_cast<std::size_t>(std::lround(src.fps));
    const std::size_t n_windows = src.frames.size() / window;
    diag.frames_total += src.frames.size();
    diag.frames_trailing_dropped += src.frames.size() % window;
    diag.windows_total += n_windows;
    for (std::size_t w = 0; w < n_windows; ++w) {
      if (static_cast<long>(w) % stride != 0) {
        ++diag.windows_skipped_by_stride;
        continue;
      }
      windows.push_back({src.start_time + static_cast<double>(w), jobs.size(), window});
      for (std::size_t f = w * window; f < (w + 1) * window; ++f) jobs.push_back(&src.frames[f]);
    }
  }

  std::vector<std::optional<FrameResult>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const long n_jobs = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (long j = 0; j < n_jobs; ++j) {
    try {
      const auto t = Clock::now();
      const Image img = read_image(*jobs[j]);
      const double load_ms = ms_since(t);
      FrameResult r = process_frame(img, config);
      r.timings_ms[0] = load_ms;
      results[j] = std::move(r);
    } catch (const EmptyMaskError&) {
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  FeatureSeries series;
  for (const auto& w : windows) {
    FeatureRow row;
    row.t_sec = w.t_sec;
    std::size_t used = 0;
    for (std::size_t j = w.first_job; j < w.first_job + w.n_frames; ++j) {
      ++diag.frames_processed;
      if (!results[j]) {
        ++diag.frames_empty;
        continue;
      }
      ++used;
      for (std::size_t i = 0; i < kNumFeatures; ++i) row.features[i] += results[j]->features[i];
      row.kept_pixels += results[j]->kept_pixels;
      for (std::size_t s = 0; s < kNumStages; ++s) diag.stage_ms[s] += results[j]->timings_ms[s];
    }
    if (used == 0) {
      ++diag.windows_dropped_empty;
      continue;
    }
    for (auto& f : row.features) f /= static_cast<double>(used);
    if (!series.empty() && !(row.t_sec > series.back().t_sec))
      throw InputError("frame segments overlap: window at t=" + format_fixed(row.t_sec) +
                       " does not follow t=" + format_fixed(series.back().t_sec));
    series.push_back(row);
  }
  diag.windows_emitted = series.size();
  diag.total_ms = ms_since(t_start);
  if (diagnostics) *diagnostics = diag;
  return series;
}

std::string diagnostics_json(const PipelineDiagnostics& d) {
  nlohmann::ordered_json j;
  j["frames_total"] = d.frames_total;
  j["frames_processed"] = d.frames_processed;
  j["frames_empty"] = d.frames_empty;
  j["frames_trailing_dropped"] = d.frames_trailing_dropped;
  j["windows_total"] = d.windows_total;
  j["windows_skipped_by_stride"] = d.windows_skipped_by_stride;
  j["windows_dropped_empty"] = d.windows_dropped_empty;
  j["windows_emitted"] = d.windows_emitted;
  nlohmann::ordered_json t;
  for (std::size_t s = 0; s < kNumStages; ++s) t[kStageNames[s]] = d.stage_ms[s];
  t["total"] = d.total_ms;
  j["timings_ms"] = t;
  return j.dump(2) + "\n";
}

}  // namespace cbca
