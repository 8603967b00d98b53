#include "cbca/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>

#include <json.hpp>

#include "cbca/color_space.hpp"
#include "cbca/image_io.hpp"
#include "cbca/rng.hpp"

namespace cbca {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

void draw_disks(Image& img, Rng& rng, const RoiBox& area, int count, double r_min, double r_max, Pixel8 color) {
  for (int k = 0; k < count; ++k) {
    const double cx = rng.uniform(area.x, area.x + area.w);
    const double cy = rng.uniform(area.y, area.y + area.h);
    const double r = rng.uniform(r_min, r_max);
    const int x0 = std::max(area.x, static_cast<int>(std::floor(cx - r)));
    const int x1 = std::min(area.x + area.w - 1, static_cast<int>(std::ceil(cx + r)));
    const int y0 = std::max(area.y, static_cast<int>(std::floor(cy - r)));
    const int y1 = std::min(area.y + area.h - 1, static_cast<int>(std::ceil(cy + r)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r * r) img.at(x, y) = color;
      }
  }
}

}  // namespace

void SceneSpec::validate() const {
  require(width >= 1 && height >= 1, "scene: dimensions must be >= 1");
  require(vessel.fits(width, height), "scene: vessel must lie inside the image");
  require(concentration >= 0.0 && std::isfinite(concentration), "scene: concentration must be >= 0");
  require(base_hue >= 0.0 && base_hue < 180.0, "scene: base_hue must be in [0,180)");
  require(s0 >= 0.0 && s0 <= 255.0, "scene: s0 must be in [0,255]");
  require(sat_gain > 0.0, "scene: sat_gain must be > 0");
  require(v0 >= 0.0 && v0 <= 255.0, "scene: v0 must be in [0,255]");
  require(bubble_count >= 0 && highlight_count >= 0, "scene: artifact counts must be >= 0");
  require(bubble_r_min > 0.0 && bubble_r_min <= bubble_r_max, "scene: need 0 < bubble_r_min <= bubble_r_max");
  require(highlight_r_min > 0.0 && highlight_r_min <= highlight_r_max,
          "scene: need 0 < highlight_r_min <= highlight_r_max");
  require(noise_sd >= 0.0 && std::isfinite(noise_sd), "scene: noise_sd must be >= 0");
}

LiquidColor liquid_color(const SceneSpec& spec) {
  const double drive = spec.law == ColorLaw::Linear ? spec.concentration : std::log1p(spec.concentration);
  return {spec.base_hue, std::clamp(spec.s0 + spec.sat_gain * drive, 0.0, 255.0), spec.v0};
}

std::array<double, 3> hsv_to_rgb_real(const LiquidColor& hsv) {
  const double v = hsv.v, s = hsv.s / 255.0;
  const double h = std::fmod(hsv.h * 2.0, 360.0) / 60.0;
  const int sector = static_cast<int>(std::floor(h));
  const double f = h - sector;
  const double p = v * (1.0 - s), q = v * (1.0 - s * f), t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

std::pair<Image, SceneTruth> render_scene(const SceneSpec& spec) {
  spec.validate();
  SceneTruth truth;
  truth.hsv = liquid_color(spec);
  truth.roi = spec.vessel;
  const auto liquid = hsv_to_rgb_real(truth.hsv);
  truth.rgb = {round_to_u8(liquid[0]), round_to_u8(liquid[1]), round_to_u8(liquid[2])};
  const Pixel8 h = rgb_to_hsv(truth.rgb), l = rgb_to_lab(truth.rgb);
  truth.features = {double(truth.rgb.c0), double(truth.rgb.c1), double(truth.rgb.c2), double(h.c0), double(h.c1),
                    double(h.c2), double(l.c0), double(l.c1), double(l.c2)};

  Rng rng(spec.seed);
  Image img(spec.width, spec.height, ColorSpace::Rgb);
  const RoiBox& ves = spec.vessel;
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const bool inside = x >= ves.x && x < ves.x + ves.w && y >= ves.y && y < ves.y + ves.h;
      Pixel8& p = img.at(x, y);
      for (int ch = 0; ch < 3; ++ch) {
        double v = inside ? liquid[ch] : spec.background[ch];
        if (spec.noise_sd > 0.0) v += spec.noise_sd * rng.normal();
        p[ch] = round_to_u8(v);
      }
    }
  draw_disks(img, rng, ves, spec.bubble_count, spec.bubble_r_min, spec.bubble_r_max, {0, 0, 0});
  draw_disks(img, rng, ves, spec.highlight_count, spec.highlight_r_min, spec.highlight_r_max, {255, 255, 255});
  return {std::move(img), truth};
}

void DatasetSpec::validate() const {
  require(slope > 0.0 && std::isfinite(slope), "dataset: slope must be > 0");
  require(fps >= 1, "dataset: fps must be >= 1");
  require(frames_per_timepoint >= 1, "dataset: frames_per_timepoint must be >= 1");
  if (times_min.empty()) {
    require(n_timepoints >= 1, "dataset: n_timepoints must be >= 1");
    require(t_first_min >= 0.0 && (n_timepoints == 1 || t_first_min < t_last_min),
            "dataset: need 0 <= t_first_min < t_last_min");
  }
  const auto t = sample_times();
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(t[i] >= 0.0, "dataset: times must be >= 0");
    // Segments must not overlap on the feature time axis.
    if (i > 0) require(t[i] * 60.0 >= t[i - 1] * 60.0 + double(frames_per_timepoint) / fps,
                       "dataset: timepoints closer than one segment");
  }
  require(replicates >= 1, "dataset: replicates must be >= 1");
  require(normality > 0.0 && v_sample_ml > 0.0, "dataset: normality and v_sample_ml must be > 0");
  require(titration_noise_ml >= 0.0, "dataset: titration_noise_ml must be >= 0");
  for (double tt : titration_times_min) require(tt >= 0.0, "dataset: titration times must be >= 0");
  SceneSpec s = scene;
  s.concentration = 0.0;
  s.validate();
}

std::vector<double> DatasetSpec::sample_times() const {
  if (!times_min.empty()) return times_min;
  std::vector<double> t(static_cast<std::size_t>(n_timepoints));
  for (int i = 0; i < n_timepoints; ++i)
    t[i] = n_timepoints == 1 ? t_first_min : t_first_min + (t_last_min - t_first_min) * i / (n_timepoints - 1);
  return t;
}

DatasetSummary generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  spec.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "frames", ec);
  if (ec) throw InputError("cannot create " + (out_dir / "frames").string() + ": " + ec.message());

  const auto times = spec.sample_times();
  const int per = spec.frames_per_timepoint;
  const long n_frames = static_cast<long>(times.size()) * per;
  auto frame_name = [&](long i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "frames/t%04ld_f%03ld.ppm", i / per, i % per);
    return std::string(buf);
  };

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_frames));
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n_frames; ++i) {
    try {
      SceneSpec s = spec.scene;
      s.concentration = spec.slope * times[i / per];
      s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
      write_ppm(render_scene(s).first, out_dir / frame_name(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  nlohmann::ordered_json manifest;
  manifest["fps"] = spec.fps;
  manifest["segments"] = nlohmann::ordered_json::array();
  DatasetSummary sum;
  sum.frames = static_cast<std::size_t>(n_frames);
  for (std::size_t t = 0; t < times.size(); ++t) {
    nlohmann::ordered_json seg;
    seg["start_time"] = times[t] * 60.0;
    seg["frames"] = nlohmann::ordered_json::array();
    for (int f = 0; f < per; ++f) seg["frames"].push_back(frame_name(static_cast<long>(t) * per + f));
    manifest["segments"].push_back(seg);
    sum.labels.push_back({times[t] * 60.0, spec.slope * times[t]});
  }
  {
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    out << manifest.dump(1) << '\n';
    if (!out) throw InputError("cannot write manifest.json in " + out_dir.string());
  }

  // Titration volumes invert ox_tot = V * N * 24 / Vs.
  Rng noise(derive_seed(spec.seed, 0xC0FFEEULL));
  for (double tt : spec.titration_times_min)
    for (int r = 0; r < spec.replicates; ++r) {
      double v = spec.slope * tt * spec.v_sample_ml / (spec.normality * 24.0);
      if (spec.titration_noise_ml > 0.0) v = std::max(0.0, v + spec.titration_noise_ml * noise.normal());
      sum.titration.push_back({tt, v, spec.normality, spec.v_sample_ml, "r" + std::to_string(r + 1)});
    }
  write_titration_csv(sum.titration, out_dir / "titration.csv");
  write_labels_csv(sum.labels, out_dir / "labels.csv");
  return sum;
}

}  // namespace cbca
