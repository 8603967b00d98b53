#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "cbca/chem.hpp"
#include "cbca/features.hpp"
#include "cbca/image.hpp"
#include "cbca/roi.hpp"

namespace cbca {

enum class ColorLaw { Linear, Log };

// A vessel of liquid on a neutral background. Color values use the 8-bit HSV
// scales (hue = degrees / 2) but are real-valued until rendering.
struct SceneSpec {
  int width = 96;
  int height = 72;
  RoiBox vessel{16, 12, 64, 48};
  double concentration = 0.0;  // mg/L
  double base_hue = 15.0;
  double s0 = 40.0;
  double sat_gain = 45.0;  // S units per mg/L (Linear) or per ln(1 + c) (Log)
  double v0 = 150.0;
  ColorLaw law = ColorLaw::Linear;
  int bubble_count = 0;  // black disks
  double bubble_r_min = 2.0;
  double bubble_r_max = 4.0;
  int highlight_count = 0;  // white disks
  double highlight_r_min = 1.0;
  double highlight_r_max = 2.0;
  double noise_sd = 0.0;  // Gaussian, per RGB channel, before rounding
  Pixel8 background{128, 128, 128};
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct LiquidColor {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

struct SceneTruth {
  LiquidColor hsv;   // exact color law output
  Pixel8 rgb;        // clean liquid pixel as rendered without noise
  FeatureVector features{};  // conversions of `rgb`
  RoiBox roi;
};

LiquidColor liquid_color(const SceneSpec& spec);

// Continuous HSV (8-bit scales) to RGB in [0,255], unrounded.
std::array<double, 3> hsv_to_rgb_real(const LiquidColor& hsv);

std::pair<Image, SceneTruth> render_scene(const SceneSpec& spec);

struct DatasetSpec {
  // Explicit sampling times; when empty, n_timepoints evenly spaced over [t_first_min, t_last_min].
  std::vector<double> times_min;
  int n_timepoints = 60;
  double t_first_min = 1.485;
  double t_last_min = 18.0;
  double slope = 4.0 / 18.0;  // mg/L per minute; c(t) = slope * t
  int fps = 30;
  int frames_per_timepoint = 30;
  SceneSpec scene;  // concentration and seed are set per frame
  std::vector<double> titration_times_min{1.0, 6.0, 9.0, 14.0, 18.0};
  int replicates = 3;
  double normality = 0.05;
  double v_sample_ml = 10.0;
  double titration_noise_ml = 0.0;
  std::uint64_t seed = 42;

  void validate() const;
  std::vector<double> sample_times() const;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct DatasetSummary {
  std::vector<OxLabel> labels;  // true concentration per timepoint
  std::vector<TitrationRecord> titration;
  std::size_t frames = 0;
};

// Writes manifest.json, frames/*.ppm, titration.csv and labels.csv under out_dir.
// Each timepoint is one manifest segment starting at t_min * 60 seconds.
DatasetSummary generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

}  // namespace cbca
