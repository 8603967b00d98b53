#include "cbca/config.hpp"

#include <algorithm>
#include <set>

#include "cbca/error.hpp"
#include "cbca/json_io.hpp"

namespace cbca {
namespace {

using ojson = nlohmann::ordered_json;

ojson px(Pixel8 p) { return ojson::array({p.c0, p.c1, p.c2}); }

Pixel8 px_from(const JsonObject& o, std::string_view key, Pixel8 dflt) {
  if (!o.has(key)) return dflt;
  const auto v = o.get<std::vector<int>>(key);
  if (v.size() != 3 || std::any_of(v.begin(), v.end(), [](int c) { return c < 0 || c > 255; }))
    throw InputError("'" + o.where() + "." + std::string(key) + "' must be three integers in [0,255]");
  return {std::uint8_t(v[0]), std::uint8_t(v[1]), std::uint8_t(v[2])};
}

ojson box_json(const RoiBox& b) { return ojson::array({b.x, b.y, b.w, b.h}); }

RoiBox box_from(const JsonObject& o, std::string_view key, RoiBox dflt) {
  if (!o.has(key)) return dflt;
  const auto v = o.get<std::vector<int>>(key);
  if (v.size() != 4) throw InputError("'" + o.where() + "." + std::string(key) + "' must be [x, y, w, h]");
  return {v[0], v[1], v[2], v[3]};
}

ojson pipeline_json(const PipelineConfig& p) {
  ojson j;
  j["roi"] = {{"mode", p.roi.mode == RoiMode::Auto ? "auto" : "fixed"},
              {"box", box_json(p.roi.box)},
              {"min_area_frac", p.roi.min_area_frac}};
  j["hsv_clip_lo"] = p.hsv_clip_lo;
  j["hsv_clip_hi"] = p.hsv_clip_hi;
  j["inpaint_bright"] = p.inpaint_bright;
  j["bright_lo"] = px(p.bright.lo);
  j["bright_hi"] = px(p.bright.hi);
  j["inpaint_radius"] = p.inpaint_radius;
  j["clahe_clip"] = p.clahe_clip;
  j["clahe_tiles"] = ojson::array({p.clahe_tiles_x, p.clahe_tiles_y});
  j["bilateral_diameter"] = p.bilateral_diameter;
  j["bilateral_sigma_color"] = p.bilateral_sigma_color;
  j["bilateral_sigma_space"] = p.bilateral_sigma_space;
  j["keep_lo"] = px(p.keep_lo);
  j["keep_hi"] = px(p.keep_hi);
  j["adaptive_threshold"] = p.adaptive_threshold;
  j["adaptive_block"] = p.adaptive_block;
  j["adaptive_c"] = p.adaptive_c;
  j["fps"] = p.fps;
  j["window_stride_sec"] = p.window_stride_sec;
  return j;
}

PipelineConfig pipeline_from(const JsonObject& o) {
  o.allow_only({"roi", "hsv_clip_lo", "hsv_clip_hi", "inpaint_bright", "bright_lo", "bright_hi", "inpaint_radius",
                "clahe_clip", "clahe_tiles", "bilateral_diameter", "bilateral_sigma_color", "bilateral_sigma_space",
                "keep_lo", "keep_hi", "adaptive_threshold", "adaptive_block", "adaptive_c", "fps",
                "window_stride_sec"});
  PipelineConfig p;
  if (o.has("roi")) {
    const auto r = o.child("roi");
    r.allow_only({"mode", "box", "min_area_frac"});
    if (r.has("mode")) {
      const auto m = r.get<std::string>("mode");
      if (m == "auto")
        p.roi.mode = RoiMode::Auto;
      else if (m == "fixed")
        p.roi.mode = RoiMode::Fixed;
      else
        throw InputError("'" + r.where() + ".mode' must be \"fixed\" or \"auto\"");
    }
    p.roi.box = box_from(r, "box", p.roi.box);
    r.maybe("min_area_frac", p.roi.min_area_frac);
  }
  o.maybe("hsv_clip_lo", p.hsv_clip_lo);
  o.maybe("hsv_clip_hi", p.hsv_clip_hi);
  o.maybe("inpaint_bright", p.inpaint_bright);
  p.bright.lo = px_from(o, "bright_lo", p.bright.lo);
  p.bright.hi = px_from(o, "bright_hi", p.bright.hi);
  o.maybe("inpaint_radius", p.inpaint_radius);
  o.maybe("clahe_clip", p.clahe_clip);
  if (o.has("clahe_tiles")) {
    const auto t = o.get<std::vector<int>>("clahe_tiles");
    if (t.size() != 2) throw InputError("'" + o.where() + ".clahe_tiles' must be [x, y]");
    p.clahe_tiles_x = t[0];
    p.clahe_tiles_y = t[1];
  }
  o.maybe("bilateral_diameter", p.bilateral_diameter);
  o.maybe("bilateral_sigma_color", p.bilateral_sigma_color);
  o.maybe("bilateral_sigma_space", p.bilateral_sigma_space);
  p.keep_lo = px_from(o, "keep_lo", p.keep_lo);
  p.keep_hi = px_from(o, "keep_hi", p.keep_hi);
  o.maybe("adaptive_threshold", p.adaptive_threshold);
  o.maybe("adaptive_block", p.adaptive_block);
  o.maybe("adaptive_c", p.adaptive_c);
  o.maybe("fps", p.fps);
  o.maybe("window_stride_sec", p.window_stride_sec);
  return p;
}

ojson scene_json(const SceneSpec& s) {
  ojson j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["vessel"] = box_json(s.vessel);
  j["base_hue"] = s.base_hue;
  j["s0"] = s.s0;
  j["sat_gain"] = s.sat_gain;
  j["v0"] = s.v0;
  j["law"] = s.law == ColorLaw::Log ? "log" : "linear";
  j["bubble_count"] = s.bubble_count;
  j["bubble_r_min"] = s.bubble_r_min;
  j["bubble_r_max"] = s.bubble_r_max;
  j["highlight_count"] = s.highlight_count;
  j["highlight_r_min"] = s.highlight_r_min;
  j["highlight_r_max"] = s.highlight_r_max;
  j["noise_sd"] = s.noise_sd;
  j["background"] = px(s.background);
  return j;
}

SceneSpec scene_from(const JsonObject& o, SceneSpec s) {
  o.allow_only({"width", "height", "vessel", "base_hue", "s0", "sat_gain", "v0", "law", "bubble_count", "bubble_r_min",
                "bubble_r_max", "highlight_count", "highlight_r_min", "highlight_r_max", "noise_sd", "background"});
  o.maybe("width", s.width);
  o.maybe("height", s.height);
  s.vessel = box_from(o, "vessel", s.vessel);
  o.maybe("base_hue", s.base_hue);
  o.maybe("s0", s.s0);
  o.maybe("sat_gain", s.sat_gain);
  o.maybe("v0", s.v0);
  if (o.has("law")) {
    const auto l = o.get<std::string>("law");
    if (l == "linear")
      s.law = ColorLaw::Linear;
    else if (l == "log")
      s.law = ColorLaw::Log;
    else
      throw InputError("'" + o.where() + ".law' must be \"linear\" or \"log\"");
  }
  o.maybe("bubble_count", s.bubble_count);
  o.maybe("bubble_r_min", s.bubble_r_min);
  o.maybe("bubble_r_max", s.bubble_r_max);
  o.maybe("highlight_count", s.highlight_count);
  o.maybe("highlight_r_min", s.highlight_r_min);
  o.maybe("highlight_r_max", s.highlight_r_max);
  o.maybe("noise_sd", s.noise_sd);
  s.background = px_from(o, "background", s.background);
  return s;
}

ojson dataset_json(const DatasetSpec& d) {
  ojson j;
  j["times_min"] = d.times_min;
  j["n_timepoints"] = d.n_timepoints;
  j["t_first_min"] = d.t_first_min;
  j["t_last_min"] = d.t_last_min;
  j["slope"] = d.slope;
  j["fps"] = d.fps;
  j["frames_per_timepoint"] = d.frames_per_timepoint;
  j["scene"] = scene_json(d.scene);
  j["titration_times_min"] = d.titration_times_min;
  j["replicates"] = d.replicates;
  j["normality"] = d.normality;
  j["v_sample_ml"] = d.v_sample_ml;
  j["titration_noise_ml"] = d.titration_noise_ml;
  return j;
}

DatasetSpec dataset_from(const JsonObject& o) {
  o.allow_only({"times_min", "n_timepoints", "t_first_min", "t_last_min", "slope", "fps", "frames_per_timepoint", "scene",
                "titration_times_min", "replicates", "normality", "v_sample_ml", "titration_noise_ml"});
  DatasetSpec d = AppConfig::default_dataset();
  o.maybe("times_min", d.times_min);
  o.maybe("n_timepoints", d.n_timepoints);
  o.maybe("t_first_min", d.t_first_min);
  o.maybe("t_last_min", d.t_last_min);
  o.maybe("slope", d.slope);
  o.maybe("fps", d.fps);
  o.maybe("frames_per_timepoint", d.frames_per_timepoint);
  if (o.has("scene")) d.scene = scene_from(o.child("scene"), d.scene);
  o.maybe("titration_times_min", d.titration_times_min);
  o.maybe("replicates", d.replicates);
  o.maybe("normality", d.normality);
  o.maybe("v_sample_ml", d.v_sample_ml);
  o.maybe("titration_noise_ml", d.titration_noise_ml);
  return d;
}

// Model hyperparameters without the per-model seeds, which come from seeds.model.
ojson model_json(const ModelSpec& s) {
  ojson j = spec_to_json(s);
  j.erase("kind");
  j["forest"].erase("seed");
  j["mlp"].erase("seed");
  return j;
}

ModelSpec model_from(const nlohmann::json& j) {
  const JsonObject o(j, "model");
  o.allow_only({"ridge", "forest", "gboost", "mlp"});
  for (const char* k : {"forest", "mlp"})
    if (o.has(k) && o.child(k).has("seed"))
      throw InputError("'model." + std::string(k) + ".seed' is not configurable; set seeds.model instead");
  return spec_from_json(j, "model");
}

template <typename E, std::size_t N>
E enum_from(const std::string& s, const std::array<std::string_view, N>& names, const std::string& where) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return E(i);
  std::string all;
  for (auto n : names) all += (all.empty() ? "" : ", ") + std::string(n);
  throw InputError("'" + where + "' must be one of: " + all);
}

constexpr std::array<std::string_view, 3> kFeatureModes = {"all", "top_k", "paper"};
constexpr std::array<std::string_view, 2> kLabelModes = {"global", "piecewise"};

}  // namespace

std::string_view feature_mode_name(FeatureMode m) { return kFeatureModes[std::size_t(m)]; }
std::string_view label_mode_name(LabelMode m) { return kLabelModes[std::size_t(m)]; }

DatasetSpec AppConfig::default_dataset() {
  DatasetSpec d;
  d.n_timepoints = 180;  // one feature row per 6 s of video
  d.scene.noise_sd = 2.0;
  d.scene.bubble_count = 2;
  d.scene.highlight_count = 2;
  d.titration_noise_ml = 0.02;
  return d;
}

ModelSpec AppConfig::spec_for(ModelKind kind) const {
  ModelSpec s = model;
  s.kind = kind;
  s.forest.seed = model_seed;
  s.mlp.seed = model_seed;
  return s;
}

DatasetSpec AppConfig::dataset_spec() const {
  DatasetSpec d = dataset;
  d.seed = data_seed;
  return d;
}

void AppConfig::validate() const {
  try {
    pipeline.validate();
    dataset_spec().validate();
    spec_for(ModelKind::Ols).validate();
  } catch (const InvalidArgument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (top_k < 1 || top_k > int(kNumFeatures)) throw InputError("config: features.k must be in [1, 9]");
  if (models.empty()) throw InputError("config: train.models must not be empty");
  if (std::set<ModelKind>(models.begin(), models.end()).size() != models.size())
    throw InputError("config: train.models has duplicates");
  if (cv_folds < 2) throw InputError("config: train.cv_folds must be >= 2");
}

nlohmann::ordered_json config_to_json(const AppConfig& c) {
  ojson j;
  j["seeds"] = {{"data", c.data_seed}, {"model", c.model_seed}};
  j["pipeline"] = pipeline_json(c.pipeline);
  j["synth"] = dataset_json(c.dataset);
  j["features"] = {{"mode", feature_mode_name(c.feature_mode)}, {"k", c.top_k}};
  j["labels"] = {{"mode", label_mode_name(c.label_mode)}};
  ojson models = ojson::array();
  for (auto k : c.models) models.push_back(model_kind_name(k));
  j["train"] = {{"models", models}, {"cv_folds", c.cv_folds}};
  j["model"] = model_json(c.model);
  return j;
}

AppConfig config_from_json(const nlohmann::json& j) {
  const JsonObject o(j, "");
  o.allow_only({"seeds", "pipeline", "synth", "features", "labels", "train", "model"});
  AppConfig c;
  if (o.has("seeds")) {
    const auto s = o.child("seeds");
    s.allow_only({"data", "model"});
    s.maybe("data", c.data_seed);
    s.maybe("model", c.model_seed);
  }
  if (o.has("pipeline")) c.pipeline = pipeline_from(o.child("pipeline"));
  if (o.has("synth")) c.dataset = dataset_from(o.child("synth"));
  if (o.has("features")) {
    const auto f = o.child("features");
    f.allow_only({"mode", "k"});
    if (f.has("mode")) c.feature_mode = enum_from<FeatureMode>(f.get<std::string>("mode"), kFeatureModes, "features.mode");
    f.maybe("k", c.top_k);
  }
  if (o.has("labels")) {
    const auto l = o.child("labels");
    l.allow_only({"mode"});
    if (l.has("mode")) c.label_mode = enum_from<LabelMode>(l.get<std::string>("mode"), kLabelModes, "labels.mode");
  }
  if (o.has("train")) {
    const auto t = o.child("train");
    t.allow_only({"models", "cv_folds"});
    if (t.has("models")) {
      c.models.clear();
      for (const auto& name : t.get<std::vector<std::string>>("models")) c.models.push_back(parse_model_kind(name));
    }
    t.maybe("cv_folds", c.cv_folds);
  }
  if (o.has("model")) c.model = model_from(j.at("model"));
  c.validate();
  return c;
}

AppConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

}  // namespace cbca
