#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbca/ml.hpp"
#include "cbca/pipeline.hpp"
#include "cbca/synth.hpp"

namespace cbca {

enum class FeatureMode { All, TopK, Paper };
enum class LabelMode { Global, Piecewise };

// Everything the command line can configure. Defaults reproduce the paper's settings;
// the synthetic dataset defaults add sensor noise, bubbles and highlights.
struct AppConfig {
  PipelineConfig pipeline;
  DatasetSpec dataset = default_dataset();
  FeatureMode feature_mode = FeatureMode::All;
  int top_k = 4;
  LabelMode label_mode = LabelMode::Global;
  // Per-kind hyperparameters; the kind field is unused, `models` lists what to train.
  ModelSpec model;
  std::vector<ModelKind> models{kAllModelKinds.begin(), kAllModelKinds.end()};
  int cv_folds = 5;
  std::uint64_t data_seed = 42;   // synthetic data
  std::uint64_t model_seed = 42;  // split, folds, forest, MLP

  static DatasetSpec default_dataset();

  // Model spec for one kind with the model seed applied.
  ModelSpec spec_for(ModelKind kind) const;
  // Dataset spec with the data seed applied.
  DatasetSpec dataset_spec() const;

  // Throws InputError naming the first bad field.
  void validate() const;
  friend bool operator==(const AppConfig&, const AppConfig&) = default;
};

nlohmann::ordered_json config_to_json(const AppConfig& c);
// Missing keys keep defaults; unknown keys and bad values are InputError.
AppConfig config_from_json(const nlohmann::json& j);
AppConfig load_config(const std::filesystem::path& path);

std::string_view feature_mode_name(FeatureMode m);
std::string_view label_mode_name(LabelMode m);

}  // namespace cbca
