#include <cstdio>
#include <fstream>
#include <sstream>

#include "cbca/error.hpp"
#include "cbca/json_io.hpp"
#include "cbca/ml.hpp"

namespace cbca {
namespace {

using ojson = nlohmann::ordered_json;

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }
Vector from_std(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), Eigen::Index(v.size())); }

ojson tree_json(const Tree& t) {
  std::vector<int> feature, left, right;
  std::vector<double> threshold, value;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  ojson j;
  j["feature"] = feature;
  j["threshold"] = threshold;
  j["left"] = left;
  j["right"] = right;
  j["value"] = value;
  return j;
}

Tree tree_from(const JsonObject& o, std::size_t n_features) {
  o.allow_only({"feature", "threshold", "left", "right", "value"});
  const auto feature = o.get<std::vector<int>>("feature");
  const auto threshold = o.get<std::vector<double>>("threshold");
  const auto left = o.get<std::vector<int>>("left");
  const auto right = o.get<std::vector<int>>("right");
  const auto value = o.get<std::vector<double>>("value");
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n)
    throw InputError("'" + o.where() + "' node arrays must be nonempty and equally long");
  Tree t;
  for (std::size_t i = 0; i < n; ++i) {
    const TreeNode node{feature[i], threshold[i], left[i], right[i], value[i]};
    // Children always follow their parent, so traversal terminates.
    const bool ok = node.feature < 0 || (std::size_t(node.feature) < n_features && node.left > int(i) &&
                                         node.right > int(i) && std::size_t(node.left) < n && std::size_t(node.right) < n);
    if (!ok) throw InputError("'" + o.where() + "' has a malformed node " + std::to_string(i));
    t.nodes.push_back(node);
  }
  return t;
}

ojson trees_json(const std::vector<Tree>& trees) {
  ojson a = ojson::array();
  for (const auto& t : trees) a.push_back(tree_json(t));
  return a;
}

std::vector<Tree> trees_from(const JsonObject& o, std::size_t n_features) {
  std::vector<Tree> out;
  for (const auto& t : o.children("trees")) out.push_back(tree_from(t, n_features));
  return out;
}

ojson params_json(const ModelParams& params) {
  return std::visit(
      [](const auto& m) -> ojson {
        using T = std::decay_t<decltype(m)>;
        ojson j;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["coef"] = to_std(m.coef);
          j["intercept"] = m.intercept;
          j["alpha"] = m.alpha;
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["trees"] = trees_json(m.trees);
        } else if constexpr (std::is_same_v<T, GBoostModel>) {
          j["init"] = m.init;
          j["learning_rate"] = m.learning_rate;
          j["stage_loss"] = m.stage_loss;
          j["trees"] = trees_json(m.trees);
        } else {
          ojson layers = ojson::array();
          for (std::size_t l = 0; l < m.weights.size(); ++l) {
            const Matrix& w = m.weights[l];
            std::vector<double> data;
            for (Eigen::Index r = 0; r < w.rows(); ++r)
              for (Eigen::Index c = 0; c < w.cols(); ++c) data.push_back(w(r, c));
            ojson layer;
            layer["rows"] = w.rows();
            layer["cols"] = w.cols();
            layer["weights"] = data;  // row-major
            layer["bias"] = to_std(m.biases[l]);
            layers.push_back(layer);
          }
          j["layers"] = layers;
          j["epochs_run"] = m.epochs_run;
          j["best_validation_loss"] = m.best_validation_loss;
        }
        return j;
      },
      params);
}

ModelParams params_from(const JsonObject& o, ModelKind kind, std::size_t p) {
  auto need_size = [&](std::size_t got, std::size_t want, const std::string& what) {
    if (got != want) throw InputError("'" + o.where() + "." + what + "' has the wrong length");
  };
  switch (kind) {
    case ModelKind::Ols:
    case ModelKind::Ridge: {
      o.allow_only({"coef", "intercept", "alpha"});
      LinearModel m;
      const auto coef = o.get<std::vector<double>>("coef");
      need_size(coef.size(), p, "coef");
      m.coef = from_std(coef);
      m.intercept = o.get<double>("intercept");
      m.alpha = o.get<double>("alpha");
      return m;
    }
    case ModelKind::Forest: {
      o.allow_only({"trees"});
      ForestModel m;
      m.trees = trees_from(o, p);
      if (m.trees.empty()) throw InputError("'" + o.where() + ".trees' is empty");
      return m;
    }
    case ModelKind::GBoost: {
      o.allow_only({"init", "learning_rate", "stage_loss", "trees"});
      GBoostModel m;
      m.init = o.get<double>("init");
      m.learning_rate = o.get<double>("learning_rate");
      m.stage_loss = o.get<std::vector<double>>("stage_loss");
      m.trees = trees_from(o, p);
      return m;
    }
    case ModelKind::Mlp: {
      o.allow_only({"layers", "epochs_run", "best_validation_loss"});
      MlpModel m;
      Eigen::Index fan_in = Eigen::Index(p);
      for (const auto& layer : o.children("layers")) {
        layer.allow_only({"rows", "cols", "weights", "bias"});
        const auto rows = layer.get<int>("rows"), cols = layer.get<int>("cols");
        const auto data = layer.get<std::vector<double>>("weights");
        const auto bias = layer.get<std::vector<double>>("bias");
        if (rows < 1 || cols != fan_in || data.size() != std::size_t(rows) * std::size_t(cols) ||
            bias.size() != std::size_t(rows))
          throw InputError("'" + layer.where() + "' has inconsistent shapes");
        Matrix w(rows, cols);
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) w(r, c) = data[std::size_t(r) * std::size_t(cols) + std::size_t(c)];
        m.weights.push_back(std::move(w));
        m.biases.push_back(from_std(bias));
        fan_in = rows;
      }
      if (m.weights.empty() || fan_in != 1) throw InputError("'" + o.where() + ".layers' must end in one output");
      m.epochs_run = o.get<int>("epochs_run");
      m.best_validation_loss = o.get<double>("best_validation_loss");
      return m;
    }
  }
  throw InputError("unreachable model kind");
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

nlohmann::ordered_json spec_to_json(const ModelSpec& s) {
  ojson j;
  j["kind"] = model_kind_name(s.kind);
  j["ridge"] = {{"alpha_grid", s.ridge.alpha_grid}, {"inner_folds", s.ridge.inner_folds}};
  j["forest"] = {{"n_trees", s.forest.n_trees}, {"seed", s.forest.seed}, {"min_samples_leaf", s.forest.min_samples_leaf}};
  j["gboost"] = {{"n_stages", s.gboost.n_stages},
                 {"learning_rate", s.gboost.learning_rate},
                 {"max_depth", s.gboost.max_depth}};
  j["mlp"] = {{"hidden", s.mlp.hidden},
              {"max_epochs", s.mlp.max_epochs},
              {"learning_rate", s.mlp.learning_rate},
              {"batch_size", s.mlp.batch_size},
              {"l2", s.mlp.l2},
              {"early_stopping", s.mlp.early_stopping},
              {"validation_fraction", s.mlp.validation_fraction},
              {"patience", s.mlp.patience},
              {"tol", s.mlp.tol},
              {"seed", s.mlp.seed}};
  return j;
}

ModelSpec spec_from_json(const nlohmann::json& j, const std::string& where) {
  const JsonObject o(j, where);
  o.allow_only({"kind", "ridge", "forest", "gboost", "mlp"});
  ModelSpec s;
  if (o.has("kind")) s.kind = parse_model_kind(o.get<std::string>("kind"));
  if (o.has("ridge")) {
    const auto r = o.child("ridge");
    r.allow_only({"alpha_grid", "inner_folds"});
    r.maybe("alpha_grid", s.ridge.alpha_grid);
    r.maybe("inner_folds", s.ridge.inner_folds);
  }
  if (o.has("forest")) {
    const auto f = o.child("forest");
    f.allow_only({"n_trees", "seed", "min_samples_leaf"});
    f.maybe("n_trees", s.forest.n_trees);
    f.maybe("seed", s.forest.seed);
    f.maybe("min_samples_leaf", s.forest.min_samples_leaf);
  }
  if (o.has("gboost")) {
    const auto g = o.child("gboost");
    g.allow_only({"n_stages", "learning_rate", "max_depth"});
    g.maybe("n_stages", s.gboost.n_stages);
    g.maybe("learning_rate", s.gboost.learning_rate);
    g.maybe("max_depth", s.gboost.max_depth);
  }
  if (o.has("mlp")) {
    const auto m = o.child("mlp");
    m.allow_only({"hidden", "max_epochs", "learning_rate", "batch_size", "l2", "early_stopping", "validation_fraction",
                  "patience", "tol", "seed"});
    m.maybe("hidden", s.mlp.hidden);
    m.maybe("max_epochs", s.mlp.max_epochs);
    m.maybe("learning_rate", s.mlp.learning_rate);
    m.maybe("batch_size", s.mlp.batch_size);
    m.maybe("l2", s.mlp.l2);
    m.maybe("early_stopping", s.mlp.early_stopping);
    m.maybe("validation_fraction", s.mlp.validation_fraction);
    m.maybe("patience", s.mlp.patience);
    m.maybe("tol", s.mlp.tol);
    m.maybe("seed", s.mlp.seed);
  }
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw InputError(e.what());
  }
  return s;
}

std::string model_to_json(const TrainedModel& m) {
  ojson j;
  j["format_version"] = kArtifactFormatVersion;
  j["spec"] = spec_to_json(m.spec);
  j["features"] = m.features;
  j["scaler"] = {{"min", to_std(m.scaler.min)}, {"max", to_std(m.scaler.max)}};
  j["params"] = params_json(m.params);
  j["data_fingerprint"] = hex64(m.data_fingerprint);
  j["train_time_ms"] = m.train_time_ms;
  return j.dump(1) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model artifact: ") + e.what());
  }
  const JsonObject o(j, "");
  const int version = o.get<int>("format_version");
  if (version != kArtifactFormatVersion)
    throw CompatibilityError("model artifact format_version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kArtifactFormatVersion) + ")");
  o.allow_only({"format_version", "spec", "features", "scaler", "params", "data_fingerprint", "train_time_ms"});
  TrainedModel m;
  m.spec = spec_from_json(j.at("spec"), "spec");
  m.features = o.get<std::vector<std::string>>("features");
  if (m.features.empty()) throw InputError("model artifact: empty feature list");
  for (const auto& f : m.features)
    if (!feature_index(f)) throw CompatibilityError("model artifact: unknown feature '" + f + "'");
  const auto sc = o.child("scaler");
  sc.allow_only({"min", "max"});
  const auto mn = sc.get<std::vector<double>>("min"), mx = sc.get<std::vector<double>>("max");
  if (mn.size() != m.features.size() || mx.size() != m.features.size())
    throw InputError("model artifact: scaler length does not match features");
  m.scaler = {from_std(mn), from_std(mx)};
  m.params = params_from(o.child("params"), m.spec.kind, m.features.size());
  const auto fp = o.get<std::string>("data_fingerprint");
  try {
    std::size_t used = 0;
    m.data_fingerprint = std::stoull(fp, &used, 16);
    if (used != fp.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InputError("model artifact: bad data_fingerprint");
  }
  m.train_time_ms = o.get<double>("train_time_ms");
  return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace cbca
