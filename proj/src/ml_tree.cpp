#include <algorithm>
#include <numeric>

#include "cbca/error.hpp"
#include "cbca/ml.hpp"
#include "cbca/rng.hpp"

namespace cbca {
namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Vector& y, int max_depth, int min_leaf)
      : x_(x), y_(y), max_depth_(max_depth), min_leaf_(std::max(1, min_leaf)) {}

  Tree build(std::vector<std::size_t> samples) {
    Tree t;
    nodes_ = &t.nodes;
    grow(samples, 0);
    return t;
  }

 private:
  int grow(std::vector<std::size_t>& s, int depth) {
    const int id = int(nodes_->size());
    nodes_->emplace_back();
    double sum = 0.0;
    for (auto i : s) sum += y_(Eigen::Index(i));
    (*nodes_)[id].value = sum / double(s.size());

    const bool pure = std::all_of(s.begin(), s.end(), [&](std::size_t i) { return y_(Eigen::Index(i)) == y_(Eigen::Index(s[0])); });
    if (pure || (max_depth_ >= 0 && depth >= max_depth_) || s.size() < 2 * std::size_t(min_leaf_)) return id;

    // Maximize sum_l^2/n_l + sum_r^2/n_r, which is the SSE reduction up to a constant.
    int best_f = -1;
    double best_thr = 0.0, best_gain = -1.0;
    std::vector<std::size_t> order(s);
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x_(Eigen::Index(a), f) < x_(Eigen::Index(b), f);
      });
      double left = 0.0;
      const std::size_t n = order.size();
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left += y_(Eigen::Index(order[i]));
        const double a = x_(Eigen::Index(order[i]), f), b = x_(Eigen::Index(order[i + 1]), f);
        if (a == b) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < std::size_t(min_leaf_) || nr < std::size_t(min_leaf_)) continue;
        const double right = sum - left;
        const double gain = left * left / double(nl) + right * right / double(nr);
        if (gain > best_gain) {
          best_gain = gain;
          best_f = int(f);
          const double mid = a + (b - a) / 2.0;
          best_thr = mid < b ? mid : a;
        }
      }
    }
    if (best_f < 0) return id;

    std::vector<std::size_t> l, r;
    for (auto i : s) (x_(Eigen::Index(i), best_f) <= best_thr ? l : r).push_back(i);
    s.clear();
    s.shrink_to_fit();
    (*nodes_)[id].feature = best_f;
    (*nodes_)[id].threshold = best_thr;
    const int li = grow(l, depth + 1);
    (*nodes_)[id].left = li;
    const int ri = grow(r, depth + 1);
    (*nodes_)[id].right = ri;
    return id;
  }

  const Matrix& x_;
  const Vector& y_;
  int max_depth_;
  int min_leaf_;
  std::vector<TreeNode>* nodes_ = nullptr;
};

void check_xy(const Matrix& x, const Vector& y, const char* who) {
  if (x.rows() == 0 || x.rows() != y.size()) throw InvalidArgument(std::string(who) + ": empty or mismatched data");
}

}  // namespace

double Tree::predict(const Matrix& x, Eigen::Index row) const {
  int i = 0;
  while (nodes[i].feature >= 0) i = x(row, nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

Tree fit_tree(const Matrix& x, const Vector& y, const std::vector<std::size_t>& samples, int max_depth,
              int min_samples_leaf) {
  check_xy(x, y, "fit_tree");
  if (samples.empty()) throw InvalidArgument("fit_tree: no samples");
  return TreeBuilder(x, y, max_depth, min_samples_leaf).build(samples);
}

ForestModel fit_forest(const Matrix& x, const Vector& y, const ForestSpec& spec) {
  check_xy(x, y, "fit_forest");
  if (spec.n_trees < 1) throw InvalidArgument("fit_forest: n_trees must be >= 1");
  const std::size_t n = std::size_t(x.rows());
  ForestModel m;
  m.trees.resize(std::size_t(spec.n_trees));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < spec.n_trees; ++t) {
    Rng rng(derive_seed(spec.seed, std::uint64_t(t)));
    std::vector<std::size_t> boot(n);
    for (auto& b : boot) b = rng.below(n);
    m.trees[std::size_t(t)] = TreeBuilder(x, y, -1, spec.min_samples_leaf).build(std::move(boot));
  }
  return m;
}

GBoostModel fit_gboost(const Matrix& x, const Vector& y, const GBoostSpec& spec) {
  check_xy(x, y, "fit_gboost");
  if (spec.n_stages < 0 || !(spec.learning_rate > 0.0) || spec.max_depth < 1)
    throw InvalidArgument("fit_gboost: bad stage count, learning rate or depth");
  const Eigen::Index n = x.rows();
  GBoostModel m;
  m.learning_rate = spec.learning_rate;
  m.init = y.mean();
  Vector f = Vector::Constant(n, m.init);
  m.stage_loss.push_back((y - f).squaredNorm() / double(n));
  std::vector<std::size_t> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  for (int s = 0; s < spec.n_stages; ++s) {
    const Vector resid = y - f;
    Tree t = TreeBuilder(x, resid, spec.max_depth, 1).build(all);
    for (Eigen::Index i = 0; i < n; ++i) f(i) += m.learning_rate * t.predict(x, i);
    m.trees.push_back(std::move(t));
    m.stage_loss.push_back((y - f).squaredNorm() / double(n));
  }
  return m;
}

Vector gboost_staged_predict(const GBoostModel& model, const Matrix& x, int stages) {
  if (stages < 0 || std::size_t(stages) > model.trees.size()) throw InvalidArgument("gboost_staged_predict: bad stage count");
  Vector out = Vector::Constant(x.rows(), model.init);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (int s = 0; s < stages; ++s) out(i) += model.learning_rate * model.trees[std::size_t(s)].predict(x, i);
  return out;
}

}  // namespace cbca
