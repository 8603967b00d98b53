#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cbca/error.hpp"
#include "cbca/ml.hpp"
#include "cbca/rng.hpp"

namespace cbca {
namespace {

struct Net {
  std::vector<Matrix> w;
  std::vector<Vector> b;

  // Output row (1 x m) for column-major inputs a0 (features x m).
  Matrix forward(const Matrix& a0, std::vector<Matrix>* z, std::vector<Matrix>* a) const {
    Matrix cur = a0;
    if (a) a->push_back(cur);
    for (std::size_t l = 0; l < w.size(); ++l) {
      Matrix zl = (w[l] * cur).colwise() + b[l];
      if (z) z->push_back(zl);
      cur = l + 1 < w.size() ? Matrix(zl.cwiseMax(0.0)) : zl;
      if (a) a->push_back(cur);
    }
    return cur;
  }
};

// Adam with bias-corrected step size.
struct Adam {
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;

  Adam(const Net& net, double rate) : lr(rate) {
    for (std::size_t l = 0; l < net.w.size(); ++l) {
      mw.push_back(Matrix::Zero(net.w[l].rows(), net.w[l].cols()));
      vw.push_back(mw.back());
      mb.push_back(Vector::Zero(net.b[l].size()));
      vb.push_back(mb.back());
    }
  }

  void step(Net& net, const std::vector<Matrix>& gw, const std::vector<Vector>& gb) {
    ++t;
    const double step = lr * std::sqrt(1.0 - std::pow(beta2, double(t))) / (1.0 - std::pow(beta1, double(t)));
    for (std::size_t l = 0; l < net.w.size(); ++l) {
      mw[l] = beta1 * mw[l] + (1.0 - beta1) * gw[l];
      vw[l] = beta2 * vw[l] + (1.0 - beta2) * gw[l].cwiseProduct(gw[l]);
      net.w[l].array() -= step * mw[l].array() / (vw[l].array().sqrt() + eps);
      mb[l] = beta1 * mb[l] + (1.0 - beta1) * gb[l];
      vb[l] = beta2 * vb[l] + (1.0 - beta2) * gb[l].cwiseProduct(gb[l]);
      net.b[l].array() -= step * mb[l].array() / (vb[l].array().sqrt() + eps);
    }
  }
};

Matrix columns_of(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(x.cols(), Eigen::Index(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) out.col(Eigen::Index(j)) = x.row(Eigen::Index(rows[j])).transpose();
  return out;
}

double mse_on(const Net& net, const Matrix& xt, const Vector& y) {
  const Matrix out = net.forward(xt, nullptr, nullptr);
  return (out.row(0).transpose() - y).squaredNorm() / double(y.size());
}

}  // namespace

MlpModel fit_mlp(const Matrix& x, const Vector& y, const MlpSpec& spec) {
  if (x.rows() == 0 || x.rows() != y.size()) throw InvalidArgument("fit_mlp: empty or mismatched data");
  const std::size_t n = std::size_t(x.rows());

  // Validation rows: a seeded shuffle, the last ceil(frac * n) rows held out.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::size_t> train = idx, val;
  const bool early = spec.early_stopping && n >= 2;
  if (early) {
    Rng split_rng(derive_seed(spec.seed, 1));
    split_rng.shuffle(idx);
    const std::size_t n_val = std::min(n - 1, std::max<std::size_t>(1, std::size_t(std::ceil(spec.validation_fraction * double(n)))));
    train.assign(idx.begin(), idx.end() - std::ptrdiff_t(n_val));
    val.assign(idx.end() - std::ptrdiff_t(n_val), idx.end());
  }
  const Matrix xval = columns_of(x, val);
  const Vector yval = take_rows(y, val);

  // Glorot-uniform weights and biases.
  Net net;
  Rng init_rng(derive_seed(spec.seed, 0));
  std::vector<int> sizes{int(x.cols())};
  sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
  sizes.push_back(1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = std::sqrt(6.0 / double(sizes[l] + sizes[l + 1]));
    Matrix w(sizes[l + 1], sizes[l]);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = init_rng.uniform(-bound, bound);
    Vector b(sizes[l + 1]);
    for (auto& v : b) v = init_rng.uniform(-bound, bound);
    net.w.push_back(std::move(w));
    net.b.push_back(std::move(b));
  }

  Adam adam(net, spec.learning_rate);
  Rng epoch_rng(derive_seed(spec.seed, 2));
  const std::size_t batch = std::min<std::size_t>(std::size_t(std::max(1, spec.batch_size)), train.size());
  const std::size_t layers = net.w.size();

  Net best = net;
  double best_loss = std::numeric_limits<double>::infinity();
  int stall = 0;
  MlpModel out;
  for (int epoch = 0; epoch < spec.max_epochs; ++epoch) {
    epoch_rng.shuffle(train);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < train.size(); start += batch) {
      const std::vector<std::size_t> rows(train.begin() + std::ptrdiff_t(start),
                                          train.begin() + std::ptrdiff_t(std::min(train.size(), start + batch)));
      const double m = double(rows.size());
      std::vector<Matrix> z, a;
      const Matrix pred = net.forward(columns_of(x, rows), &z, &a);
      const Eigen::RowVectorXd err = pred.row(0) - take_rows(y, rows).transpose();
      train_loss += 0.5 * err.squaredNorm();

      std::vector<Matrix> gw(layers);
      std::vector<Vector> gb(layers);
      Matrix delta = err / m;
      for (std::size_t l = layers; l-- > 0;) {
        gw[l] = delta * a[l].transpose() + (spec.l2 / m) * net.w[l];
        gb[l] = delta.rowwise().sum();
        if (l > 0) delta = (net.w[l].transpose() * delta).cwiseProduct((z[l - 1].array() > 0.0).cast<double>().matrix());
      }
      adam.step(net, gw, gb);
    }
    out.epochs_run = epoch + 1;

    // Validation MSE when early stopping, else mean training loss, drives the stall counter.
    const double loss = early ? mse_on(net, xval, yval) : train_loss / double(train.size());
    if (!std::isfinite(loss)) throw InvalidArgument("fit_mlp: training diverged");
    if (loss < best_loss - spec.tol)
      stall = 0;
    else
      ++stall;
    if (loss < best_loss) {
      best_loss = loss;
      best = net;
    }
    if (stall >= spec.patience) break;
  }
  out.weights = std::move(best.w);
  out.biases = std::move(best.b);
  out.best_validation_loss = best_loss;
  return out;
}

Vector predict_mlp(const MlpModel& m, const Matrix& x) {
  Net net{m.weights, m.biases};
  return net.forward(x.transpose(), nullptr, nullptr).row(0).transpose();
}

}  // namespace cbca
