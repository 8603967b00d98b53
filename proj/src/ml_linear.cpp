#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "cbca/error.hpp"
#include "cbca/ml.hpp"

namespace cbca {

LinearModel fit_ols(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size() || x.rows() == 0) throw InvalidArgument("fit_ols: empty or mismatched data");
  const Eigen::Index n = x.rows(), p = x.cols();
  Matrix a(n, p + 1);
  a.col(0).setOnes();
  a.rightCols(p) = x;
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (qr.rank() < p + 1)
    throw SingularSystem("fit_ols: design matrix has rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(p + 1) + " (collinear or too few rows)");
  const Vector sol = qr.solve(y);
  LinearModel m;
  m.intercept = sol(0);
  m.coef = sol.tail(p);
  return m;
}

LinearModel fit_ridge(const Matrix& x, const Vector& y, double alpha) {
  if (x.rows() != y.size() || x.rows() == 0) throw InvalidArgument("fit_ridge: empty or mismatched data");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("fit_ridge: alpha must be finite and >= 0");
  const Eigen::RowVectorXd xm = x.colwise().mean();
  const double ym = y.mean();
  const Matrix xc = x.rowwise() - xm;
  const Vector yc = y.array() - ym;
  Matrix gram = xc.transpose() * xc;
  gram.diagonal().array() += alpha;
  LinearModel m;
  m.alpha = alpha;
  m.coef = gram.ldlt().solve(xc.transpose() * yc);
  m.intercept = ym - xm.dot(m.coef);
  return m;
}

double select_ridge_alpha(const Matrix& x, const Vector& y, const RidgeSpec& spec) {
  if (spec.alpha_grid.empty()) throw InvalidArgument("select_ridge_alpha: empty alpha grid");
  const Eigen::Index n = x.rows();
  if (n < 2) throw InvalidArgument("select_ridge_alpha: need at least 2 rows");
  std::vector<double> grid = spec.alpha_grid;
  std::sort(grid.begin(), grid.end());
  const Eigen::Index k = std::min<Eigen::Index>(spec.inner_folds, n);

  double best_alpha = grid.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (double alpha : grid) {
    double sum = 0.0;
    int used = 0;
    Eigen::Index start = 0;
    for (Eigen::Index f = 0; f < k; ++f) {
      const Eigen::Index len = n / k + (f < n % k ? 1 : 0);
      std::vector<std::size_t> tr, te;
      for (Eigen::Index i = 0; i < n; ++i) (i >= start && i < start + len ? te : tr).push_back(std::size_t(i));
      start += len;
      const auto m = fit_ridge(take_rows(x, tr), take_rows(y, tr), alpha);
      const Vector pred = predict_params(m, take_rows(x, te));
      if (const auto r2 = metrics(take_rows(y, te), pred).r2) {
        sum += *r2;
        ++used;
      }
    }
    const double score = used ? sum / used : -std::numeric_limits<double>::infinity();
    if (score > best_score) {
      best_score = score;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

}  // namespace cbca
