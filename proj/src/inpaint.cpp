#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "cbca/color_space.hpp"
#include "cbca/kernels.hpp"

namespace cbca::kernels {
namespace {

enum class State : std::uint8_t { Known, Band, Inside };

constexpr double kFar = 1.0e6;

class FastMarching {
 public:
  FastMarching(const Image& img, const Mask& holes, int radius)
      : w_(img.width()), h_(img.height()), radius_(radius), out_(img) {
    const std::size_t n = img.size();
    state_.assign(n, State::Known);
    t_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (holes[i]) {
        state_[i] = State::Inside;
        t_[i] = kFar;
      }
    }
    // Initial front: known pixels touching a hole.
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) {
        const std::size_t i = index(x, y);
        if (state_[i] != State::Known) continue;
        if (is_inside(x - 1, y) || is_inside(x + 1, y) || is_inside(x, y - 1) || is_inside(x, y + 1)) {
          state_[i] = State::Band;
          heap_.push({0.0, i});
        }
      }
  }

  Image run() {
    static constexpr int kDx[4] = {0, -1, 1, 0};
    static constexpr int kDy[4] = {-1, 0, 0, 1};
    while (!heap_.empty()) {
      const std::size_t i = heap_.top().index;
      heap_.pop();
      state_[i] = State::Known;
      const int x = static_cast<int>(i % w_), y = static_cast<int>(i / w_);
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kDx[k], ny = y + kDy[k];
        if (!in_bounds(nx, ny)) continue;
        const std::size_t j = index(nx, ny);
        if (state_[j] != State::Inside) continue;
        t_[j] = std::min({solve(nx, ny - 1, nx - 1, ny), solve(nx, ny + 1, nx - 1, ny),
                          solve(nx, ny - 1, nx + 1, ny), solve(nx, ny + 1, nx + 1, ny)});
        fill(nx, ny);  // while still Inside, so its own stale value is never sampled
        state_[j] = State::Band;
        heap_.push({t_[j], j});
      }
    }
    return std::move(out_);
  }

 private:
  struct Entry {
    double t;
    std::size_t index;
    bool operator>(const Entry& o) const { return std::tie(t, index) > std::tie(o.t, o.index); }
  };

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < w_ && y < h_; }
  bool is_inside(int x, int y) const { return in_bounds(x, y) && state_[index(x, y)] == State::Inside; }
  bool usable(int x, int y) const { return in_bounds(x, y) && state_[index(x, y)] != State::Inside; }

  // Upwind solution of |grad T| = 1 from two perpendicular neighbours.
  double solve(int x1, int y1, int x2, int y2) const {
    const bool a = usable(x1, y1), b = usable(x2, y2);
    if (!a && !b) return kFar;
    const double ta = a ? t_[index(x1, y1)] : kFar;
    const double tb = b ? t_[index(x2, y2)] : kFar;
    if (!a) return tb + 1.0;
    if (!b) return ta + 1.0;
    const double d = ta - tb;
    const double s = 2.0 - d * d;
    if (s > 0.0) {
      const double r = 0.5 * (ta + tb + std::sqrt(s));
      if (r >= ta && r >= tb) return r;
    }
    return std::min(ta, tb) + 1.0;
  }

  double t_grad(int x, int y, int dx, int dy) const {
    const bool fwd = usable(x + dx, y + dy), bwd = usable(x - dx, y - dy);
    const double tc = t_[index(x, y)];
    if (fwd && bwd) return 0.5 * (t_[index(x + dx, y + dy)] - t_[index(x - dx, y - dy)]);
    if (fwd) return t_[index(x + dx, y + dy)] - tc;
    if (bwd) return tc - t_[index(x - dx, y - dy)];
    return 0.0;
  }

  double i_grad(int x, int y, int dx, int dy, int ch) const {
    const bool fwd = usable(x + dx, y + dy), bwd = usable(x - dx, y - dy);
    const double c = out_.at(x, y)[ch];
    if (fwd && bwd) return 0.5 * (out_.at(x + dx, y + dy)[ch] - out_.at(x - dx, y - dy)[ch]);
    if (fwd) return out_.at(x + dx, y + dy)[ch] - c;
    if (bwd) return c - out_.at(x - dx, y - dy)[ch];
    return 0.0;
  }

  void fill(int px, int py) {
    const double gtx = t_grad(px, py, 1, 0), gty = t_grad(px, py, 0, 1);
    const double gt_norm = std::hypot(gtx, gty);
    const double tp = t_[index(px, py)];
    double sum_w = 0.0;
    double acc[3] = {0.0, 0.0, 0.0};
    for (int qy = py - radius_; qy <= py + radius_; ++qy) {
      for (int qx = px - radius_; qx <= px + radius_; ++qx) {
        if (!usable(qx, qy) || (qx == px && qy == py)) continue;
        const int rx = px - qx, ry = py - qy;
        const double len2 = rx * rx + ry * ry;
        if (len2 > radius_ * radius_) continue;
        const double len = std::sqrt(len2);
        double dir = gt_norm > 0.0 ? std::abs(rx * gtx + ry * gty) / (len * gt_norm) : 1.0;
        if (dir < 1e-6) dir = 1e-6;
        const double dst = 1.0 / len2;
        const double lev = 1.0 / (1.0 + std::abs(t_[index(qx, qy)] - tp));
        const double wgt = dir * dst * lev;
        sum_w += wgt;
        for (int ch = 0; ch < 3; ++ch) {
          const double est = out_.at(qx, qy)[ch] + i_grad(qx, qy, 1, 0, ch) * rx + i_grad(qx, qy, 0, 1, ch) * ry;
          acc[ch] += wgt * est;
        }
      }
    }
    if (sum_w <= 0.0) return;
    Pixel8& p = out_.at(px, py);
    for (int ch = 0; ch < 3; ++ch) p[ch] = round_to_u8(acc[ch] / sum_w);
  }

  int w_, h_, radius_;
  Image out_;
  std::vector<State> state_;
  std::vector<double> t_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
};

}  // namespace

Image inpaint_telea(const Image& rgb, const Mask& holes, int radius) {
  require_space(rgb, ColorSpace::Rgb, "inpaint_telea");
  require_same_dims(rgb, holes, "inpaint_telea");
  if (radius < 1) throw InvalidArgument("inpaint_telea: radius must be >= 1");
  const std::size_t n_holes = holes.count();
  if (n_holes == 0) return rgb;
  if (n_holes == holes.size()) throw InvalidArgument("inpaint_telea: mask covers the entire image");
  return FastMarching(rgb, holes, radius).run();
}

}  // namespace cbca::kernels
