#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "radkin/core.hpp"

namespace radkin::detail {

using V2 = double __attribute__((vector_size(16)));

/// Both gas rows on a grid padded by one zero layer, interleaved per node, so
/// that trilinear interpolation with zero extension needs one bounds test.
///
/// Stores F / M with M(v) = exp(-k |v - u|^2) fitted to the gas moments of the
/// state. Products of values at p = c + r omega and q = c - r omega then carry
/// M(p) M(q) = exp(-2k(|c-u|^2 + r^2)), independent of omega, and the rule is
/// exact for Maxwellians at the fitted temperature.
class PairInterpolator {
public:
  explicit PairInterpolator(const FullState& s) : n_(s.disc->grid.n()), np_(n_ + 2) {
    const auto& grid = s.disc->grid;
    fit_weight(s);
    data_.assign(static_cast<std::size_t>(np_) * np_ * np_, V2{0.0, 0.0});
    for (int ix = 0; ix < n_; ++ix)
      for (int iy = 0; iy < n_; ++iy)
        for (int iz = 0; iz < n_; ++iz) {
          const std::size_t g = grid.index(ix, iy, iz);
          const double inv_w = std::exp(k_ * (grid.node(g) - u_).norm2());
          data_[padded(ix + 1, iy + 1, iz + 1)] = V2{s.f1[g] * inv_w, s.f2[g] * inv_w};
        }
  }

  double weight_k() const { return k_; }
  const Vec3& weight_u() const { return u_; }

  /// M(c + r omega) M(c - r omega) for physical centre c and radius r.
  double pair_weight(const Vec3& c, double r) const {
    return k_ == 0.0 ? 1.0 : std::exp(-2.0 * k_ * ((c - u_).norm2() + r * r));
  }

  std::size_t padded(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * np_ + iy) * np_ + iz;
  }

  /// Interpolate F / M at continuous padded index coordinates (grid index + 1).
  void at(double x, double y, double z, double& f1, double& f2) const {
    const double lim = n_ + 1;
    if (!(x >= 0.0 && x < lim && y >= 0.0 && y < lim && z >= 0.0 && z < lim)) {
      f1 = 0.0;
      f2 = 0.0;
      return;
    }
    const int ix = static_cast<int>(x), iy = static_cast<int>(y), iz = static_cast<int>(z);
    const double fx = x - ix, fy = y - iy, fz = z - iz;
    const std::size_t sy = np_, sx = static_cast<std::size_t>(np_) * np_;
    const V2* c = &data_[padded(ix, iy, iz)];
    const V2 c00 = c[0] + fz * (c[1] - c[0]);
    const V2 c01 = c[sy] + fz * (c[sy + 1] - c[sy]);
    const V2 c10 = c[sx] + fz * (c[sx + 1] - c[sx]);
    const V2 c11 = c[sx + sy] + fz * (c[sx + sy + 1] - c[sx + sy]);
    const V2 c0 = c00 + fy * (c01 - c00);
    const V2 c1 = c10 + fy * (c11 - c10);
    const V2 out = c0 + fx * (c1 - c0);
    f1 = out[0];
    f2 = out[1];
  }

private:
  void fit_weight(const FullState& s) {
    const auto& grid = s.disc->grid;
    double m = 0.0, e = 0.0;
    Vec3 p{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double rho = s.f1[i] + s.f2[i];
      const Vec3 v = grid.node(i);
      m += rho;
      p = p + v * rho;
      e += rho * v.norm2();
    }
    k_ = 0.0;
    u_ = Vec3{};
    if (!(m > 0.0)) return;
    const Vec3 u = p * (1.0 / m);
    const double temp = (e / m - u.norm2()) / 3.0;
    if (!(temp > 0.0) || !std::isfinite(temp)) return;
    // Cap k so that the node weights stay far from underflow on the padded box.
    const double reach = std::sqrt(3.0) * (grid.half_width() + grid.spacing()) + u.norm();
    u_ = u;
    const double k_fit = std::min(0.5 / temp, 300.0 / (reach * reach));
    if (smooth_enough(s, k_fit)) {
      k_ = k_fit;
      return;
    }
    double lo = 0.0, hi = k_fit;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (smooth_enough(s, mid) ? lo : hi) = mid;
    }
    k_ = lo;
  }

  /// True when dividing by exp(-k |v-u|^2) makes no log step between
  /// neighbouring significant nodes larger than that of F itself or 1.
  /// Tails heavier than the fitted Maxwellian fail this: F / M then grows by
  /// large factors per cell and trilinear interpolation overshoots.
  bool smooth_enough(const FullState& s, double k) const {
    const auto& grid = s.disc->grid;
    const int n = grid.n();
    double fmax = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) fmax = std::max(fmax, s.f1[i] + s.f2[i]);
    const double floor = 1e-10 * fmax;
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz) {
          const std::size_t i = grid.index(ix, iy, iz);
          const double fi = s.f1[i] + s.f2[i];
          if (!(fi >= floor)) continue;
          const double wi = (grid.node(i) - u_).norm2();
          const int next[3][3] = {{ix + 1, iy, iz}, {ix, iy + 1, iz}, {ix, iy, iz + 1}};
          for (const auto& c : next) {
            if (c[0] >= n || c[1] >= n || c[2] >= n) continue;
            const std::size_t j = grid.index(c[0], c[1], c[2]);
            const double fj = s.f1[j] + s.f2[j];
            if (!(fj >= floor)) continue;
            const double df = std::log(fj / fi);
            const double dg = df + k * ((grid.node(j) - u_).norm2() - wi);
            if (std::abs(dg) > std::max(std::abs(df), 1.0)) return false;
          }
        }
    return true;
  }

  int n_;
  int np_;
  std::vector<V2> data_;
  double k_ = 0.0;
  Vec3 u_{};
};

/// Sphere nodes grouped into antipodal pairs: each entry stands for +omega and
/// -omega with the given weight each. Non-antipodal sets fall back to every
/// node with half its weight, which symmetrizes the rule under omega -> -omega.
struct HalfSphere {
  std::vector<Vec3> omega;
  std::vector<double> weight;

  explicit HalfSphere(const SphereQuadrature& sq) {
    bool antipodal = true;
    for (std::size_t i = 0; i < sq.size(); ++i) antipodal = antipodal && sq.antipode(i) >= 0;
    for (std::size_t i = 0; i < sq.size(); ++i) {
      if (antipodal) {
        if (static_cast<std::size_t>(sq.antipode(i)) > i) {
          omega.push_back(sq.nodes()[i]);
          weight.push_back(sq.weights()[i]);
        }
      } else {
        omega.push_back(sq.nodes()[i]);
        weight.push_back(0.5 * sq.weights()[i]);
      }
    }
  }
};

/// Run body(t) for t in [0, threads) on worker threads and join.
void parallel_for_threads(int threads, const std::function<void(int)>& body);

}  // namespace radkin::detail
