#include "radkin/collision.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>

#include "interp.hpp"
#include "radkin/kinematics.hpp"

namespace radkin {

namespace {
std::atomic<int> g_threads{1};
}

void set_default_threads(int threads) { g_threads = std::max(1, threads); }
int default_threads() { return g_threads; }

namespace detail {

void parallel_for_threads(int threads, const std::function<void(int)>& body) {
  if (threads <= 1) {
    body(0);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex mu;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        body(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

namespace {

/// Kernel values and sampling radii (in grid-index units) for each squared
/// integer relative displacement |e|^2 = |v - v2|^2 / h^2.
struct KernelTable {
  std::vector<double> el, b12, b34;
  std::vector<double> r_el, r12, r34;

  KernelTable(int n, double h, const Params& p, CutOff cutoff) {
    const int kmax = 3 * (n - 1) * (n - 1);
    el.resize(kmax + 1);
    b12.resize(kmax + 1);
    b34.resize(kmax + 1);
    r_el.resize(kmax + 1);
    r12.resize(kmax + 1);
    r34.resize(kmax + 1);
    const double e_idx = p.eps0 / (h * h);
    for (int k = 0; k <= kmax; ++k) {
      const double d2 = h * h * k;
      const double d = std::sqrt(d2);
      el[k] = cutoff ? std::min(d, *cutoff) : d;
      b12[k] = kernel_ne12_of(d2, p.eps0, p.c0_kernel);
      b34[k] = kernel_ne34_of(d2, p.eps0, p.c0_kernel);
      if (cutoff) {
        const double n2 = (*cutoff) * (*cutoff);
        if (d2 > n2) b12[k] = 0.0;
        const double t2 = n2 - 4.0 * p.eps0;
        if (t2 < 0.0 || d2 > t2) b34[k] = 0.0;
      }
      r_el[k] = 0.5 * std::sqrt(static_cast<double>(k));
      r12[k] = b12[k] > 0.0 ? std::sqrt(std::max(0.0, 0.25 * k - e_idx)) : 0.0;
      r34[k] = std::sqrt(0.25 * k + e_idx);
    }
  }
};

struct GainEntry {
  std::uint64_t stamp = 0;
  double gel1 = 0.0, gel2 = 0.0, g12 = 0.0, g34 = 0.0;
};

struct Partial {
  std::vector<double> gain1, gain2, loss1, loss2;
  double flux = 0.0;
};

}  // namespace

CollisionIncrement eval_K(const FullState& state, const Params& params, CutOff cutoff_n) {
  params.validate();
  state.check_finite();
  const auto& grid = state.disc->grid;
  const int n = grid.n();
  const double h = grid.spacing();
  const std::size_t total = grid.size();
  if (state.f1.size() != total || state.f2.size() != total)
    throw Error(ErrorKind::Domain, "eval_K: state does not match its grid");

  const detail::PairInterpolator interp(state);
  const detail::HalfSphere half(state.disc->sphere);
  const KernelTable kt(n, h, params, cutoff_n);
  const double* f1 = state.f1.data();
  const double* f2 = state.f2.data();
  const int smax = 2 * n - 2;
  const int threads = std::min(default_threads(), smax + 1);
  const std::size_t nh = half.omega.size();

  std::vector<Partial> parts(threads);
  detail::parallel_for_threads(threads, [&](int t) {
    Partial& pt = parts[t];
    pt.gain1.assign(total, 0.0);
    pt.gain2.assign(total, 0.0);
    pt.loss1.assign(total, 0.0);
    pt.loss2.assign(total, 0.0);
    std::vector<GainEntry> cache(kt.el.size());
    std::uint64_t stamp = 0;

    for (int sx = t; sx <= smax; sx += threads) {
      const int mx = std::min(sx, smax - sx);
      for (int sy = 0; sy <= smax; ++sy) {
        const int my = std::min(sy, smax - sy);
        for (int sz = 0; sz <= smax; ++sz) {
          const int mz = std::min(sz, smax - sz);
          ++stamp;
          const double cx = 0.5 * sx + 1.0, cy = 0.5 * sy + 1.0, cz = 0.5 * sz + 1.0;
          const Vec3 centre(-grid.half_width() + 0.5 * h * sx, -grid.half_width() + 0.5 * h * sy,
                            -grid.half_width() + 0.5 * h * sz);

          auto gains = [&](int key) -> const GainEntry& {
            GainEntry& g = cache[key];
            if (g.stamp == stamp) return g;
            g.stamp = stamp;
            g.gel1 = g.gel2 = g.g12 = g.g34 = 0.0;
            double a1, a2, b1, b2;
            if (kt.el[key] > 0.0) {
              const double r = kt.r_el[key];
              for (std::size_t j = 0; j < nh; ++j) {
                const Vec3& w = half.omega[j];
                const double ox = r * w.x, oy = r * w.y, oz = r * w.z;
                interp.at(cx + ox, cy + oy, cz + oz, a1, a2);
                interp.at(cx - ox, cy - oy, cz - oz, b1, b2);
                const double as = a1 + a2, bs = b1 + b2;
                g.gel1 += half.weight[j] * (a1 * bs + b1 * as);
                g.gel2 += half.weight[j] * (a2 * bs + b2 * as);
              }
              const double pw = interp.pair_weight(centre, h * r);
              g.gel1 *= pw;
              g.gel2 *= pw;
            }
            if (kt.b12[key] > 0.0) {
              const double r = kt.r12[key];
              for (std::size_t j = 0; j < nh; ++j) {
                const Vec3& w = half.omega[j];
                const double ox = r * w.x, oy = r * w.y, oz = r * w.z;
                interp.at(cx + ox, cy + oy, cz + oz, a1, a2);
                interp.at(cx - ox, cy - oy, cz - oz, b1, b2);
                g.g12 += half.weight[j] * (a2 * b1 + b2 * a1);
              }
              g.g12 *= interp.pair_weight(centre, h * r);
            }
            if (kt.b34[key] > 0.0) {
              const double r = kt.r34[key];
              for (std::size_t j = 0; j < nh; ++j) {
                const Vec3& w = half.omega[j];
                const double ox = r * w.x, oy = r * w.y, oz = r * w.z;
                interp.at(cx + ox, cy + oy, cz + oz, a1, a2);
                interp.at(cx - ox, cy - oy, cz - oz, b1, b2);
                g.g34 += half.weight[j] * (2.0 * a1 * b1);
              }
              g.g34 *= interp.pair_weight(centre, h * r);
            }
            return g;
          };

          for (int ex = -mx; ex <= mx; ex += 2) {
            const int ax = (sx + ex) / 2, bx = (sx - ex) / 2;
            for (int ey = -my; ey <= my; ey += 2) {
              const int ay = (sy + ey) / 2, by = (sy - ey) / 2;
              const int kxy = ex * ex + ey * ey;
              for (int ez = -mz; ez <= mz; ez += 2) {
                const int az = (sz + ez) / 2, bz = (sz - ez) / 2;
                const int key = kxy + ez * ez;
                const double el = kt.el[key], b12 = kt.b12[key], b34 = kt.b34[key];
                if (el == 0.0 && b12 == 0.0 && b34 == 0.0) continue;
                const std::size_t ia = grid.index(ax, ay, az);
                const std::size_t ib = grid.index(bx, by, bz);
                const double f1a = f1[ia], f2a = f2[ia], f1b = f1[ib], f2b = f2[ib];
                const double fsb = f1b + f2b;
                const GainEntry& g = gains(key);
                pt.gain1[ia] += el * g.gel1 + 2.0 * b12 * g.g12 + b34 * g.g34;
                pt.gain2[ia] += el * g.gel2 + b34 * g.g34;
                pt.loss1[ia] += f1a * (el * fsb + 2.0 * b12 * f1b + b34 * f2b);
                pt.loss2[ia] += f2a * (el * fsb + b34 * f1b);
                pt.flux += b12 * (g.g12 - f1a * f1b);
              }
            }
          }
        }
      }
    }
  });

  CollisionIncrement inc;
  inc.d_f1.assign(total, 0.0);
  inc.d_f2.assign(total, 0.0);
  inc.loss_f1.assign(total, 0.0);
  inc.loss_f2.assign(total, 0.0);
  const double h3 = grid.cell_volume();
  double flux = 0.0;
  for (int t = 0; t < threads; ++t) {
    const Partial& pt = parts[t];
    for (std::size_t i = 0; i < total; ++i) {
      inc.d_f1[i] += pt.gain1[i] - pt.loss1[i];
      inc.d_f2[i] += pt.gain2[i] - pt.loss2[i];
      inc.loss_f1[i] += pt.loss1[i];
      inc.loss_f2[i] += pt.loss2[i];
    }
    flux += pt.flux;
  }
  for (std::size_t i = 0; i < total; ++i) {
    inc.d_f1[i] *= h3;
    inc.d_f2[i] *= h3;
    inc.loss_f1[i] *= h3;
    inc.loss_f2[i] *= h3;
  }
  inc.excitation_flux = flux * h3 * h3;
  for (std::size_t i = 0; i < total; ++i)
    if (!std::isfinite(inc.d_f1[i]) || !std::isfinite(inc.d_f2[i]))
      throw Error(ErrorKind::Numerical, "eval_K: non-finite increment at node " + std::to_string(i));
  if (!std::isfinite(inc.excitation_flux)) throw Error(ErrorKind::Numerical, "eval_K: non-finite flux");
  return inc;
}

namespace {

/// Weak-form sweep over unordered pre-collision pairs. `Tests` evaluates all
/// test pairs at a velocity: t.eval(v, out1, out2) fills phi1, phi2 values.
template <class Tests>
std::vector<double> weak_sweep(const FullState& state, const Params& params, const Tests& tests, CutOff cutoff) {
  params.validate();
  state.check_finite();
  const auto& grid = state.disc->grid;
  const std::size_t total = grid.size();
  const std::size_t nt = tests.size();
  const detail::PairInterpolator interp(state);
  const detail::HalfSphere half(state.disc->sphere);
  const std::size_t nh = half.omega.size();
  const double h = grid.spacing();
  const double eps0 = params.eps0;

  std::vector<double> p1(total * nt), p2(total * nt);
  for (std::size_t i = 0; i < total; ++i) tests.eval(grid.node(i), &p1[i * nt], &p2[i * nt]);

  const int threads = std::max(1, std::min<int>(default_threads(), static_cast<int>(total)));
  std::vector<std::vector<double>> partial(threads, std::vector<double>(nt, 0.0));
  detail::parallel_for_threads(threads, [&](int t) {
    std::vector<double> acc(nt, 0.0);
    std::vector<double> q1a(nt), q2a(nt), q1b(nt), q2b(nt);
    for (std::size_t i1 = t; i1 < total; i1 += threads) {
      const Vec3 v1 = grid.node(i1);
      const double f11 = state.f1[i1], f21 = state.f2[i1];
      const double* ph1_1 = &p1[i1 * nt];
      const double* ph2_1 = &p2[i1 * nt];
      for (std::size_t i2 = i1 + 1; i2 < total; ++i2) {
        const Vec3 v2 = grid.node(i2);
        const double f12 = state.f1[i2], f22 = state.f2[i2];
        const double* ph1_2 = &p1[i2 * nt];
        const double* ph2_2 = &p2[i2 * nt];
        const CollisionPair pair{v1, v2};
        const Vec3 mid = (v1 + v2) * 0.5;
        const double d2 = (v1 - v2).norm2();

        // Elastic: the ordered-pair sum is twice the unordered one, and each
        // half-sphere entry carries +omega and -omega.
        const double bel = cutoff ? kernel_elastic_cutoff(pair, *cutoff) : kernel_elastic(pair);
        const double fs1 = f11 + f21, fs2 = f12 + f22;
        if (bel > 0.0 && (fs1 != 0.0 && fs2 != 0.0)) {
          const double r = 0.5 * std::sqrt(d2);
          for (std::size_t j = 0; j < nh; ++j) {
            const Vec3 o = half.omega[j] * r;
            const Vec3 v3 = mid + o, v4 = mid - o;
            tests.eval(v3, q1a.data(), q2a.data());
            tests.eval(v4, q1b.data(), q2b.data());
            const double w = half.weight[j] * bel;
            // sum_{a,b} F^a(v1) F^b(v2) [phi_a(v3) + phi_b(v4) + phi_a(v4) + phi_b(v3)
            //                            - 2 phi_a(v1) - 2 phi_b(v2)] / 2, times 2 for ordering.
            for (std::size_t k = 0; k < nt; ++k) {
              const double s1 = q1a[k] + q1b[k] - 2.0 * ph1_1[k];
              const double s2 = q2a[k] + q2b[k] - 2.0 * ph2_1[k];
              const double t1 = q1a[k] + q1b[k] - 2.0 * ph1_2[k];
              const double t2 = q2a[k] + q2b[k] - 2.0 * ph2_2[k];
              acc[k] += w * ((f11 * s1 + f21 * s2) * fs2 + fs1 * (f12 * t1 + f22 * t2));
            }
          }
        }

        // Endothermic channel: sample (v1, v2) -> (p, q) and (p, q) swapped.
        double b12 = cutoff ? kernel_ne12_cutoff(pair, eps0, params.c0_kernel, *cutoff)
                            : kernel_ne12(pair, eps0, params.c0_kernel);
        if (b12 > 0.0) {
          const double r = std::sqrt(std::max(0.0, 0.25 * d2 - eps0));
          const double f1f1 = f11 * f12;
          const double pw = interp.pair_weight(mid, r);
          for (std::size_t j = 0; j < nh; ++j) {
            const Vec3 o = half.omega[j] * r;
            const Vec3 pp = mid + o, qq = mid - o;
            double a1, a2, c1, c2;
            interp.at((pp.x + grid.half_width()) / h + 1.0, (pp.y + grid.half_width()) / h + 1.0,
                      (pp.z + grid.half_width()) / h + 1.0, a1, a2);
            interp.at((qq.x + grid.half_width()) / h + 1.0, (qq.y + grid.half_width()) / h + 1.0,
                      (qq.z + grid.half_width()) / h + 1.0, c1, c2);
            const double wp = 2.0 * half.weight[j] * b12 * (f1f1 - pw * a2 * c1);  // excited at pp
            const double wq = 2.0 * half.weight[j] * b12 * (f1f1 - pw * c2 * a1);  // excited at qq
            if (wp == 0.0 && wq == 0.0) continue;
            tests.eval(pp, q1a.data(), q2a.data());
            tests.eval(qq, q1b.data(), q2b.data());
            for (std::size_t k = 0; k < nt; ++k) {
              const double base = ph1_1[k] + ph1_2[k];
              acc[k] += wp * (q2a[k] + q1b[k] - base) + wq * (q2b[k] + q1a[k] - base);
            }
          }
        }
      }
    }
    partial[t] = acc;
  });

  std::vector<double> out(nt, 0.0);
  const double h6 = grid.cell_volume() * grid.cell_volume();
  for (int t = 0; t < threads; ++t)
    for (std::size_t k = 0; k < nt; ++k) out[k] += partial[t][k];
  for (auto& x : out) x *= h6;
  return out;
}

struct FnTests {
  const TestFn& phi1;
  const TestFn& phi2;
  std::size_t size() const { return 1; }
  void eval(const Vec3& v, double* o1, double* o2) const {
    o1[0] = phi1(v);
    o2[0] = phi2(v);
  }
};

struct QuadTests {
  const std::vector<TestPair>& tests;
  std::size_t size() const { return tests.size(); }
  void eval(const Vec3& v, double* o1, double* o2) const {
    for (std::size_t k = 0; k < tests.size(); ++k) {
      o1[k] = tests[k].phi1(v);
      o2[k] = tests[k].phi2(v);
    }
  }
};

}  // namespace

double weak_moment(const FullState& state, const Params& params, const TestFn& phi1, const TestFn& phi2,
                   CutOff cutoff_n) {
  return weak_sweep(state, params, FnTests{phi1, phi2}, cutoff_n)[0];
}

std::vector<double> weak_moments(const FullState& state, const Params& params,
                                 const std::vector<TestPair>& tests, CutOff cutoff_n) {
  if (tests.empty()) return {};
  return weak_sweep(state, params, QuadTests{tests}, cutoff_n);
}

std::array<double, 6> increment_moments(const CollisionIncrement& inc, const VelocityGrid& grid, double eps0) {
  std::array<double, 6> m{};
  const double h3 = grid.cell_volume();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 v = grid.node(i);
    const double s = inc.d_f1[i] + inc.d_f2[i];
    m[0] += s;
    m[1] += s * v.x;
    m[2] += s * v.y;
    m[3] += s * v.z;
    m[4] += inc.d_f1[i] * v.norm2() + inc.d_f2[i] * (v.norm2() + 2.0 * eps0);
    m[5] += inc.d_f2[i];
  }
  for (auto& x : m) x *= h3;
  return m;
}

namespace {

/// (F1 + F2) / (1 + |v|^2): the relative size of the correction stays bounded
/// at large speeds, where the energy row would otherwise dominate.
double correction_weight(const FullState& state, const VelocityGrid& grid, std::size_t i) {
  const double rho = std::max(0.0, state.f1[i]) + std::max(0.0, state.f2[i]);
  return rho / (1.0 + grid.speed2()[i]);
}

}  // namespace

CollisionIncrement conservative_correction(const CollisionIncrement& inc, const FullState& state,
                                           const Params& params) {
  const auto& grid = state.disc->grid;
  const std::size_t total = grid.size();
  require_finite(inc.d_f1, "d_f1");
  require_finite(inc.d_f2, "d_f2");

  // Constraint rows psi_r = (psi_r1, psi_r2) over the two gas rows, scaled by
  // a typical speed so the Gram matrix stays well conditioned. The energy row
  // has 2 eps0 times the F2 mass row subtracted, which leaves the constraint
  // set unchanged.
  const double vs = std::max(1.0, grid.half_width());
  auto psi = [&](std::size_t i, int r, int comp) -> double {
    const Vec3 v = grid.node(i);
    switch (r) {
      case 0: return 1.0;
      case 1: return v.x / vs;
      case 2: return v.y / vs;
      case 3: return v.z / vs;
      case 4: return v.norm2() / (vs * vs);
      default: return comp == 2 ? 1.0 : 0.0;
    }
  };

  CollisionIncrement out = inc;
  const auto m = increment_moments(inc, grid, params.eps0);
  Eigen::Matrix<double, 6, 1> b;
  double kinetic = 0.0;
  for (std::size_t i = 0; i < total; ++i) kinetic += (inc.d_f1[i] + inc.d_f2[i]) * grid.node(i).norm2();
  kinetic *= grid.cell_volume();
  b << -m[0], -m[1] / vs, -m[2] / vs, -m[3] / vs, (2.0 * params.eps0 * inc.excitation_flux - kinetic) / (vs * vs),
      -inc.excitation_flux - m[5];

  Eigen::Matrix<double, 6, 6> gram = Eigen::Matrix<double, 6, 6>::Zero();
  double rho_total = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double rho = correction_weight(state, grid, i);
    if (rho == 0.0) continue;
    rho_total += rho;
    for (int c = 1; c <= 2; ++c) {
      Eigen::Matrix<double, 6, 1> p;
      for (int r = 0; r < 6; ++r) p[r] = psi(i, r, c);
      gram.noalias() += rho * p * p.transpose();
    }
  }
  if (rho_total == 0.0) return out;
  gram *= grid.cell_volume();
  if (b.cwiseAbs().maxCoeff() == 0.0) return out;

  const Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix<double, 6, 6>> cod(gram);
  Eigen::Matrix<double, 6, 1> mu = cod.solve(b);
  // One step of iterative refinement.
  mu += cod.solve(b - gram * mu);

  double delta_l1 = 0.0, inc_l1 = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double rho = correction_weight(state, grid, i);
    inc_l1 += std::abs(inc.d_f1[i]) + std::abs(inc.d_f2[i]);
    if (rho == 0.0) continue;
    double d1 = 0.0, d2 = 0.0;
    for (int r = 0; r < 6; ++r) {
      d1 += mu[r] * psi(i, r, 1);
      d2 += mu[r] * psi(i, r, 2);
    }
    out.d_f1[i] += rho * d1;
    out.d_f2[i] += rho * d2;
    delta_l1 += std::abs(rho * d1) + std::abs(rho * d2);
  }
  out.correction_size = inc_l1 > 0.0 ? delta_l1 / inc_l1 : 0.0;
  return out;
}

CollisionIncrement eval_K_conservative(const FullState& state, const Params& params, CutOff cutoff_n) {
  return conservative_correction(eval_K(state, params, cutoff_n), state, params);
}

}  // namespace radkin
