#include "radkin/manifold.hpp"

#include <algorithm>
#include <cmath>

namespace radkin {

namespace {

constexpr double kLambdaHi = 1.0 - 1e-9;

struct Sums {
  double s1 = 0.0;    // integral of F1
  double s = 0.0;     // integral of F1 + F2
  double qbar = 0.0;  // sphere integral of Q
};

Sums sums_of(const FullState& full) {
  const auto& g = full.disc->grid;
  Sums r;
  r.s1 = integrate_velocity(g, full.f1);
  r.s = r.s1 + integrate_velocity(g, full.f2);
  r.qbar = integrate_sphere(full.disc->sphere, full.q);
  return r;
}

double g_of(const Sums& s, double l) { return s.qbar - l / (1.0 - l) - s.s1 + s.s / (1.0 + l); }

double slope_of(const Sums& s, double l) {
  return -(s.s / ((1.0 + l) * (1.0 + l)) + 1.0 / ((1.0 - l) * (1.0 - l)));
}

/// Safeguarded Newton on g over [0, kLambdaHi]. Returns the clamped root.
double solve_lambda(const Sums& s, double guess, int* iterations) {
  double lo = 0.0, hi = kLambdaHi;
  int it = 0;
  if (g_of(s, lo) <= 0.0) {
    if (iterations) *iterations = 0;
    return lo;
  }
  if (g_of(s, hi) >= 0.0) {
    if (iterations) *iterations = 0;
    return hi;
  }
  double l = std::clamp(guess, lo, hi);
  for (; it < 200; ++it) {
    const double gv = g_of(s, l);
    if (gv == 0.0) break;
    if (gv > 0.0) lo = l;
    else hi = l;
    double next = l - gv / slope_of(s, l);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - l);
    l = next;
    if (step <= 4e-16 * std::max(l, 1e-3) || hi - lo <= 4e-16) {
      ++it;
      break;
    }
  }
  if (iterations) *iterations = it;
  return l;
}

}  // namespace

double HResidual::sup() const {
  double m = std::abs(r4);
  for (double x : r1) m = std::max(m, std::abs(x));
  for (double x : r2) m = std::max(m, std::abs(x));
  for (double x : r3) m = std::max(m, std::abs(x));
  return m;
}

HResidual residual_H(const FullState& full, const Field& f, const Field& alpha, const Field& theta,
                     double lambda) {
  if (!(lambda < 1.0)) throw Error(ErrorKind::Domain, "residual_H: lambda must be below 1");
  const auto& d = *full.disc;
  const double q0 = lambda / (1.0 - lambda);
  HResidual r;
  r.r1.resize(d.grid.size());
  r.r2.resize(d.grid.size());
  r.r3.resize(d.sphere.size());
  for (std::size_t i = 0; i < d.grid.size(); ++i) {
    r.r1[i] = full.f1[i] - f[i] - alpha[i];
    r.r2[i] = full.f2[i] - lambda * f[i] + alpha[i];
  }
  for (std::size_t j = 0; j < d.sphere.size(); ++j) r.r3[j] = full.q[j] - q0 - theta[j];
  r.r4 = integrate_velocity(d.grid, alpha) - integrate_sphere(d.sphere, theta);
  return r;
}

double default_guard_radius(double kappa, double energy, double eps0) {
  return 2.0 * eps0 * kappa / (64.0 * (2.0 * eps0 + energy));
}

double default_guard_radius(const FullState& full, const Params& params) {
  const auto& g = full.disc->grid;
  double kappa = 0.0, e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    kappa += full.f1[i] + full.f2[i];
    e += (1.0 + g.speed2()[i]) * (full.f1[i] + full.f2[i]) + 2.0 * params.eps0 * full.f2[i];
  }
  kappa *= g.cell_volume();
  e = e * g.cell_volume() + 2.0 * params.eps0 * integrate_sphere(full.disc->sphere, full.q);
  return default_guard_radius(kappa, e, params.eps0);
}

double decomposition_g(const FullState& full, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw Error(ErrorKind::Domain, "decomposition_g: lambda outside [0, 1)");
  return g_of(sums_of(full), lambda);
}

double decomposition_g_slope(const FullState& full, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw Error(ErrorKind::Domain, "decomposition_g_slope: lambda outside [0, 1)");
  return slope_of(sums_of(full), lambda);
}

ManifoldState manifold_part(const FullState& full, const Params& params, int* iterations) {
  (void)params;
  const Sums s = sums_of(full);
  const double guess = s.qbar / (1.0 + s.qbar);
  const double lam = solve_lambda(s, std::isfinite(guess) ? guess : 0.5, iterations);
  ManifoldState m;
  m.disc = full.disc;
  m.lambda = lam;
  m.f.resize(full.f1.size());
  for (std::size_t i = 0; i < m.f.size(); ++i) m.f[i] = (full.f1[i] + full.f2[i]) / (1.0 + lam);
  return m;
}

DecompositionResult decompose(const FullState& full, const Params& params, const DecomposeOptions& opts) {
  full.check_finite();
  for (std::size_t i = 0; i < full.f1.size(); ++i)
    if (full.f1[i] < 0.0 || full.f2[i] < 0.0)
      throw Error(ErrorKind::Domain, "decompose: the gas rows must be nonnegative");
  for (double x : full.q)
    if (x < 0.0) throw Error(ErrorKind::Domain, "decompose: the photon row must be nonnegative");

  const Sums s = sums_of(full);
  if (!(s.s > 0.0)) throw Error(ErrorKind::Domain, "decompose: the state carries no gas");
  double guess = opts.initial_lambda ? *opts.initial_lambda : s.qbar / (1.0 + s.qbar);
  DecompositionResult out;
  if (!(g_of(s, 0.0) > 0.0) || !(g_of(s, kLambdaHi) < 0.0))
    throw Error(ErrorKind::Guard, "decompose: no root of the lambda equation in (0, 1)");
  const double lam = solve_lambda(s, guess, &out.newton_iters);

  out.m.disc = full.disc;
  out.m.lambda = lam;
  out.w.disc = full.disc;
  const std::size_t n = full.f1.size();
  out.m.f.resize(n);
  out.w.alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = (full.f1[i] + full.f2[i]) / (1.0 + lam);
    if (f < 0.0) throw Error(ErrorKind::Domain, "decompose: manifold part is not positive");
    out.m.f[i] = f;
    out.w.alpha[i] = full.f1[i] - f;
  }
  const double q0 = lam / (1.0 - lam);
  out.w.theta.resize(full.q.size());
  for (std::size_t j = 0; j < full.q.size(); ++j) out.w.theta[j] = full.q[j] - q0;

  out.residual_norm = residual_H(full, out.m.f, out.w.alpha, out.w.theta, lam).sup();
  if (opts.enforce_guard) {
    const double radius = opts.guard_radius ? *opts.guard_radius : default_guard_radius(full, params);
    const double size = norm_x(out.w);
    if (size > radius)
      throw Error(ErrorKind::Guard, "decompose: remainder norm " + std::to_string(size) +
                                        " exceeds the neighbourhood radius " + std::to_string(radius));
  }
  return out;
}

TangentProjection project_tangent(const ManifoldState& m, const Field& k1, const Field& k2, const Params& params) {
  (void)params;
  if (!(m.lambda >= 0.0 && m.lambda < 1.0)) throw Error(ErrorKind::Domain, "project_tangent: lambda outside [0, 1)");
  const auto& grid = m.disc->grid;
  const double lam = m.lambda;
  const double x = integrate_velocity(grid, k1);
  const double om2 = (1.0 - lam) * (1.0 - lam);
  const double denom = (1.0 + lam) + om2 * integrate_velocity(grid, m.f);
  TangentProjection p;
  p.d_lambda = -om2 * (1.0 + lam) / denom * x;
  p.d_photon = -(1.0 + lam) / denom * x;
  const std::size_t n = m.f.size();
  p.d_f.resize(n);
  p.d_lambda_f.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sum = (k1[i] + k2[i]) / (1.0 + lam);
    p.d_f[i] = sum + om2 * m.f[i] / denom * x;
    p.d_lambda_f[i] = lam * sum - om2 * m.f[i] / denom * x;
  }
  return p;
}

bool orthogonal_structure_check(const Remainder& w, double tol) {
  const double a = integrate_velocity(w.disc->grid, w.alpha);
  const double t = integrate_sphere(w.disc->sphere, w.theta);
  return std::abs(a - t) <= tol;
}

double test_functional_A(double lambda, const Field& phi, double eta, const Field& f, const Field& g,
                         const Field& h, const Discretization& disc) {
  const double c = (1.0 - lambda) * (1.0 - lambda) * eta;
  double s = 0.0;
  for (std::size_t i = 0; i < disc.grid.size(); ++i) s += phi[i] * f[i] + (phi[i] + c) * g[i];
  return s * disc.grid.cell_volume() + c * integrate_sphere(disc.sphere, h);
}

}  // namespace radkin
