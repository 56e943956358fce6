#include "radkin/limit_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "interp.hpp"
#include "radkin/kinematics.hpp"
#include "radkin/manifold.hpp"

namespace radkin {

namespace {

constexpr double kLambdaMax = 1.0 - 1e-12;
constexpr double kLambdaSlack = 1e-9;

void require_lambda(double lambda, const char* where) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw Error(ErrorKind::Domain, std::string(where) + ": lambda must lie in [0, 1)");
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Zero entries below 1e-12 of the maximum in magnitude, rescaling the rest to
/// keep the integral; larger negativity is an error.
void clamp_small_negatives(Field& f) {
  double mx = 0.0, neg = 0.0, pos = 0.0;
  for (double x : f) mx = std::max(mx, std::abs(x));
  for (double x : f) {
    if (x < 0.0) {
      if (-x > 1e-12 * mx) throw Error(ErrorKind::Numerical, "step_limit: F became negative; reduce dt");
      neg += x;
    } else {
      pos += x;
    }
  }
  if (neg == 0.0) return;
  const double scale = (pos + neg) / pos;
  for (double& x : f) x = x < 0.0 ? 0.0 : x * scale;
}

}  // namespace

FullState manifold_point(const ManifoldState& m) {
  return compose(m, Remainder::zeros(m.disc));
}

LimitRhs eval_T(const ManifoldState& m, const Params& params, CutOff cutoff_n) {
  require_lambda(m.lambda, "eval_T");
  require_finite(m.f, "F");
  const auto& grid = m.disc->grid;
  const double lam = m.lambda;
  FullState s;
  s.disc = m.disc;
  s.f1 = m.f;
  s.f2 = m.f;
  for (double& x : s.f2) x *= lam;
  s.q.assign(m.disc->sphere.size(), lam / (1.0 - lam));
  const CollisionIncrement k = eval_K_conservative(s, params, cutoff_n);
  const double x = k.excitation_flux;
  const double om2 = (1.0 - lam) * (1.0 - lam);
  const double denom = (1.0 + lam) + om2 * integrate_velocity(grid, m.f);
  LimitRhs r;
  r.flux = x;
  r.d_lambda = -om2 * (1.0 + lam) / denom * x;
  r.d_f.resize(grid.size());
  const double c = om2 / denom * x;
  for (std::size_t i = 0; i < grid.size(); ++i) r.d_f[i] = (k.d_f1[i] + k.d_f2[i]) / (1.0 + lam) + c * m.f[i];
  return r;
}

ManifoldState step_limit(const ManifoldState& m, const Params& params, double dt, CutOff cutoff_n,
                         std::vector<LambdaClampEvent>* events, double t) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "step_limit: dt must be positive");
  require_lambda(m.lambda, "step_limit");
  // RK4 on (F, lambda F, lambda/(1-lambda)), where mass, momentum and energy
  // are linear; stage values are mapped back to the manifold by the exact
  // decomposition, which leaves all three invariants unchanged.
  const std::size_t n = m.f.size();
  struct Slope {
    Field df, dlf;
    double dq = 0.0, dl = 0.0;
  };
  auto slope = [&](const ManifoldState& y) {
    const LimitRhs r = eval_T(y, params, cutoff_n);
    Slope s;
    s.df = r.d_f;
    s.dlf.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.dlf[i] = y.lambda * r.d_f[i] + r.d_lambda * y.f[i];
    s.dq = r.d_lambda / ((1.0 - y.lambda) * (1.0 - y.lambda));
    s.dl = r.d_lambda;
    return s;
  };
  const FullState base = manifold_point(m);
  auto advance = [&](std::initializer_list<std::pair<double, const Slope*>> terms) {
    FullState y = base;
    for (const auto& [a, k] : terms) {
      for (std::size_t i = 0; i < n; ++i) {
        y.f1[i] += a * k->df[i];
        y.f2[i] += a * k->dlf[i];
      }
      for (double& q : y.q) q += a * k->dq;
    }
    return y;
  };
  const Slope k1 = slope(m);
  const Slope k2 = slope(manifold_part(advance({{0.5 * dt, &k1}}), params));
  const Slope k3 = slope(manifold_part(advance({{0.5 * dt, &k2}}), params));
  const Slope k4 = slope(manifold_part(advance({{dt, &k3}}), params));
  const double w = dt / 6.0;
  FullState y = advance({{w, &k1}, {2.0 * w, &k2}, {2.0 * w, &k3}, {w, &k4}});
  y.check_finite();
  const double raw = m.lambda + w * (k1.dl + 2.0 * k2.dl + 2.0 * k3.dl + k4.dl);
  if (!std::isfinite(raw)) throw Error(ErrorKind::Numerical, "step_limit: lambda is not finite");
  if (raw < -kLambdaSlack || raw > 1.0 + kLambdaSlack)
    throw Error(ErrorKind::Numerical, "step_limit: lambda left [0, 1); the energy bound is violated");
  ManifoldState out = manifold_part(y, params);
  if (out.lambda > kLambdaMax) out.lambda = kLambdaMax;
  if ((raw < 0.0 || raw > kLambdaMax) && events) events->push_back({t + dt, raw});
  clamp_small_negatives(out.f);
  return out;
}

LimitTrajectory run_limit(const ManifoldState& initial, const Params& params, double t_end, double dt,
                          CutOff cutoff_n, int store_every) {
  if (!(t_end >= 0.0)) throw Error(ErrorKind::Domain, "run_limit: t_end must be nonnegative");
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "run_limit: dt must be positive");
  if (store_every < 1) throw Error(ErrorKind::Domain, "run_limit: store_every must be positive");
  LimitTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  traj.diagnostics.push_back(diagnose_limit(initial, params, 0.0));
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  ManifoldState y = initial;
  double t = 0.0;
  for (long k = 1; k <= steps; ++k) {
    const double h = k == steps ? t_end - t : dt;
    if (!(h > 0.0)) break;
    try {
      y = step_limit(y, params, h, cutoff_n, &traj.clamp_events, t);
    } catch (const Error& e) {
      traj.aborted = true;
      traj.abort_reason = e.what();
      traj.abort_kind = e.kind();
      return traj;
    }
    t = k == steps ? t_end : t + h;
    if (k % store_every == 0 || k == steps) {
      traj.times.push_back(t);
      traj.states.push_back(y);
      traj.diagnostics.push_back(diagnose_limit(y, params, t));
    }
  }
  return traj;
}

double mass_limit(const ManifoldState& m) {
  return (1.0 + m.lambda) * integrate_velocity(m.disc->grid, m.f);
}

Vec3 momentum_limit(const ManifoldState& m) {
  const auto& g = m.disc->grid;
  Vec3 p{};
  for (std::size_t i = 0; i < g.size(); ++i) p = p + g.node(i) * m.f[i];
  return p * ((1.0 + m.lambda) * g.cell_volume());
}

double energy_limit(const ManifoldState& m, const Params& params) {
  require_lambda(m.lambda, "energy_limit");
  const auto& g = m.disc->grid;
  const double lam = m.lambda;
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    e += ((1.0 + g.speed2()[i]) * (1.0 + lam) + 2.0 * params.eps0 * lam) * m.f[i];
  return e * g.cell_volume() + 2.0 * params.eps0 * lam / (1.0 - lam);
}

double lambda_log_term(double x) {
  if (x < 0.0 || x >= 1.0) throw Error(ErrorKind::Domain, "lambda_log_term: x must lie in [0, 1)");
  return x > 0.0 ? x / (1.0 - x) * std::log(x) : 0.0;
}

double entropy_limit(const ManifoldState& m, const Params& params) {
  require_lambda(m.lambda, "entropy_limit");
  if (params.a0 != params.b0) throw Error(ErrorKind::Domain, "entropy_limit is defined only for A0 = B0");
  const auto& g = m.disc->grid;
  const double lam = m.lambda;
  const double log_lam = lam > 0.0 ? std::log(lam) : 0.0;
  double h = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (m.f[i] < 0.0) throw Error(ErrorKind::Domain, "entropy_limit: F must be nonnegative");
    h += (1.0 + lam) * xlogx(m.f[i]) + m.f[i] * lam * log_lam;
  }
  return h * g.cell_volume() + lambda_log_term(lam) + std::log1p(-lam);
}

LimitDiagnostics diagnose_limit(const ManifoldState& m, const Params& params, double t) {
  LimitDiagnostics d;
  d.t = t;
  d.lambda = m.lambda;
  d.mass = mass_limit(m);
  d.momentum = momentum_limit(m);
  d.energy = energy_limit(m, params);
  try {
    d.entropy = entropy_limit(m, params);
  } catch (const Error&) {
    d.entropy = std::nan("");
  }
  d.l14_norm = norm_l1k(m.disc->grid, m.f, 4);
  return d;
}

double lambda_bound(double energy, double eps0) { return energy / (2.0 * eps0 + energy); }

double entropy_lower_bound(double energy, double eps0) {
  const double ce = energy + std::pow(M_PI, 1.5);
  return -2.0 * ce - energy / std::exp(1.0) - 1.0 - std::log(2.0 * eps0 / (2.0 * eps0 + energy));
}

void write_limit_csv(std::ostream& out, const LimitTrajectory& traj) {
  out << "t,lambda,mass,E,H,l14_norm\n";
  char buf[256];
  for (const auto& d : traj.diagnostics) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.t, d.lambda, d.mass, d.energy,
                  d.entropy, d.l14_norm);
    out << buf;
  }
}

double dissipation_elastic(double lambda, double b, double f1, double f2, double f3, double f4) {
  const double y = f1 * f2, z = f3 * f4;
  return 0.25 * (1.0 + lambda) * (1.0 + lambda) * b * (z - y) * std::log(y / z);
}

double dissipation_nonelastic(double lambda, double b, double f1, double f2, double f3, double f4) {
  const double y = f1 * f2, z = lambda * f3 * f4;
  return b * (z - y) * std::log(y / z);
}

std::vector<double> sample_dissipation(const ManifoldState& m, const Params& params, int samples,
                                       std::mt19937_64& rng, CutOff cutoff_n) {
  require_lambda(m.lambda, "sample_dissipation");
  const auto& grid = m.disc->grid;
  const FullState s = manifold_point(m);
  const detail::PairInterpolator interp(s);
  const double h = grid.spacing(), lw = grid.half_width();
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::normal_distribution<double> gauss;
  // Product of F at p and q via the weighted interpolant.
  auto product = [&](const Vec3& p, const Vec3& q) {
    double a1, a2, b1, b2;
    interp.at((p.x + lw) / h + 1.0, (p.y + lw) / h + 1.0, (p.z + lw) / h + 1.0, a1, a2);
    interp.at((q.x + lw) / h + 1.0, (q.y + lw) / h + 1.0, (q.z + lw) / h + 1.0, b1, b2);
    const Vec3 c = (p + q) * 0.5;
    return a1 * b1 * interp.pair_weight(c, 0.5 * (p - q).norm());
  };
  std::vector<double> out;
  out.reserve(2 * static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const std::size_t i1 = pick(rng), i2 = pick(rng);
    Vec3 w{gauss(rng), gauss(rng), gauss(rng)};
    w = w * (1.0 / w.norm());
    const Vec3 v1 = grid.node(i1), v2 = grid.node(i2);
    const double f1 = m.f[i1], f2 = m.f[i2];
    if (!(f1 > 0.0 && f2 > 0.0)) continue;
    const CollisionPair pre{v1, v2};
    const VelocityPair el = elastic_post(pre, w);
    const double z_el = product(el.first, el.second);
    if (z_el > 0.0) {
      const double b = cutoff_n ? kernel_elastic_cutoff(pre, *cutoff_n) : kernel_elastic(pre);
      // Split the post product symmetrically so the integrand sees F3 F4 exactly.
      out.push_back(dissipation_elastic(m.lambda, b, f1, f2, std::sqrt(z_el), std::sqrt(z_el)));
    }
    if (m.lambda > 0.0) {
      const auto ne = nonelastic_post(pre, w, params.eps0);
      if (ne) {
        const double z = product(ne->first, ne->second);
        if (z > 0.0) {
          const double b = cutoff_n ? kernel_ne12_cutoff(pre, params.eps0, params.c0_kernel, *cutoff_n)
                                    : kernel_ne12(pre, params.eps0, params.c0_kernel);
          out.push_back(dissipation_nonelastic(m.lambda, b, f1, f2, std::sqrt(z), std::sqrt(z)));
        }
      }
    }
  }
  return out;
}

std::pair<double, double> fast_subsystem_rhs(double rho2, double intensity, double a) {
  return {-rho2 * (intensity + 1.0) + intensity * a, intensity * (rho2 - a) + rho2};
}

std::pair<double, double> fast_subsystem_equilibrium(double a, double c0) {
  if (!(a > 0.0)) throw Error(ErrorKind::Domain, "fast subsystem needs a > 0");
  if (!(c0 >= 0.0)) throw Error(ErrorKind::Domain, "fast subsystem needs c0 >= 0");
  const double b = 1.0 - c0 + a;
  // Stable form of (-b + sqrt(b^2 + 4 c0)) / 2.
  const double disc = std::sqrt(b * b + 4.0 * c0);
  const double i_inf = b > 0.0 ? 2.0 * c0 / (b + disc) : 0.5 * (disc - b);
  return {c0 - i_inf, i_inf};
}

std::pair<double, double> integrate_fast_subsystem(double rho2, double intensity, double a, double tau_end,
                                                   double dtau) {
  if (!(dtau > 0.0) || !(tau_end >= 0.0)) throw Error(ErrorKind::Domain, "integrate_fast_subsystem: bad step");
  const long steps = static_cast<long>(std::ceil(tau_end / dtau - 1e-12));
  const double h = steps > 0 ? tau_end / steps : 0.0;
  double r = rho2, q = intensity;
  for (long k = 0; k < steps; ++k) {
    const auto [r1, q1] = fast_subsystem_rhs(r, q, a);
    const auto [r2, q2] = fast_subsystem_rhs(r + 0.5 * h * r1, q + 0.5 * h * q1, a);
    const auto [r3, q3] = fast_subsystem_rhs(r + 0.5 * h * r2, q + 0.5 * h * q2, a);
    const auto [r4, q4] = fast_subsystem_rhs(r + h * r3, q + h * q3, a);
    r += h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
    q += h / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
  }
  return {r, q};
}

double norm_limit(double lambda, const Field& f, const VelocityGrid& grid) {
  return std::abs(lambda) + norm_l1k(grid, f, 2);
}

double lipschitz_probe(const ManifoldState& m1, const ManifoldState& m2, const Params& params, CutOff cutoff_n) {
  const auto& grid = m1.disc->grid;
  Field df(m1.f.size());
  for (std::size_t i = 0; i < df.size(); ++i) df[i] = m1.f[i] - m2.f[i];
  const double den = norm_limit(m1.lambda - m2.lambda, df, grid);
  if (!(den > 0.0)) throw Error(ErrorKind::Domain, "lipschitz_probe: states are identical");
  const LimitRhs t1 = eval_T(m1, params, cutoff_n);
  const LimitRhs t2 = eval_T(m2, params, cutoff_n);
  for (std::size_t i = 0; i < df.size(); ++i) df[i] = t1.d_f[i] - t2.d_f[i];
  return norm_limit(t1.d_lambda - t2.d_lambda, df, grid) / den;
}

}  // namespace radkin
