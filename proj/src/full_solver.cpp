#include "radkin/full_solver.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "radkin/radiation.hpp"

namespace radkin {

namespace {

/// y + a * x, rowwise.
FullState axpy(const FullState& y, double a, const FullState& x) {
  FullState r = y;
  for (std::size_t i = 0; i < r.f1.size(); ++i) {
    r.f1[i] += a * x.f1[i];
    r.f2[i] += a * x.f2[i];
  }
  for (std::size_t j = 0; j < r.q.size(); ++j) r.q[j] += a * x.q[j];
  return r;
}

FullState radiative_rhs(const FullState& s, const Params& params, double scale) {
  const RadiativeIncrement r = eval_R(s, params);
  FullState out;
  out.disc = s.disc;
  out.f1 = r.d_f1;
  out.f2 = r.d_f2;
  out.q = r.d_q;
  for (auto& x : out.f1) x *= scale;
  for (auto& x : out.f2) x *= scale;
  for (auto& x : out.q) x *= scale;
  return out;
}

FullState collision_rhs(const FullState& s, const Params& params, CutOff cutoff) {
  const CollisionIncrement k = eval_K_conservative(s, params, cutoff);
  FullState out;
  out.disc = s.disc;
  out.f1 = k.d_f1;
  out.f2 = k.d_f2;
  out.q.assign(s.q.size(), 0.0);
  return out;
}

/// RK4 with the four stage slopes combined.
FullState rk4(const FullState& y, double dt, const std::function<FullState(const FullState&)>& f) {
  const FullState k1 = f(y);
  const FullState k2 = f(axpy(y, 0.5 * dt, k1));
  const FullState k3 = f(axpy(y, 0.5 * dt, k2));
  const FullState k4 = f(axpy(y, dt, k3));
  FullState r = y;
  for (std::size_t i = 0; i < r.f1.size(); ++i) {
    r.f1[i] += dt / 6.0 * (k1.f1[i] + 2.0 * k2.f1[i] + 2.0 * k3.f1[i] + k4.f1[i]);
    r.f2[i] += dt / 6.0 * (k1.f2[i] + 2.0 * k2.f2[i] + 2.0 * k3.f2[i] + k4.f2[i]);
  }
  for (std::size_t j = 0; j < r.q.size(); ++j)
    r.q[j] += dt / 6.0 * (k1.q[j] + 2.0 * k2.q[j] + 2.0 * k3.q[j] + k4.q[j]);
  return r;
}

void clamp_row(Field& f, double threshold, const char* what) {
  double neg = 0.0, pos = 0.0;
  for (double x : f) {
    if (x < 0.0) {
      if (-x > threshold)
        throw Error(ErrorKind::Numerical, std::string("negative ") + what +
                                              " beyond tolerance; reduce the time step");
      neg += x;
    } else {
      pos += x;
    }
  }
  if (neg == 0.0) return;
  if (!(pos > 0.0)) throw Error(ErrorKind::Numerical, std::string("row ") + what + " has no positive mass");
  const double scale = (pos + neg) / pos;
  for (double& x : f) x = x < 0.0 ? 0.0 : x * scale;
}

double max_entry(const FullState& s) {
  double m = 0.0;
  for (double x : s.f1) m = std::max(m, std::abs(x));
  for (double x : s.f2) m = std::max(m, std::abs(x));
  for (double x : s.q) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

void clamp_negativity(FullState& s, double tol) {
  const double threshold = tol * max_entry(s);
  clamp_row(s.f1, threshold, "f1");
  clamp_row(s.f2, threshold, "f2");
  clamp_row(s.q, threshold, "q");
}

FullState full_rhs(const FullState& state, const Params& params, const FullStepOptions& opts) {
  FullState r = radiative_rhs(state, params, opts.scaled ? 1.0 / params.eps_scale : 1.0);
  if (opts.collisions) {
    const CollisionIncrement k = eval_K_conservative(state, params, opts.cutoff_n);
    for (std::size_t i = 0; i < r.f1.size(); ++i) {
      r.f1[i] += k.d_f1[i];
      r.f2[i] += k.d_f2[i];
    }
  }
  return r;
}

FullState step_full(const FullState& state, const Params& params, double dt, const FullStepOptions& opts) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "step_full: dt must be positive");
  if (opts.scaled && dt > params.eps_scale / 10.0 * (1.0 + 1e-12))
    throw Error(ErrorKind::Guard, "step_full: dt exceeds eps/10 for the scaled system");
  state.check_finite();
  FullState next = rk4(state, dt, [&](const FullState& y) { return full_rhs(y, params, opts); });
  next.check_finite();
  clamp_negativity(next, opts.negativity_tol);
  return next;
}

FullState step_full(const FullState& state, const Params& params, double dt, bool scaled, CutOff cutoff_n) {
  FullStepOptions o;
  o.scaled = scaled;
  o.cutoff_n = cutoff_n;
  return step_full(state, params, dt, o);
}

namespace {

template <class Step>
FullTrajectory integrate(const FullState& initial, const Params& params, double t_end, double dt, Step step) {
  if (!(t_end >= 0.0)) throw Error(ErrorKind::Domain, "t_end must be nonnegative");
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "dt must be positive");
  FullTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  traj.diagnostics.push_back(diagnose_full(initial, params, 0.0));
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  FullState y = initial;
  for (long k = 1; k <= steps; ++k) {
    const double t0 = traj.times.back();
    const double h = std::min(dt, t_end - t0);
    if (!(h > 0.0)) break;
    try {
      y = step(y, h);
    } catch (const Error& e) {
      traj.aborted = true;
      traj.abort_reason = e.what();
      traj.abort_kind = e.kind();
      return traj;
    }
    const double t = k == steps ? t_end : t0 + h;
    traj.times.push_back(t);
    traj.states.push_back(y);
    traj.diagnostics.push_back(diagnose_full(y, params, t));
  }
  return traj;
}

}  // namespace

FullTrajectory run_full(const FullState& initial, const Params& params, double t_end, double dt,
                        const FullStepOptions& opts) {
  return integrate(initial, params, t_end, dt,
                   [&](const FullState& y, double h) { return step_full(y, params, h, opts); });
}

FullState step_multirate(const FullState& state, const Params& params, double dt_macro, CutOff cutoff_n,
                         const SubstepObserver& observer) {
  if (!(dt_macro > 0.0)) throw Error(ErrorKind::Domain, "step_multirate: dt must be positive");
  state.check_finite();
  const double inv_eps = 1.0 / params.eps_scale;
  const long sub = std::max(1L, static_cast<long>(std::ceil(dt_macro / (params.eps_scale / 10.0) - 1e-12)));
  const double h = dt_macro / sub;

  auto fast_flow = [&](const FullState& y0, const FullState& forcing, const SubstepObserver& obs) {
    FullState y = y0;
    auto f = [&](const FullState& x) {
      FullState r = radiative_rhs(x, params, inv_eps);
      for (std::size_t i = 0; i < r.f1.size(); ++i) {
        r.f1[i] += forcing.f1[i];
        r.f2[i] += forcing.f2[i];
      }
      return r;
    };
    for (long k = 0; k < sub; ++k) {
      y = rk4(y, h, f);
      if (obs) obs(k + 1 == sub ? dt_macro : (k + 1) * h, y);
    }
    return y;
  };

  const FullState g1 = collision_rhs(state, params, cutoff_n);
  FullState pred = fast_flow(state, g1, {});
  pred.check_finite();
  clamp_negativity(pred, 1e-12);
  const FullState g2 = collision_rhs(pred, params, cutoff_n);
  FullState avg = g1;
  for (std::size_t i = 0; i < avg.f1.size(); ++i) {
    avg.f1[i] = 0.5 * (g1.f1[i] + g2.f1[i]);
    avg.f2[i] = 0.5 * (g1.f2[i] + g2.f2[i]);
  }
  FullState next = fast_flow(state, avg, observer);
  next.check_finite();
  clamp_negativity(next, 1e-12);
  return next;
}

FullTrajectory run_multirate(const FullState& initial, const Params& params, double t_end, double dt_macro,
                             CutOff cutoff_n) {
  return integrate(initial, params, t_end, dt_macro,
                   [&](const FullState& y, double h) { return step_multirate(y, params, h, cutoff_n); });
}

double mass_full(const FullState& s) {
  const auto& g = s.disc->grid;
  return integrate_velocity(g, s.f1) + integrate_velocity(g, s.f2);
}

Vec3 momentum_full(const FullState& s) {
  const auto& g = s.disc->grid;
  Vec3 p{};
  for (std::size_t i = 0; i < g.size(); ++i) p = p + g.node(i) * (s.f1[i] + s.f2[i]);
  return p * g.cell_volume();
}

double energy_full(const FullState& s, const Params& params) {
  const auto& g = s.disc->grid;
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    e += s.f1[i] * g.speed2()[i] + s.f2[i] * (g.speed2()[i] + 2.0 * params.eps0);
  return e * g.cell_volume() + 2.0 * params.eps0 * integrate_sphere(s.disc->sphere, s.q);
}

namespace {

double xlogx_checked(double x, double floor, const char* what) {
  if (x > 0.0) return x * std::log(x);
  if (x >= -floor) return 0.0;
  throw Error(ErrorKind::Domain, std::string("entropy of a negative ") + what + " entry");
}

}  // namespace

double entropy_full(const FullState& s, const Params& params, double diag_floor) {
  if (!(params.b0 > 0.0)) throw Error(ErrorKind::Domain, "entropy needs b0 > 0");
  const auto& g = s.disc->grid;
  double h = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    h += xlogx_checked(s.f1[i], diag_floor, "f1") + xlogx_checked(s.f2[i], diag_floor, "f2");
  h *= g.cell_volume();
  const double ratio = params.a0 / params.b0;
  const auto& sp = s.disc->sphere;
  for (std::size_t j = 0; j < sp.size(); ++j) {
    const double q = s.q[j];
    const double qq = xlogx_checked(q, diag_floor, "q");
    const double r = std::max(0.0, ratio + q);
    h += sp.weights()[j] * (qq - (r > 0.0 ? r * std::log(r) : 0.0));
  }
  return h;
}

FullDiagnostics diagnose_full(const FullState& s, const Params& params, double t) {
  FullDiagnostics d;
  d.t = t;
  d.kappa = mass_full(s);
  d.momentum = momentum_full(s);
  d.energy = energy_full(s, params);
  d.min_f1 = *std::min_element(s.f1.begin(), s.f1.end());
  d.min_f2 = *std::min_element(s.f2.begin(), s.f2.end());
  d.min_q = *std::min_element(s.q.begin(), s.q.end());
  try {
    d.entropy = entropy_full(s, params, 1e-300);
  } catch (const Error&) {
    d.entropy = std::nan("");
  }
  const auto& g = s.disc->grid;
  const double rad = g.half_width() - std::sqrt(2.0 * params.eps0);
  double out = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.speed2()[i] > rad * rad) out += s.f1[i] + s.f2[i];
  d.truncation = d.kappa > 0.0 ? out * g.cell_volume() / d.kappa : 0.0;
  return d;
}

void write_full_csv(std::ostream& out, const FullTrajectory& traj) {
  out << "t,kappa,px,py,pz,E,H,min_f1,min_f2,min_q\n";
  char buf[512];
  for (const auto& d : traj.diagnostics) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.t, d.kappa,
                  d.momentum.x, d.momentum.y, d.momentum.z, d.energy, d.entropy, d.min_f1, d.min_f2, d.min_q);
    out << buf;
  }
}

}  // namespace radkin
