#include "radkin/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "radkin/full_solver.hpp"
#include "radkin/manifold.hpp"

namespace radkin {

namespace {

Field gaussian_shape(const VelocityGrid& grid, double k) {
  Field f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = std::exp(-k * grid.speed2()[i]);
  const double m = integrate_velocity(grid, f);
  for (double& x : f) x /= m;
  return f;
}

double l1_norm(const VelocityGrid& grid, const Field& f) { return norm_l1k(grid, f, 0); }

}  // namespace

RelaxationReport study_relaxation(double a, double c0, double tau_end, const Params& params,
                                  const RelaxationOptions& opts) {
  if (!(a > 0.0)) throw Error(ErrorKind::Domain, "study_relaxation: a must be positive");
  if (!(c0 >= 0.0)) throw Error(ErrorKind::Domain, "study_relaxation: c0 must be nonnegative");
  if (!(tau_end >= 0.0)) throw Error(ErrorKind::Domain, "study_relaxation: tau_end must be nonnegative");
  RelaxationReport r;
  r.a = a;
  r.c0 = c0;
  r.tau_end = tau_end;
  const auto [rinf, iinf] = fast_subsystem_equilibrium(a, c0);
  r.rho2_inf = rinf;
  r.intensity_inf = iinf;
  r.identity_residual = std::abs(rinf * (iinf + 1.0) - iinf * a);

  const long steps = static_cast<long>(std::ceil(tau_end / opts.dtau - 1e-12));
  const double h = steps > 0 ? tau_end / steps : 0.0;
  double rho2 = c0, intensity = 0.0;
  r.tau.push_back(0.0);
  r.rho2.push_back(rho2);
  r.intensity.push_back(intensity);
  for (long k = 1; k <= steps; ++k) {
    const auto next = integrate_fast_subsystem(rho2, intensity, a, h, h);
    rho2 = next.first;
    intensity = next.second;
    if (k % opts.series_every == 0 || k == steps) {
      r.tau.push_back(k == steps ? tau_end : k * h);
      r.rho2.push_back(rho2);
      r.intensity.push_back(intensity);
    }
  }
  r.rho2_end = rho2;
  r.intensity_end = intensity;
  r.err_rho2 = std::abs(rho2 - rinf);
  r.err_intensity = std::abs(intensity - iinf);

  r.full_state = opts.full_state;
  if (opts.full_state) {
    const DiscPtr disc = make_discretization(opts.grid_n, opts.half_width, opts.sphere_nodes);
    const Field shape = gaussian_shape(disc->grid, 1.0);
    FullState s = FullState::zeros(disc);
    for (std::size_t i = 0; i < shape.size(); ++i) {
      s.f1[i] = a * shape[i];
      s.f2[i] = c0 * shape[i];
    }
    FullStepOptions so;
    so.collisions = false;
    for (long k = 0; k < steps; ++k) s = step_full(s, params, h, so);
    const double qbar = integrate_sphere(disc->sphere, s.q);
    Field diff(shape.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s.f2[i] - qbar / (1.0 + qbar) * s.f1[i];
    r.full_relation_residual = l1_norm(disc->grid, diff) / l1_norm(disc->grid, s.f1);
    for (double q : s.q) r.full_photon_spread = std::max(r.full_photon_spread, std::abs(q - qbar));
  }
  return r;
}

ExpFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y, double threshold) {
  ExpFit fit;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
    if (!(y[i] > threshold) || !(y[i] > 0.0)) break;
    if (i > 0 && !(y[i] < y[i - 1])) break;
    const double ly = std::log(y[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    syy += ly * ly;
    if (n == 0) fit.t_first = t[i];
    fit.t_last = t[i];
    ++n;
  }
  fit.points = n;
  if (n < 3) return fit;
  const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
  if (!(cxx > 0.0)) return fit;
  const double slope = cxy / cxx;
  fit.rate = -slope;
  fit.amplitude = std::exp((sy - slope * sx) / n);
  fit.r2 = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
  fit.ok = true;
  return fit;
}

double median_over(const std::vector<double>& t, const std::vector<double>& y, double t_from, double t_to) {
  std::vector<double> v;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_from - 1e-12 && t[i] <= t_to + 1e-12) v.push_back(y[i]);
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return {std::nan(""), std::nan("")};
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
  return {cxy / cxx, cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0};
}

Remainder scaled_remainder(const ManifoldState& m, double delta) {
  const auto& d = *m.disc;
  Remainder w = Remainder::zeros(m.disc);
  const double mass = integrate_velocity(d.grid, m.f);
  const double unit = 2.0 * norm_l1k(d.grid, m.f, 2) + mass;
  if (!(unit > 0.0)) return w;
  const double a = delta / unit;
  for (std::size_t i = 0; i < w.alpha.size(); ++i) w.alpha[i] = a * m.f[i];
  for (double& x : w.theta) x = a * mass;
  return w;
}

namespace {

Remainder difference(const Remainder& a, const Remainder& b) {
  Remainder d = a;
  for (std::size_t i = 0; i < d.alpha.size(); ++i) d.alpha[i] -= b.alpha[i];
  for (std::size_t j = 0; j < d.theta.size(); ++j) d.theta[j] -= b.theta[j];
  return d;
}

double roundtrip_error(const FullState& y, const DecompositionResult& dr) {
  const FullState c = compose(dr.m, dr.w);
  double e = 0.0;
  for (std::size_t i = 0; i < y.f1.size(); ++i)
    e = std::max({e, std::abs(c.f1[i] - y.f1[i]), std::abs(c.f2[i] - y.f2[i])});
  for (std::size_t j = 0; j < y.q.size(); ++j) e = std::max(e, std::abs(c.q[j] - y.q[j]));
  return e;
}

}  // namespace

double convergence_energy_scale(const ManifoldState& m, const Params& params, double cap) {
  const double e_raw = energy_limit(m, params);
  if (!(e_raw > cap)) return 1.0;
  const double photon = 2.0 * params.eps0 * m.lambda / (1.0 - m.lambda);
  if (photon >= cap) throw Error(ErrorKind::Infeasible, "photon energy alone exceeds the energy cap");
  return (cap - photon) / (e_raw - photon);
}

ConvergenceReport study_convergence(const ManifoldState& initial_m, const Remainder& w0, const Params& params,
                                    const std::vector<double>& eps_list, double s, double t_end,
                                    const ConvergenceOptions& opts) {
  if (eps_list.empty()) throw Error(ErrorKind::Domain, "study_convergence: empty eps list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw Error(ErrorKind::Domain, "study_convergence: eps must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw Error(ErrorKind::Domain, "study_convergence: eps values must decrease");
  }
  if (!(t_end > s) || !(s >= 0.0)) throw Error(ErrorKind::Domain, "study_convergence: need 0 <= s < T");

  ConvergenceReport rep;
  rep.s = s;
  rep.t_end = t_end;
  ManifoldState m = initial_m;
  Remainder w = w0;
  rep.energy_scale = convergence_energy_scale(m, params, opts.energy_cap);
  if (rep.energy_scale != 1.0) {
    for (double& x : m.f) x *= rep.energy_scale;
    for (double& x : w.alpha) x *= rep.energy_scale;
    for (double& x : w.theta) x *= rep.energy_scale;
  }
  rep.kappa0 = mass_limit(m);
  rep.energy0 = energy_limit(m, params);
  rep.delta0 = default_guard_radius(rep.kappa0, rep.energy0, params.eps0);
  rep.w0_norm = norm_x(w);
  const double guard = opts.guard_radius ? *opts.guard_radius : rep.delta0;

  const LimitTrajectory lim = run_limit(m, params, t_end, opts.dt_macro, opts.cutoff_n);
  if (lim.aborted) throw Error(lim.abort_kind, "study_convergence: limit run failed: " + lim.abort_reason);
  rep.limit_times = lim.times;
  for (const auto& st : lim.states) rep.limit_lambda.push_back(st.lambda);

  DecomposeOptions dopt;
  dopt.guard_radius = guard;

  for (double eps : eps_list) {
    Params p = params;
    p.eps_scale = eps;
    EpsRun run;
    run.eps = eps;
    FullState y = compose(m, w);
    FullState z = manifold_point(m);
    const bool with_zero = opts.zero_remainder_runs;
    run.times.push_back(0.0);
    run.error.push_back(distance_x(y, manifold_point(m)));
    run.w_norm.push_back(norm_x(w));
    run.dense_t.push_back(0.0);
    run.dense_w.push_back(norm_x(w));
    std::vector<double>& dense_diff = run.dense_diff;
    if (opts.zero_remainder_runs) dense_diff.push_back(norm_x(w));
    if (with_zero) {
      run.w_norm_zero.push_back(0.0);
      run.dense_w_zero.push_back(0.0);
    }
    try {
      for (std::size_t k = 1; k < lim.times.size(); ++k) {
        const double t0 = lim.times[k - 1];
        const double h = lim.times[k] - t0;
        std::vector<std::pair<double, Remainder>> sub_y, sub_z;
        auto observe = [&](std::vector<std::pair<double, Remainder>>& out) {
          return [&out, &dopt, &p, t0, &run](double off, const FullState& st) {
            run.failure_time = t0 + off;
            const DecompositionResult dr = decompose(st, p, dopt);
            run.max_roundtrip = std::max(run.max_roundtrip, roundtrip_error(st, dr));
            out.emplace_back(t0 + off, dr.w);
          };
        };
        y = step_multirate(y, p, h, opts.cutoff_n, observe(sub_y));
        if (with_zero) z = step_multirate(z, p, h, opts.cutoff_n, observe(sub_z));
        for (std::size_t j = 0; j < sub_y.size(); ++j) {
          run.dense_t.push_back(sub_y[j].first);
          run.dense_w.push_back(norm_x(sub_y[j].second));
          if (with_zero) {
            run.dense_w_zero.push_back(norm_x(sub_z[j].second));
            dense_diff.push_back(norm_x(difference(sub_y[j].second, sub_z[j].second)));
          }
        }
        const double t = lim.times[k];
        run.failure_time = t;
        const DecompositionResult dy = decompose(y, p, dopt);
        run.max_roundtrip = std::max(run.max_roundtrip, roundtrip_error(y, dy));
        run.times.push_back(t);
        run.w_norm.push_back(norm_x(dy.w));
        run.error.push_back(distance_x(y, manifold_point(lim.states[k])));
        if (with_zero) {
          const DecompositionResult dz = decompose(z, p, dopt);
          run.w_norm_zero.push_back(norm_x(dz.w));
        }
      }
    } catch (const Error& e) {
      run.failed = true;
      run.failure = e.what();
      run.failure_kind = e.kind();
    }
    if (!run.failed) run.failure_time = 0.0;

    for (std::size_t i = 0; i < run.times.size(); ++i) {
      if (run.times[i] >= s - 1e-12 && run.error[i] > run.sup_error) {
        run.sup_error = run.error[i];
        run.sup_time = run.times[i];
      }
    }
    const double third = t_end - (t_end - s) / 3.0;
    run.plateau = median_over(run.dense_t, run.dense_w, third, t_end);
    if (with_zero) {
      run.plateau_zero = median_over(run.dense_t, run.dense_w_zero, third, t_end);
      for (double x : run.dense_w_zero) run.max_zero = std::max(run.max_zero, x);
      run.transient_floor = median_over(run.dense_t, dense_diff, third, t_end);
      run.transient = fit_exponential(run.dense_t, dense_diff, 2.0 * run.transient_floor);
    } else {
      run.transient = fit_exponential(run.dense_t, run.dense_w, 2.0 * run.plateau);
    }
    rep.eps_values.push_back(eps);
    rep.sup_errors.push_back(run.sup_error);
    rep.runs.push_back(std::move(run));
  }
  const auto [slope, r2] = loglog_slope(rep.eps_values, rep.sup_errors);
  rep.slope_loglog = slope;
  rep.slope_r2 = r2;
  return rep;
}

Field maxwellian_field(const VelocityGrid& grid, double amplitude, double k, const Vec3& u) {
  Field f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = amplitude * std::exp(-k * (grid.node(i) - u).norm2());
  return f;
}

namespace {

/// Discrete limit-system moments (mass, momentum, energy) of the Maxwellian
/// equilibrium with parameters (log A, k, u).
Eigen::Matrix<double, 5, 1> equilibrium_moments(const Eigen::Matrix<double, 5, 1>& x, const VelocityGrid& grid,
                                                double eps0) {
  const double amp = std::exp(x[0]), k = x[1];
  const Vec3 u{x[2], x[3], x[4]};
  const double lam = std::exp(-2.0 * k * eps0);
  double m = 0.0, e = 0.0;
  Vec3 p{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 v = grid.node(i);
    const double f = amp * std::exp(-k * (v - u).norm2());
    m += f;
    p = p + v * f;
    e += ((1.0 + grid.speed2()[i]) * (1.0 + lam) + 2.0 * eps0 * lam) * f;
  }
  const double h3 = grid.cell_volume();
  Eigen::Matrix<double, 5, 1> r;
  r << (1.0 + lam) * m * h3, (1.0 + lam) * p.x * h3, (1.0 + lam) * p.y * h3, (1.0 + lam) * p.z * h3,
      e * h3 + 2.0 * eps0 * lam / (1.0 - lam);
  return r;
}

}  // namespace

MaxwellianFit fit_equilibrium(double mass, const Vec3& momentum, double energy, const DiscPtr& disc,
                              const Params& params, const MaxwellianFit* guess) {
  if (!(mass > 0.0)) throw Error(ErrorKind::Domain, "fit_equilibrium: mass must be positive");
  const auto& grid = disc->grid;
  const double eps0 = params.eps0;
  Eigen::Matrix<double, 5, 1> target;
  target << mass, momentum.x, momentum.y, momentum.z, energy;
  Eigen::Matrix<double, 5, 1> x;
  if (guess && guess->converged) {
    x << std::log(guess->amplitude), guess->k, guess->u.x, guess->u.y, guess->u.z;
  } else {
    // Continuum energy relation solved for k by bisection.
    const Vec3 u = momentum * (1.0 / mass);
    auto excess = [&](double k) {
      const double lam = std::exp(-2.0 * k * eps0);
      return mass * (1.0 + u.norm2() + 1.5 / k) + 2.0 * eps0 * lam / (1.0 + lam) * mass +
             2.0 * eps0 * lam / (1.0 - lam) - energy;
    };
    double lo = 1e-3, hi = 1e3;
    if (excess(lo) < 0.0 || excess(hi) > 0.0) {
      MaxwellianFit bad;
      return bad;
    }
    for (int i = 0; i < 200; ++i) {
      const double mid = std::sqrt(lo * hi);
      (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    const double k = std::sqrt(lo * hi);
    const double lam = std::exp(-2.0 * k * eps0);
    const double amp = mass / ((1.0 + lam) * std::pow(M_PI / k, 1.5));
    x << std::log(amp), k, u.x, u.y, u.z;
  }
  const double scale_p = std::max(mass, 1e-300);
  auto scaled_residual = [&](const Eigen::Matrix<double, 5, 1>& xx) {
    Eigen::Matrix<double, 5, 1> r = equilibrium_moments(xx, grid, eps0) - target;
    r[0] /= mass;
    for (int j = 1; j < 4; ++j) r[j] /= scale_p;
    r[4] /= energy;
    return r;
  };
  MaxwellianFit fit;
  Eigen::Matrix<double, 5, 1> r = scaled_residual(x);
  for (int it = 0; it < 60; ++it) {
    fit.iterations = it;
    if (r.cwiseAbs().maxCoeff() < 1e-14) break;
    Eigen::Matrix<double, 5, 5> jac;
    for (int c = 0; c < 5; ++c) {
      const double step = 1e-7 * std::max(1.0, std::abs(x[c]));
      Eigen::Matrix<double, 5, 1> xp = x, xm = x;
      xp[c] += step;
      xm[c] -= step;
      jac.col(c) = (scaled_residual(xp) - scaled_residual(xm)) / (2.0 * step);
    }
    Eigen::Matrix<double, 5, 1> dx = jac.fullPivLu().solve(-r);
    double damp = 1.0;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::Matrix<double, 5, 1> xn = x + damp * dx;
      if (xn[1] > 0.0) {
        const Eigen::Matrix<double, 5, 1> rn = scaled_residual(xn);
        if (rn.cwiseAbs().maxCoeff() < r.cwiseAbs().maxCoeff()) {
          x = xn;
          r = rn;
          break;
        }
      }
      damp *= 0.5;
    }
    if (damp < 1e-8) break;
  }
  fit.residual = r.cwiseAbs().maxCoeff();
  fit.converged = fit.residual < 1e-10;
  fit.amplitude = std::exp(x[0]);
  fit.k = x[1];
  fit.u = Vec3{x[2], x[3], x[4]};
  fit.lambda = std::exp(-2.0 * fit.k * eps0);
  return fit;
}

EquilibriumReport study_equilibrium(const ManifoldState& initial_m, const Params& params, CutOff cutoff_n,
                                    double t_end, const EquilibriumOptions& opts) {
  if (!(opts.dt > 0.0)) throw Error(ErrorKind::Domain, "study_equilibrium: dt must be positive");
  const auto& grid = initial_m.disc->grid;
  EquilibriumReport rep;
  rep.mass = mass_limit(initial_m);
  rep.momentum = momentum_limit(initial_m);
  rep.energy = energy_limit(initial_m, params);
  rep.fit = fit_equilibrium(rep.mass, rep.momentum, rep.energy, initial_m.disc, params);
  rep.fit_failed = !rep.fit.converged;
  Field target;
  if (!rep.fit_failed) target = maxwellian_field(grid, rep.fit.amplitude, rep.fit.k, rep.fit.u);
  const double target_l1 = rep.fit_failed ? 0.0 : l1_norm(grid, target);
  auto distance = [&](const ManifoldState& m) {
    if (rep.fit_failed) return std::nan("");
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += std::abs(m.f[i] - target[i]);
    return s * grid.cell_volume() / target_l1;
  };

  ManifoldState m = initial_m;
  double t = 0.0;
  double h_prev = entropy_limit(m, params);
  auto record = [&](double tt, double hh) {
    rep.times.push_back(tt);
    rep.entropy.push_back(hh);
    rep.lambda.push_back(m.lambda);
    rep.l1_series.push_back(distance(m));
  };
  record(0.0, h_prev);
  long k = 0;
  while (t < t_end - 1e-12) {
    const double h = std::min(opts.dt, t_end - t);
    try {
      m = step_limit(m, params, h, cutoff_n);
    } catch (const Error& e) {
      rep.aborted = true;
      rep.abort_reason = e.what();
      break;
    }
    t += h;
    ++k;
    const double hh = entropy_limit(m, params);
    const double rate = (h_prev - hh) / h;
    h_prev = hh;
    const bool stop = rate < opts.stall_rate;
    if (k % opts.store_every == 0 || stop || t >= t_end - 1e-12) record(t, hh);
    if (stop) {
      rep.stalled = true;
      break;
    }
  }
  rep.t_end = t;
  rep.lambda_end = m.lambda;
  rep.l1_distance = distance(m);
  rep.lambda_error = rep.fit_failed ? std::nan("") : std::abs(m.lambda - rep.fit.lambda);
  return rep;
}

MomentReport study_moment_bounds(const ManifoldState& initial_m, const Params& params,
                                 const std::vector<CutOff>& n_list, double t_end, const MomentOptions& opts) {
  MomentReport rep;
  const auto& grid = initial_m.disc->grid;
  rep.uniformly_bounded = true;
  for (const CutOff& n : n_list) {
    MomentSweepPoint pt;
    pt.n = n;
    const LimitTrajectory tr = run_limit(initial_m, params, t_end, opts.dt, n);
    pt.aborted = tr.aborted;
    pt.abort_reason = tr.abort_reason;
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      pt.times.push_back(tr.times[i]);
      pt.l13.push_back(norm_l1k(grid, tr.states[i].f, 3));
      pt.l14.push_back(norm_l1k(grid, tr.states[i].f, 4));
    }
    pt.l13_initial = pt.l13.front();
    pt.l14_initial = pt.l14.front();
    pt.sup_l13 = *std::max_element(pt.l13.begin(), pt.l13.end());
    pt.sup_l14 = *std::max_element(pt.l14.begin(), pt.l14.end());
    pt.max_l14_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pt.l14.size(); ++i)
      pt.max_l14_increase = std::max(pt.max_l14_increase, pt.l14[i] - pt.l14[i - 1]);
    if (pt.l14.size() < 2) pt.max_l14_increase = 0.0;
    const double ratio = pt.l14_initial > 0.0 ? pt.sup_l14 / pt.l14_initial : 0.0;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (pt.aborted || ratio >= opts.bound_factor) rep.uniformly_bounded = false;
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

}  // namespace radkin
