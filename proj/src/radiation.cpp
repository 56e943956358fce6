#include "radkin/radiation.hpp"

#include <algorithm>

namespace radkin {

namespace {

RadiativeIncrement zero_increment(const Discretization& d) {
  RadiativeIncrement r;
  r.d_f1.assign(d.grid.size(), 0.0);
  r.d_f2.assign(d.grid.size(), 0.0);
  r.d_q.assign(d.sphere.size(), 0.0);
  return r;
}

void require_manifold(const ManifoldState& m) {
  if (!(m.lambda < 1.0) || !(m.lambda >= 0.0))
    throw Error(ErrorKind::Domain, "manifold point needs lambda in [0, 1)");
}

}  // namespace

RadiativeIncrement eval_R(const FullState& state, const Params& params) {
  state.check_finite();
  const auto& d = *state.disc;
  RadiativeIncrement r = zero_increment(d);
  const double qbar = integrate_sphere(d.sphere, state.q);
  for (std::size_t i = 0; i < d.grid.size(); ++i) {
    const double x = params.a0 * state.f2[i] + params.b0 * qbar * (state.f2[i] - state.f1[i]);
    r.d_f1[i] = x;
    r.d_f2[i] = -x;
  }
  const double rho1 = integrate_velocity(d.grid, state.f1);
  const double rho2 = integrate_velocity(d.grid, state.f2);
  for (std::size_t j = 0; j < d.sphere.size(); ++j)
    r.d_q[j] = params.a0 * rho2 + params.b0 * state.q[j] * (rho2 - rho1);
  return r;
}

RadiativeIncrement eval_L_manifold(const ManifoldState& base, const Remainder& w, const Params& params) {
  require_manifold(base);
  const auto& d = *base.disc;
  const double lam = base.lambda;
  const double q0 = lam / (1.0 - lam);
  const double theta_bar = integrate_sphere(d.sphere, w.theta);
  RadiativeIncrement r = zero_increment(d);
  for (std::size_t i = 0; i < d.grid.size(); ++i) {
    const double w1 = w.alpha[i], w2 = -w.alpha[i];
    const double x = params.a0 * w2 + params.b0 * (q0 * (w2 - w1) + theta_bar * (lam - 1.0) * base.f[i]);
    r.d_f1[i] = x;
    r.d_f2[i] = -x;
  }
  const double a_int = integrate_velocity(d.grid, w.alpha);
  const double f_int = integrate_velocity(d.grid, base.f);
  for (std::size_t j = 0; j < d.sphere.size(); ++j)
    r.d_q[j] = params.a0 * (-a_int) + params.b0 * (q0 * (-2.0 * a_int) + w.theta[j] * (lam - 1.0) * f_int);
  return r;
}

RadiativeIncrement eval_Lcal(const Remainder& w, const Params& params) {
  const auto& d = *w.disc;
  RadiativeIncrement r = zero_increment(d);
  const double theta_bar = integrate_sphere(d.sphere, w.theta);
  for (std::size_t i = 0; i < d.grid.size(); ++i) {
    const double x = params.b0 * theta_bar * (-2.0 * w.alpha[i]);
    r.d_f1[i] = x;
    r.d_f2[i] = -x;
  }
  const double a_int = integrate_velocity(d.grid, w.alpha);
  for (std::size_t j = 0; j < d.sphere.size(); ++j) r.d_q[j] = params.b0 * w.theta[j] * (-2.0 * a_int);
  return r;
}

RadiativeIncrement eval_L_multiplicative(const ManifoldState& base, const Field& g1, const Field& g2,
                                         const Field& hq, const Params& params) {
  require_manifold(base);
  const auto& d = *base.disc;
  const double lam = base.lambda;
  const double q0 = lam / (1.0 - lam);
  // Perturbations F1 = F(1+G1), F2 = lambda F(1+G2), Q = q0 (1+H).
  const double h_bar = integrate_sphere(d.sphere, hq);
  RadiativeIncrement r = zero_increment(d);
  for (std::size_t i = 0; i < d.grid.size(); ++i) {
    const double f = base.f[i];
    const double x = params.a0 * lam * f * g2[i] +
                     params.b0 * (q0 * (lam * f * g2[i] - f * g1[i]) + q0 * h_bar * (lam - 1.0) * f);
    r.d_f1[i] = x;
    r.d_f2[i] = -x;
  }
  Field gpart(d.grid.size());
  for (std::size_t i = 0; i < d.grid.size(); ++i)
    gpart[i] = params.a0 * lam * base.f[i] * g2[i] + params.b0 * q0 * (lam * base.f[i] * g2[i] - base.f[i] * g1[i]);
  const double g_int = integrate_velocity(d.grid, gpart);
  const double f_int = integrate_velocity(d.grid, base.f);
  for (std::size_t j = 0; j < d.sphere.size(); ++j)
    r.d_q[j] = g_int + params.b0 * q0 * hq[j] * (lam - 1.0) * f_int;
  return r;
}

double photon_steady_state(const FullState& state) {
  const auto& g = state.disc->grid;
  const double rho1 = integrate_velocity(g, state.f1);
  const double rho2 = integrate_velocity(g, state.f2);
  if (!(rho2 < rho1))
    throw Error(ErrorKind::Infeasible, "no steady photon density: excited mass must be below ground mass");
  return rho2 / (rho1 - rho2);
}

double max_abs(const RadiativeIncrement& inc) {
  double m = 0.0;
  for (double x : inc.d_f1) m = std::max(m, std::abs(x));
  for (double x : inc.d_f2) m = std::max(m, std::abs(x));
  for (double x : inc.d_q) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace radkin
