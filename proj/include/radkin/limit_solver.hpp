#pragma once

#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "radkin/collision.hpp"
#include "radkin/core.hpp"

namespace radkin {

/// Time derivative of (lambda, F) for the fast radiation limit.
struct LimitRhs {
  double d_lambda = 0.0;
  Field d_f;
  /// Integral of K1 used in both rows.
  double flux = 0.0;
};

/// Point (F, lambda F, lambda/(1-lambda)) of the steady manifold.
FullState manifold_point(const ManifoldState& m);

/// T (or T_n with a cut-off): the collision increment of (F, lambda F) after
/// conservative correction, combined through
///   d lambda = -(1-l)^2 (1+l) / D * X,
///   d F      = (K1 + K2) / (1+l) + (1-l)^2 F / D * X,
/// with D = (1+l) + (1-l)^2 * integral of F and X = integral of K1.
LimitRhs eval_T(const ManifoldState& m, const Params& params, CutOff cutoff_n = {});

struct LimitDiagnostics {
  double t = 0.0;
  double lambda = 0.0;
  /// (1 + lambda) times the integral of F.
  double mass = 0.0;
  Vec3 momentum{};
  double energy = 0.0;
  /// NaN when the entropy is undefined (A0 != B0).
  double entropy = 0.0;
  double l14_norm = 0.0;
};

struct LambdaClampEvent {
  double t = 0.0;
  double raw = 0.0;
};

struct LimitTrajectory {
  std::vector<double> times;
  std::vector<ManifoldState> states;
  std::vector<LimitDiagnostics> diagnostics;
  std::vector<LambdaClampEvent> clamp_events;
  bool aborted = false;
  std::string abort_reason;
  ErrorKind abort_kind = ErrorKind::Numerical;
};

/// One RK4 step. lambda is clamped to [0, 1 - 1e-12]; a clamp is appended to
/// events (with time t) when given. Leaving [0, 1) by more than 1e-9 throws.
ManifoldState step_limit(const ManifoldState& m, const Params& params, double dt, CutOff cutoff_n = {},
                         std::vector<LambdaClampEvent>* events = nullptr, double t = 0.0);

/// Integrate to t_end; states and diagnostics are kept every store_every
/// steps and at the final time.
LimitTrajectory run_limit(const ManifoldState& initial, const Params& params, double t_end, double dt,
                          CutOff cutoff_n = {}, int store_every = 1);

double energy_limit(const ManifoldState& m, const Params& params);
double entropy_limit(const ManifoldState& m, const Params& params);
Vec3 momentum_limit(const ManifoldState& m);
double mass_limit(const ManifoldState& m);
LimitDiagnostics diagnose_limit(const ManifoldState& m, const Params& params, double t);

/// Upper bound of lambda implied by energy conservation: E / (2 eps0 + E).
double lambda_bound(double energy, double eps0);

/// Lower bound of the limit entropy for energy E:
/// -2 C_E - E/e - 1 - log(2 eps0 / (2 eps0 + E)), C_E = E + pi^(3/2).
double entropy_lower_bound(double energy, double eps0);

/// x/(1-x) log x, with value 0 at x = 0.
double lambda_log_term(double x);

void write_limit_csv(std::ostream& out, const LimitTrajectory& traj);

/// Pointwise integrands of the entropy dissipation; both are <= 0 for positive
/// arguments. Elastic: (1+l)^2/4 B (F3 F4 - F1 F2) log(F1 F2 / (F3 F4)).
double dissipation_elastic(double lambda, double b, double f1, double f2, double f3, double f4);
/// Nonelastic: B (l F3 F4 - F1 F2) log(F1 F2 / (l F3 F4)).
double dissipation_nonelastic(double lambda, double b, double f1, double f2, double f3, double f4);

/// Evaluate both integrands on random grid pairs with random directions;
/// post-collision values are trilinear interpolants of F. Samples where any
/// value is not positive are skipped.
std::vector<double> sample_dissipation(const ManifoldState& m, const Params& params, int samples,
                                       std::mt19937_64& rng, CutOff cutoff_n = {});

/// Fast radiative subsystem in scalar form: rho2' = -rho2 (I+1) + I a,
/// I' = I (rho2 - a) + rho2.
std::pair<double, double> fast_subsystem_rhs(double rho2, double intensity, double a);

/// Closed-form fixed point (rho2_inf, I_inf) with c0 = rho2 + I conserved.
std::pair<double, double> fast_subsystem_equilibrium(double a, double c0);

/// RK4 integration of the subsystem from (rho2, I) to tau_end.
std::pair<double, double> integrate_fast_subsystem(double rho2, double intensity, double a, double tau_end,
                                                   double dtau = 1e-2);

/// Norm of X for (lambda, F): |lambda| + L1_2 norm of F.
double norm_limit(double lambda, const Field& f, const VelocityGrid& grid);

/// ||T_n(m1) - T_n(m2)|| / ||m1 - m2||.
double lipschitz_probe(const ManifoldState& m1, const ManifoldState& m2, const Params& params,
                       CutOff cutoff_n = {});

}  // namespace radkin
