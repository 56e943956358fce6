#pragma once

#include <optional>
#include <string>
#include <vector>

#include "radkin/collision.hpp"
#include "radkin/core.hpp"
#include "radkin/limit_solver.hpp"

namespace radkin {

// Fast radiative relaxation ---------------------------------------------------

struct RelaxationOptions {
  int grid_n = 16;
  double half_width = 5.0;
  int sphere_nodes = 32;
  double dtau = 0.01;
  bool full_state = true;
  /// Keep every k-th sample of the scalar series.
  int series_every = 100;
};

struct RelaxationReport {
  double a = 0.0, c0 = 0.0, tau_end = 0.0;
  double rho2_end = 0.0, intensity_end = 0.0;
  double rho2_inf = 0.0, intensity_inf = 0.0;
  double err_rho2 = 0.0, err_intensity = 0.0;
  /// |rho2_inf (I_inf + 1) - I_inf a|.
  double identity_residual = 0.0;
  bool full_state = false;
  /// L1 norm of F2 - Qbar/(1+Qbar) F1 over the L1 norm of F1 at tau_end.
  double full_relation_residual = 0.0;
  /// Max over directions of |Q(n) - Qbar| at tau_end.
  double full_photon_spread = 0.0;
  std::vector<double> tau, rho2, intensity;
};

RelaxationReport study_relaxation(double a, double c0, double tau_end, const Params& params,
                                  const RelaxationOptions& opts = {});

// Fast radiation limit --------------------------------------------------------

struct ExpFit {
  bool ok = false;
  double rate = 0.0;
  double amplitude = 0.0;
  double r2 = 0.0;
  int points = 0;
  double t_first = 0.0, t_last = 0.0;
};

/// Least squares fit of log y = log A - rate t over the initial stretch of
/// samples that stay above threshold and keep decreasing.
ExpFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y, double threshold);

/// Median of y over samples with t in [t_from, t_to].
double median_over(const std::vector<double>& t, const std::vector<double>& y, double t_from, double t_to);

/// Least squares slope of log y against log x, with its r^2.
std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Remainder (a F, -a F, a * integral of F) with X norm delta.
Remainder scaled_remainder(const ManifoldState& m, double delta);

struct ConvergenceOptions {
  double dt_macro = 0.025;
  CutOff cutoff_n{};
  /// Also run every eps from the manifold point itself (w0 = 0).
  bool zero_remainder_runs = true;
  /// Neighbourhood radius for the per-time decomposition; default from initial data.
  std::optional<double> guard_radius;
  /// Rescale F and w0 when the initial energy exceeds this value.
  double energy_cap = 0.5;
};

struct EpsRun {
  double eps = 0.0;
  double sup_error = 0.0;
  double sup_time = 0.0;
  double plateau = 0.0;
  /// Fit of the transient, taken on the X distance between the remainders of
  /// the perturbed and unperturbed runs so that the slaved O(eps) part cancels.
  ExpFit transient;
  double transient_floor = 0.0;
  double plateau_zero = 0.0;
  double max_zero = 0.0;
  bool failed = false;
  std::string failure;
  ErrorKind failure_kind = ErrorKind::Numerical;
  double failure_time = 0.0;
  double max_roundtrip = 0.0;
  /// Macro-step series.
  std::vector<double> times, error, w_norm, w_norm_zero;
  /// Dense series (every fast substep).
  std::vector<double> dense_t, dense_w, dense_w_zero, dense_diff;
};

struct ConvergenceReport {
  std::vector<double> eps_values;
  std::vector<double> sup_errors;
  std::vector<EpsRun> runs;
  double slope_loglog = 0.0;
  double slope_r2 = 0.0;
  double s = 0.0, t_end = 0.0;
  double kappa0 = 0.0, energy0 = 0.0;
  double delta0 = 0.0;
  double w0_norm = 0.0;
  double energy_scale = 1.0;
  std::vector<double> limit_times, limit_lambda;
};

/// Factor applied to F (and the remainder) so that the limit energy equals cap,
/// or 1 when it is already at most cap. Throws Infeasible when the photon
/// energy alone reaches cap.
double convergence_energy_scale(const ManifoldState& m, const Params& params, double cap);

ConvergenceReport study_convergence(const ManifoldState& initial_m, const Remainder& w0, const Params& params,
                                    const std::vector<double>& eps_list, double s, double t_end,
                                    const ConvergenceOptions& opts = {});

// Long-time equilibrium -------------------------------------------------------

struct MaxwellianFit {
  bool converged = false;
  int iterations = 0;
  double amplitude = 0.0;
  double k = 0.0;
  Vec3 u{};
  double lambda = 0.0;
  /// Max relative mismatch of the five moments.
  double residual = 0.0;
};

/// Grid Maxwellian A exp(-k |v-u|^2) with lambda = exp(-2 k eps0) whose
/// discrete mass, momentum and energy match the given limit-system values.
MaxwellianFit fit_equilibrium(double mass, const Vec3& momentum, double energy, const DiscPtr& disc,
                              const Params& params, const MaxwellianFit* guess = nullptr);

Field maxwellian_field(const VelocityGrid& grid, double amplitude, double k, const Vec3& u);

struct EquilibriumOptions {
  double dt = 0.1;
  /// Stop when the entropy dissipation rate falls below this value.
  double stall_rate = 1e-9;
  int store_every = 1;
};

struct EquilibriumReport {
  MaxwellianFit fit;
  bool fit_failed = false;
  double mass = 0.0, energy = 0.0;
  Vec3 momentum{};
  double t_end = 0.0;
  bool stalled = false;
  double l1_distance = 0.0;
  double lambda_end = 0.0;
  double lambda_error = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<double> times, entropy, lambda, l1_series;
};

EquilibriumReport study_equilibrium(const ManifoldState& initial_m, const Params& params, CutOff cutoff_n,
                                    double t_end, const EquilibriumOptions& opts = {});

// Moment bounds ---------------------------------------------------------------

struct MomentSweepPoint {
  CutOff n{};
  double l13_initial = 0.0, l14_initial = 0.0;
  double sup_l13 = 0.0, sup_l14 = 0.0;
  /// Largest one-step increase of the L1_4 norm (<= 0 for a non-increasing series).
  double max_l14_increase = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<double> times, l13, l14;
};

struct MomentOptions {
  double dt = 0.05;
  double bound_factor = 2.0;
};

struct MomentReport {
  std::vector<MomentSweepPoint> points;
  double max_ratio = 0.0;
  bool uniformly_bounded = false;
};

MomentReport study_moment_bounds(const ManifoldState& initial_m, const Params& params,
                                 const std::vector<CutOff>& n_list, double t_end, const MomentOptions& opts = {});

}  // namespace radkin
