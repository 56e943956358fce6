#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "radkin/collision.hpp"
#include "radkin/core.hpp"

namespace radkin {

struct FullDiagnostics {
  double t = 0.0;
  double kappa = 0.0;
  Vec3 momentum{};
  double energy = 0.0;
  double entropy = 0.0;
  double min_f1 = 0.0, min_f2 = 0.0, min_q = 0.0;
  /// Mass fraction outside |v| <= L - sqrt(2 eps0).
  double truncation = 0.0;
};

struct FullTrajectory {
  std::vector<double> times;
  std::vector<FullState> states;
  std::vector<FullDiagnostics> diagnostics;
  bool aborted = false;
  std::string abort_reason;
  ErrorKind abort_kind = ErrorKind::Numerical;
};

struct FullStepOptions {
  bool scaled = false;
  CutOff cutoff_n{};
  /// Disable the collision operator (radiative exchange only).
  bool collisions = true;
  /// Relative size below which negative entries are clamped; larger negativity is an error.
  double negativity_tol = 1e-12;
};

/// Right-hand side K[F] + R[F] (R scaled by 1/eps when opts.scaled).
FullState full_rhs(const FullState& state, const Params& params, const FullStepOptions& opts);

/// One classical RK4 step; for the scaled system dt must not exceed eps/10.
FullState step_full(const FullState& state, const Params& params, double dt, const FullStepOptions& opts);
FullState step_full(const FullState& state, const Params& params, double dt, bool scaled, CutOff cutoff_n = {});

FullTrajectory run_full(const FullState& initial, const Params& params, double t_end, double dt,
                        const FullStepOptions& opts);

/// Two-stage multirate step for the scaled system: the stiff radiative flow is
/// integrated with RK4 substeps no longer than eps/10 while the collision
/// forcing is frozen, first at K(y_n) (predictor) and then at the average of
/// K(y_n) and K(predictor). Each macro step costs two collision evaluations.
/// Called after every fast substep of the final (corrector) pass with the time
/// offset from the start of the macro step.
using SubstepObserver = std::function<void(double, const FullState&)>;

FullState step_multirate(const FullState& state, const Params& params, double dt_macro, CutOff cutoff_n = {},
                         const SubstepObserver& observer = {});

FullTrajectory run_multirate(const FullState& initial, const Params& params, double t_end, double dt_macro,
                             CutOff cutoff_n = {});

double mass_full(const FullState& s);
Vec3 momentum_full(const FullState& s);
/// Kinetic energy plus 2 eps0 per excited molecule plus 2 eps0 per photon.
double energy_full(const FullState& s, const Params& params);
/// Convention 0 log 0 = 0; entries in [-diag_floor, 0) count as 0.
double entropy_full(const FullState& s, const Params& params, double diag_floor = 0.0);
FullDiagnostics diagnose_full(const FullState& s, const Params& params, double t);

void write_full_csv(std::ostream& out, const FullTrajectory& traj);

/// Clamp entries with |x| below tol * max|state| to zero and rescale the
/// positive entries of the same row to restore its mass. Throws on larger
/// negativity.
void clamp_negativity(FullState& s, double tol);

}  // namespace radkin
