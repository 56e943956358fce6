#pragma once

#include "radkin/core.hpp"

namespace radkin {

struct RadiativeIncrement {
  Field d_f1, d_f2;
  Field d_q;
};

/// R[F]: d_f1(v) = sum over n of A0 F2 + B0 Q(n)(F2 - F1), d_f2 = -d_f1,
/// d_q(n) = velocity integral of the same integrand.
RadiativeIncrement eval_R(const FullState& state, const Params& params);

/// Linear part of R around the manifold point, applied to W = (alpha, -alpha, theta).
RadiativeIncrement eval_L_manifold(const ManifoldState& base, const Remainder& w, const Params& params);

/// Quadratic part of R in W: d_f1 = -2 alpha times the sphere integral of theta.
RadiativeIncrement eval_Lcal(const Remainder& w, const Params& params);

/// The operator acting on multiplicative perturbations (G1, G2, H) of a
/// manifold point; it vanishes on tangent vectors (xi, xi + (1-lambda) eta, eta).
RadiativeIncrement eval_L_multiplicative(const ManifoldState& base, const Field& g1, const Field& g2,
                                         const Field& hq, const Params& params);

/// Scalar steady photon density rho2 / (rho1 - rho2).
double photon_steady_state(const FullState& state);

/// Max absolute entry over all three rows.
double max_abs(const RadiativeIncrement& inc);

}  // namespace radkin
