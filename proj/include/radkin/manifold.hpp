#pragma once

#include <optional>

#include "radkin/core.hpp"

namespace radkin {

/// Rows of H(F, alpha, theta, lambda) for a fixed full state:
/// F1 - F - alpha, F2 - lambda F + alpha, Q - lambda/(1-lambda) - theta, and
/// the scalar integral of alpha minus that of theta.
struct HResidual {
  Field r1, r2, r3;
  double r4 = 0.0;

  /// Max absolute entry over all rows.
  double sup() const;
};

HResidual residual_H(const FullState& full, const Field& f, const Field& alpha, const Field& theta,
                     double lambda);

struct DecompositionResult {
  ManifoldState m;
  Remainder w;
  double residual_norm = 0.0;
  int newton_iters = 0;
};

struct DecomposeOptions {
  std::optional<double> initial_lambda;
  /// Neighbourhood radius for the X norm of the remainder; when unset the
  /// default radius of the input is used.
  std::optional<double> guard_radius;
  bool enforce_guard = true;
};

/// Default neighbourhood radius 2 eps0 kappa / (64 (2 eps0 + E)) for mass
/// kappa and energy E (limit convention, mass term included).
double default_guard_radius(double kappa, double energy, double eps0);
double default_guard_radius(const FullState& full, const Params& params);

/// Scalar equation for lambda after eliminating F, alpha and theta:
/// g(l) = integral of (Q - l/(1-l)) minus integral of (F1 - (F1+F2)/(1+l)).
/// Strictly decreasing on [0, 1).
double decomposition_g(const FullState& full, double lambda);
double decomposition_g_slope(const FullState& full, double lambda);

/// Split a positive near-manifold state into a manifold point and a remainder
/// (alpha, -alpha, theta) with equal integrals of alpha and theta.
DecompositionResult decompose(const FullState& full, const Params& params, const DecomposeOptions& opts = {});

/// The manifold part alone, without positivity or neighbourhood checks. The
/// root is clamped to [0, 1 - 1e-9].
ManifoldState manifold_part(const FullState& full, const Params& params, int* iterations = nullptr);

struct TangentProjection {
  double d_lambda = 0.0;
  Field d_f;
  /// Derivative of lambda F (product rule).
  Field d_lambda_f;
  /// Derivative of lambda / (1 - lambda).
  double d_photon = 0.0;
};

/// Projected manifold dynamics for collision increments (k1, k2) taken at any
/// argument; the flux is the velocity integral of k1.
TangentProjection project_tangent(const ManifoldState& m, const Field& k1, const Field& k2, const Params& params);

/// True iff the integrals of alpha and theta agree within tol.
bool orthogonal_structure_check(const Remainder& w, double tol = 1e-10);

/// A(f, g, h) = int phi f + int (phi + (1-l)^2 eta) g + (1-l)^2 eta int h dn.
double test_functional_A(double lambda, const Field& phi, double eta, const Field& f, const Field& g,
                         const Field& h, const Discretization& disc);

}  // namespace radkin
