#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "radkin/core.hpp"

namespace radkin {

/// Values of K1[F,F] and K2[F,F] on the grid.
struct CollisionIncrement {
  Field d_f1, d_f2;
  /// Loss parts (nonnegative for nonnegative states), included in d_f1, d_f2.
  Field loss_f1, loss_f2;
  /// Net excitation flux, the weak-form value of the integral of K1.
  double excitation_flux = 0.0;
  /// Relative L1 size of the last conservative correction (0 if none applied).
  double correction_size = 0.0;
};

using CutOff = std::optional<double>;

/// Worker threads used by the collision evaluators. Results are bitwise
/// reproducible for a fixed thread count.
void set_default_threads(int threads);
int default_threads();

/// Strong-form quadrature of K1, K2 with trilinear interpolation at off-grid
/// velocities (zero outside the box). Gain integrals are shared by all pairs
/// with the same centre of mass and relative speed.
CollisionIncrement eval_K(const FullState& state, const Params& params, CutOff cutoff_n = {});

using TestFn = std::function<double(const Vec3&)>;

/// c + b.v + a|v|^2.
struct QuadraticTest {
  double c = 0.0;
  Vec3 b{};
  double a = 0.0;

  double operator()(const Vec3& v) const { return c + b.dot(v) + a * v.norm2(); }
};

struct TestPair {
  QuadraticTest phi1;
  QuadraticTest phi2;
};

/// Integral of K1 phi1 + K2 phi2 in the symmetrized weak form, sampling
/// pre-collision pairs only. Independent of eval_K.
double weak_moment(const FullState& state, const Params& params, const TestFn& phi1, const TestFn& phi2,
                   CutOff cutoff_n = {});

/// Several quadratic test pairs in one sweep.
std::vector<double> weak_moments(const FullState& state, const Params& params,
                                 const std::vector<TestPair>& tests, CutOff cutoff_n = {});

/// Minimal weighted-norm change of (d_f1, d_f2) enforcing conservation of mass,
/// momentum and energy (with the 2 eps0 offset of excited molecules) and the
/// excitation flux identity for the integral of K2.
CollisionIncrement conservative_correction(const CollisionIncrement& inc, const FullState& state,
                                           const Params& params);

/// eval_K followed by conservative_correction.
CollisionIncrement eval_K_conservative(const FullState& state, const Params& params, CutOff cutoff_n = {});

/// Discrete collision invariants of an increment: mass, momentum (3), energy,
/// and the integral of d_f2.
std::array<double, 6> increment_moments(const CollisionIncrement& inc, const VelocityGrid& grid, double eps0);

}  // namespace radkin
