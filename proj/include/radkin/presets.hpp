#pragma once

#include "radkin/config.hpp"
#include "radkin/core.hpp"

namespace radkin {

/// A exp(-k |v-u|^2) on the grid.
Field preset_maxwellian(const VelocityGrid& grid, double amplitude, double k, const Vec3& u);
/// Sum of two Maxwellians centred at u + shift e_x and u - shift e_x.
Field preset_bimodal(const VelocityGrid& grid, double amplitude, double k, const Vec3& u, double shift);
/// A exp(-sum_i axes_i (v_i - u_i)^2).
Field preset_anisotropic(const VelocityGrid& grid, double amplitude, const Vec3& axes, const Vec3& u);

/// Manifold point (spec.lambda, F) for the preset; F is rescaled to spec.mass when positive.
ManifoldState initial_manifold(const InitialSpec& spec, const DiscPtr& disc);

/// Remainder for the spec: zero, or the scaled remainder with X norm
/// remainder_fraction * delta for the given neighbourhood radius delta.
Remainder initial_remainder(const InitialSpec& spec, const ManifoldState& m, double delta);

}  // namespace radkin
