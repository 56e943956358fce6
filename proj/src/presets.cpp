#include "radkin/presets.hpp"

#include <cmath>

#include "radkin/experiments.hpp"

namespace radkin {

Field preset_maxwellian(const VelocityGrid& grid, double amplitude, double k, const Vec3& u) {
  Field f(grid.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = amplitude * std::exp(-k * (grid.node(i) - u).norm2());
  return f;
}

Field preset_bimodal(const VelocityGrid& grid, double amplitude, double k, const Vec3& u, double shift) {
  const Vec3 d{shift, 0.0, 0.0};
  Field f = preset_maxwellian(grid, amplitude, k, u + d);
  const Field g = preset_maxwellian(grid, amplitude, k, u - d);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += g[i];
  return f;
}

Field preset_anisotropic(const VelocityGrid& grid, double amplitude, const Vec3& axes, const Vec3& u) {
  Field f(grid.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 w = grid.node(i) - u;
    f[i] = amplitude * std::exp(-(axes.x * w.x * w.x + axes.y * w.y * w.y + axes.z * w.z * w.z));
  }
  return f;
}

ManifoldState initial_manifold(const InitialSpec& spec, const DiscPtr& disc) {
  const auto& grid = disc->grid;
  ManifoldState m;
  m.disc = disc;
  m.lambda = spec.lambda;
  if (spec.preset == "maxwellian") m.f = preset_maxwellian(grid, spec.amplitude, spec.k, spec.u);
  else if (spec.preset == "bimodal") m.f = preset_bimodal(grid, spec.amplitude, spec.k, spec.u, spec.shift);
  else if (spec.preset == "anisotropic") m.f = preset_anisotropic(grid, spec.amplitude, spec.axes, spec.u);
  else throw Error(ErrorKind::Config, "initial_manifold: unknown preset '" + spec.preset + "'");
  if (spec.mass > 0.0) {
    const double s = integrate_velocity(grid, m.f);
    if (!(s > 0.0)) throw Error(ErrorKind::Config, "initial_manifold: preset has no mass on the grid");
    for (double& x : m.f) x *= spec.mass / s;
  }
  return m;
}

Remainder initial_remainder(const InitialSpec& spec, const ManifoldState& m, double delta) {
  if (spec.remainder == "none" || spec.remainder_fraction == 0.0) return Remainder::zeros(m.disc);
  if (spec.remainder == "scaled") return scaled_remainder(m, spec.remainder_fraction * delta);
  throw Error(ErrorKind::Config, "initial_remainder: unknown remainder '" + spec.remainder + "'");
}

}  // namespace radkin
