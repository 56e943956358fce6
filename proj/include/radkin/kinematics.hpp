#pragma once

#include <optional>
#include <utility>

#include "radkin/core.hpp"

namespace radkin {

struct CollisionPair {
  Vec3 v_a;
  Vec3 v_b;
};

using VelocityPair = std::pair<Vec3, Vec3>;

/// v3,4 = (v1+v2)/2 +- |v1-v2|/2 omega.
VelocityPair elastic_post(const CollisionPair& pair, const Vec3& omega);

/// Endothermic A + A -> A + A* map; empty when |v1-v2|^2 < 4 eps0.
std::optional<VelocityPair> nonelastic_post(const CollisionPair& pair, const Vec3& omega, double eps0);

/// Exothermic inverse A + A* -> A + A; always defined.
VelocityPair nonelastic_pre(const CollisionPair& pair, const Vec3& omega, double eps0);

double kernel_elastic(const CollisionPair& pair);
double kernel_ne12(const CollisionPair& pair, double eps0, double c0);
double kernel_ne34(const CollisionPair& pair, double eps0, double c0);

double kernel_elastic_cutoff(const CollisionPair& pair, double n);
double kernel_ne12_cutoff(const CollisionPair& pair, double eps0, double c0, double n);
double kernel_ne34_cutoff(const CollisionPair& pair, double eps0, double c0, double n);

/// Kernels as functions of the relative speed |d| alone.
inline double kernel_ne12_of(double d2, double eps0, double c0) {
  return d2 > 4.0 * eps0 ? 0.5 * c0 * std::sqrt(d2 - 4.0 * eps0) : 0.0;
}
inline double kernel_ne34_of(double d2, double eps0, double c0) {
  return 0.5 * c0 * std::sqrt(d2 + 4.0 * eps0);
}

/// The bound (C0/2)(1 + 2 sqrt(eps0)) <v> <w> on both nonelastic kernels.
double kernel_ne_bound(const CollisionPair& pair, double eps0, double c0);

/// |v1-v2| <= n  <=>  |v3-v4| <= sqrt(n^2 - 4 eps0) for the endothermic map.
bool cutoff_equivalence_check(const CollisionPair& pair_pre, const Vec3& omega, double eps0, double n);

}  // namespace radkin
