#include "radkin/kinematics.hpp"

#include <algorithm>

namespace radkin {

namespace {

void require_unit(const Vec3& omega) {
  if (!(std::abs(omega.norm() - 1.0) <= 1e-12))
    throw Error(ErrorKind::Domain, "omega must be a unit vector");
}

}  // namespace

VelocityPair elastic_post(const CollisionPair& pair, const Vec3& omega) {
  require_unit(omega);
  const Vec3 mid = (pair.v_a + pair.v_b) * 0.5;
  const double r = 0.5 * (pair.v_a - pair.v_b).norm();
  return {mid + omega * r, mid - omega * r};
}

std::optional<VelocityPair> nonelastic_post(const CollisionPair& pair, const Vec3& omega, double eps0) {
  require_unit(omega);
  const double r2 = 0.25 * (pair.v_a - pair.v_b).norm2() - eps0;
  if (r2 < 0.0) return std::nullopt;
  const Vec3 mid = (pair.v_a + pair.v_b) * 0.5;
  const double r = std::sqrt(r2);
  return VelocityPair{mid + omega * r, mid - omega * r};
}

VelocityPair nonelastic_pre(const CollisionPair& pair, const Vec3& omega, double eps0) {
  require_unit(omega);
  const Vec3 mid = (pair.v_a + pair.v_b) * 0.5;
  const double r = std::sqrt(0.25 * (pair.v_a - pair.v_b).norm2() + eps0);
  return {mid + omega * r, mid - omega * r};
}

double kernel_elastic(const CollisionPair& pair) { return (pair.v_a - pair.v_b).norm(); }

double kernel_ne12(const CollisionPair& pair, double eps0, double c0) {
  return kernel_ne12_of((pair.v_a - pair.v_b).norm2(), eps0, c0);
}

double kernel_ne34(const CollisionPair& pair, double eps0, double c0) {
  return kernel_ne34_of((pair.v_a - pair.v_b).norm2(), eps0, c0);
}

double kernel_elastic_cutoff(const CollisionPair& pair, double n) {
  return std::min(kernel_elastic(pair), n);
}

double kernel_ne12_cutoff(const CollisionPair& pair, double eps0, double c0, double n) {
  const double d2 = (pair.v_a - pair.v_b).norm2();
  return d2 <= n * n ? kernel_ne12_of(d2, eps0, c0) : 0.0;
}

double kernel_ne34_cutoff(const CollisionPair& pair, double eps0, double c0, double n) {
  const double d2 = (pair.v_a - pair.v_b).norm2();
  const double t2 = n * n - 4.0 * eps0;
  if (t2 < 0.0) return 0.0;
  return d2 <= t2 ? kernel_ne34_of(d2, eps0, c0) : 0.0;
}

double kernel_ne_bound(const CollisionPair& pair, double eps0, double c0) {
  return 0.5 * c0 * (1.0 + 2.0 * std::sqrt(eps0)) * std::sqrt(1.0 + pair.v_a.norm2()) *
         std::sqrt(1.0 + pair.v_b.norm2());
}

bool cutoff_equivalence_check(const CollisionPair& pair_pre, const Vec3& omega, double eps0, double n) {
  const auto post = nonelastic_post(pair_pre, omega, eps0);
  if (!post) throw Error(ErrorKind::Domain, "cutoff_equivalence_check requires an open channel");
  const double t2 = n * n - 4.0 * eps0;
  if (t2 < 0.0) throw Error(ErrorKind::Domain, "cutoff_equivalence_check requires n > 2 sqrt(eps0)");
  const double d_pre2 = (pair_pre.v_a - pair_pre.v_b).norm2();
  const double d_post2 = (post->first - post->second).norm2();
  // Compare squared speeds with a relative roundoff allowance at the threshold.
  const double tol = 64.0 * 2.2e-16 * std::max({d_pre2, n * n, 1.0});
  const bool pre_in = d_pre2 <= n * n + tol;
  const bool post_in = d_post2 <= t2 + tol;
  return pre_in == post_in;
}

}  // namespace radkin
