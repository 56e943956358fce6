#include "doctest.h"
#include "radkin/collision.hpp"
#include "radkin/experiments.hpp"
#include "radkin/limit_solver.hpp"
#include "radkin/manifold.hpp"
#include "radkin/radiation.hpp"
#include "test_util.hpp"

using namespace radkin;
using namespace testutil;

namespace {

/// Random remainder with equal integrals of alpha and theta and X norm `size`.
Remainder random_remainder(const ManifoldState& m, std::mt19937_64& rng, double size) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Remainder w = Remainder::zeros(m.disc);
  for (std::size_t i = 0; i < w.alpha.size(); ++i) w.alpha[i] = 0.5 * m.f[i] * u(rng);
  const double ia = integrate_velocity(m.disc->grid, w.alpha);
  Field shape(w.theta.size());
  for (double& s : shape) s = 1.0 + 0.5 * u(rng);
  const double is = integrate_sphere(m.disc->sphere, shape);
  for (std::size_t j = 0; j < shape.size(); ++j) w.theta[j] = ia * shape[j] / is;
  const double n = norm_x(w);
  for (double& x : w.alpha) x *= size / n;
  for (double& x : w.theta) x *= size / n;
  return w;
}

}  // namespace

TEST_CASE("residual of H") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(101);
  const ManifoldState m{d, 0.4, random_positive(d->grid, rng, 1.0)};
  const FullState x = manifold_point(m);
  const Field zero_a(d->grid.size(), 0.0), zero_t(d->sphere.size(), 0.0);
  CHECK(residual_H(x, m.f, zero_a, zero_t, m.lambda).sup() < 1e-15);

  const Remainder w = random_remainder(m, rng, 1e-3);
  const FullState y = compose(m, w);
  CHECK(residual_H(y, m.f, w.alpha, w.theta, m.lambda).sup() < 1e-15);

  const double dl = 1e-3;
  const auto r = residual_H(y, m.f, w.alpha, w.theta, m.lambda + dl);
  const double expect = dl / ((1.0 - m.lambda) * (1.0 - m.lambda));
  for (double v : r.r3) CHECK(std::abs(v) == doctest::Approx(expect).epsilon(3e-3));
}

TEST_CASE("decomposition of a manifold point") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(103);
  const ManifoldState m{d, 0.35, random_positive(d->grid, rng, 1.0)};
  const auto r = decompose(manifold_point(m), Params{});
  CHECK(r.newton_iters <= 2);
  CHECK(std::abs(r.m.lambda - m.lambda) < 1e-15);
  CHECK(max_abs_diff(r.m.f, m.f) < 1e-15);
  CHECK(norm_x(r.w) < 1e-14);
}

TEST_CASE("compose and decompose invert each other") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> ul(0.02, 0.6), uf(0.0, 0.5);
  const Params p;
  double worst = 0.0, worst_back = 0.0;
  for (int s = 0; s < 200; ++s) {
    const ManifoldState m{d, ul(rng), random_positive(d->grid, rng, 0.5 + ul(rng))};
    const double delta0 = default_guard_radius(mass_limit(m), energy_limit(m, p), p.eps0);
    const Remainder w = random_remainder(m, rng, uf(rng) * delta0);
    const FullState y = compose(m, w);
    const auto r = decompose(y, p);
    worst = std::max(worst, std::abs(r.m.lambda - m.lambda));
    worst = std::max(worst, max_abs_diff(r.m.f, m.f));
    worst = std::max(worst, max_abs_diff(r.w.alpha, w.alpha));
    worst = std::max(worst, max_abs_diff(r.w.theta, w.theta));
    const FullState back = compose(r.m, r.w);
    worst_back = std::max(worst_back, distance_x(back, y));
    CHECK(orthogonal_structure_check(r.w, 1e-12));
  }
  CHECK(worst < 1e-10);
  CHECK(worst_back < 1e-10);
}

TEST_CASE("the lambda equation is decreasing with the predicted slope") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(109);
  const ManifoldState m{d, 0.3, random_positive(d->grid, rng, 1.2)};
  const FullState y = compose(m, random_remainder(m, rng, 1e-3));
  const double fbar = integrate_velocity(d->grid, m.f);
  for (double l : {0.1, 0.3, 0.6}) {
    const double h = 1e-6;
    const double fd = (decomposition_g(y, l + h) - decomposition_g(y, l - h)) / (2 * h);
    CHECK(fd == doctest::Approx(decomposition_g_slope(y, l)).epsilon(1e-6));
    CHECK(decomposition_g_slope(y, l) < 0.0);
  }
  // At the root the slope is -(integral of Fbar / (1+l) + 1/(1-l)^2).
  const double l = m.lambda;
  CHECK(decomposition_g_slope(manifold_point(m), l) ==
        doctest::Approx(-(fbar / (1.0 + l) + 1.0 / ((1.0 - l) * (1.0 - l)))));
}

TEST_CASE("decomposition guards") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(113);
  const Params p;
  const ManifoldState m{d, 0.3, random_positive(d->grid, rng, 1.0)};
  const double delta0 = default_guard_radius(mass_limit(m), energy_limit(m, p), p.eps0);
  const FullState far = compose(m, random_remainder(m, rng, 2.0 * delta0));
  try {
    decompose(far, p);
    FAIL("expected a guard violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Guard);
  }
  DecomposeOptions loose;
  loose.enforce_guard = false;
  CHECK_NOTHROW(decompose(far, p, loose));
  FullState neg = manifold_point(m);
  neg.f1[3] = -1.0;
  CHECK_THROWS_AS(decompose(neg, p), Error);
  CHECK_THROWS_AS(decompose(FullState::zeros(d), p), Error);
  CHECK(default_guard_radius(1.0, 1.0, 0.5) == doctest::Approx(1.0 / (64.0 * 2.0)));
}

TEST_CASE("tangent projection") {
  const auto d = make_discretization(8, 4.0, 12);
  std::mt19937_64 rng(127);
  const Params p;
  const ManifoldState m{d, 0.25, random_positive(d->grid, rng, 1.0)};
  const Field zero(d->grid.size(), 0.0);
  const auto z = project_tangent(m, zero, zero, p);
  CHECK(z.d_lambda == 0.0);
  CHECK(z.d_photon == 0.0);
  for (double x : z.d_f) CHECK(x == 0.0);

  const auto inc = eval_K_conservative(manifold_point(m), p);
  const auto pr = project_tangent(m, inc.d_f1, inc.d_f2, p);
  const auto t = eval_T(m, p);
  CHECK(pr.d_lambda == doctest::Approx(t.d_lambda).epsilon(1e-12));
  CHECK(max_abs_diff(pr.d_f, t.d_f) < 1e-12 * l1(d->grid, m.f));
  // d(lambda F) from the product rule, d(lambda/(1-lambda)) from the chain rule.
  for (std::size_t i = 0; i < m.f.size(); ++i)
    CHECK(pr.d_lambda_f[i] == doctest::Approx(pr.d_lambda * m.f[i] + m.lambda * pr.d_f[i]).epsilon(1e-10));
  CHECK(pr.d_photon == doctest::Approx(pr.d_lambda / ((1 - m.lambda) * (1 - m.lambda))));
}

TEST_CASE("the test functional annihilates the linearized radiative operator") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(131);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Params p;
  for (int s = 0; s < 20; ++s) {
    const ManifoldState m{d, 0.05 + 0.04 * s, random_positive(d->grid, rng, 1.0)};
    Field phi(d->grid.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = u(rng) * (1.0 + d->grid.speed2()[i]);
    const double eta = u(rng);
    const Remainder w = random_remainder(m, rng, 0.1);
    const auto l = eval_L_manifold(m, w, p);
    const double a = test_functional_A(m.lambda, phi, eta, l.d_f1, l.d_f2, l.d_q, *d);
    double scale = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) scale += std::abs(phi[i] * l.d_f1[i]);
    CHECK(std::abs(a) < 1e-12 * (scale * d->grid.cell_volume() + 1.0));
  }
}

TEST_CASE("orthogonal structure") {
  const auto d = make_discretization(6, 3.0, 12);
  CHECK(orthogonal_structure_check(Remainder::zeros(d)));
  Remainder w = Remainder::zeros(d);
  w.alpha = gaussian(d->grid, 1.0, 1.0);
  for (double& x : w.alpha) x /= integrate_velocity(d->grid, gaussian(d->grid, 1.0, 1.0));
  CHECK_FALSE(orthogonal_structure_check(w));
  for (double& t : w.theta) t = 1.0;
  CHECK(orthogonal_structure_check(w));
  const ManifoldState m{d, 0.2, gaussian(d->grid, 0.1, 1.0)};
  CHECK(orthogonal_structure_check(scaled_remainder(m, 1e-3)));
  CHECK(norm_x(scaled_remainder(m, 1e-3)) == doctest::Approx(1e-3));
}
