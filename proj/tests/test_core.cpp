#include "doctest.h"
#include "radkin/manifold.hpp"
#include "test_util.hpp"

using namespace radkin;
using namespace testutil;

TEST_CASE("integrate_velocity of the zero field is zero for every weight") {
  const VelocityGrid g(6, 3.0);
  const Field z(g.size(), 0.0);
  for (int k = 0; k <= 4; ++k) CHECK(integrate_velocity(g, z, k) == 0.0);
}

TEST_CASE("constant field on the two-node grid") {
  const VelocityGrid g(2, 1.0);
  CHECK(g.size() == 8);
  CHECK(g.cell_volume() == doctest::Approx(8.0));
  CHECK(integrate_velocity(g, Field(8, 1.0)) == doctest::Approx(64.0));
}

TEST_CASE("Gaussian moment matches the analytic integral") {
  const VelocityGrid g(32, 6.0);
  const Field f = gaussian(g, 1.0, 1.0);
  CHECK(std::abs(integrate_velocity(g, f) - std::pow(M_PI, 1.5)) < 1e-3);
  // Second moment: integral of |v|^2 e^{-|v|^2} is 3/2 pi^{3/2}.
  const double w2 = integrate_velocity(g, f, 2) - integrate_velocity(g, f, 0);
  CHECK(std::abs(w2 - 1.5 * std::pow(M_PI, 1.5)) < 1e-3);
  CHECK(norm_l1k(g, f, 4) == doctest::Approx(integrate_velocity(g, f, 4)));
}

TEST_CASE("grid rejects fewer than two nodes per axis and bad widths") {
  CHECK_THROWS_AS(VelocityGrid(1, 1.0), Error);
  CHECK_THROWS_AS(VelocityGrid(4, 0.0), Error);
  const VelocityGrid g(5, 2.0);
  CHECK(g.coord(0) == doctest::Approx(-2.0));
  CHECK(g.coord(4) == doctest::Approx(2.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 a = g.node(i), b = g.node(g.mirror(i));
    CHECK((a + b).norm() < 1e-14);
  }
}

TEST_CASE("sphere quadratures") {
  for (int m : {6, 12, 20, 32}) {
    const SphereQuadrature s(m);
    CHECK(s.size() == static_cast<std::size_t>(m));
    CHECK(integrate_sphere(s, Field(s.size(), 0.0)) == 0.0);
    CHECK(integrate_sphere(s, Field(s.size(), 3.5)) == doctest::Approx(3.5));
    Field nz(s.size()), nz2(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      nz[j] = s.nodes()[j].z;
      nz2[j] = s.nodes()[j].z * s.nodes()[j].z;
      CHECK(s.antipode(j) >= 0);
    }
    CHECK(std::abs(integrate_sphere(s, nz)) < 1e-12);
    CHECK(integrate_sphere(s, nz2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  // The 32-point set integrates quartics exactly: the average of z^4 is 1/5.
  const SphereQuadrature s(32);
  Field z4(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) z4[j] = std::pow(s.nodes()[j].z, 4);
  CHECK(integrate_sphere(s, z4) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_THROWS_AS(SphereQuadrature(7), Error);
}

TEST_CASE("compose on the ground state and on lambda = 1/4") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(3);
  const Field g = random_positive(d->grid, rng, 1.0);
  ManifoldState m{d, 0.0, g};
  FullState s = compose(m, Remainder::zeros(d));
  CHECK(max_abs_diff(s.f1, g) == 0.0);
  for (double x : s.f2) CHECK(x == 0.0);
  for (double x : s.q) CHECK(x == 0.0);

  m.lambda = 0.25;
  s = compose(m, Remainder::zeros(d));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(s.f2[i] == doctest::Approx(0.25 * g[i]));
  for (double x : s.q) CHECK(x == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("compose with a remainder adds componentwise and round-trips") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(5);
  const Field g = random_positive(d->grid, rng, 1.0);
  const ManifoldState m{d, 0.25, g};
  Remainder w = Remainder::zeros(d);
  for (std::size_t i = 0; i < g.size(); ++i) w.alpha[i] = 1e-4 * g[i] * std::sin(3.0 * i);
  const double ia = integrate_velocity(d->grid, w.alpha);
  for (double& t : w.theta) t = ia;
  const FullState s = compose(m, w);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(s.f1[i] == doctest::Approx(g[i] + w.alpha[i]));
    CHECK(s.f2[i] == doctest::Approx(0.25 * g[i] - w.alpha[i]));
  }
  const Params p;
  const auto r = decompose(s, p);
  CHECK(std::abs(r.m.lambda - 0.25) < p.tol_newton);
  CHECK(max_abs_diff(r.m.f, g) < 1e-12);
  CHECK(max_abs_diff(r.w.alpha, w.alpha) < 1e-12);
  CHECK(max_abs_diff(r.w.theta, w.theta) < 1e-12);
}

TEST_CASE("norms") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(7);
  const Field g = random_positive(d->grid, rng, 2.0);
  Remainder w = Remainder::zeros(d);
  w.alpha = g;
  for (double& t : w.theta) t = 0.5;
  CHECK(norm_x(w) == doctest::Approx(2.0 * norm_l1k(d->grid, g, 2) + 0.5));
  const FullState a = compose(ManifoldState{d, 0.1, g}, Remainder::zeros(d));
  CHECK(distance_x(a, a) == 0.0);
}

TEST_CASE("parameter validation") {
  Params p;
  CHECK_NOTHROW(p.validate());
  p.eps0 = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = Params{};
  p.eps_scale = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  Field bad{1.0, std::nan("")};
  CHECK_THROWS_AS(require_finite(bad, "bad"), Error);
}
