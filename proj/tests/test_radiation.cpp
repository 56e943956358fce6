#include "doctest.h"
#include "radkin/limit_solver.hpp"
#include "radkin/radiation.hpp"
#include "test_util.hpp"

using namespace radkin;
using namespace testutil;

TEST_CASE("radiative operator vanishes on the steady manifold") {
  const auto d = make_discretization(6, 3.0, 32);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> ul(0.0, 0.9);
  const Params p;
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const ManifoldState m{d, ul(rng), random_positive(d->grid, rng, 2.0)};
    worst = std::max(worst, max_abs(eval_R(manifold_point(m), p)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("no photons and no excited molecules") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(43);
  FullState s = FullState::zeros(d);
  s.f1 = random_positive(d->grid, rng, 1.0);
  CHECK(max_abs(eval_R(s, Params{})) == 0.0);
}

TEST_CASE("pure absorption") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(47);
  FullState s = FullState::zeros(d);
  s.f1 = random_positive(d->grid, rng, 1.5);
  s.q.assign(d->sphere.size(), 1.0);
  const auto r = eval_R(s, Params{});
  for (std::size_t i = 0; i < s.f1.size(); ++i) {
    CHECK(r.d_f1[i] == doctest::Approx(-s.f1[i]));
    CHECK(r.d_f2[i] == doctest::Approx(s.f1[i]));
  }
  for (double x : r.d_q) CHECK(x == doctest::Approx(-1.5));
}

TEST_CASE("linearization about the manifold") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(53);
  const Params p;
  const ManifoldState base{d, 0.3, random_positive(d->grid, rng, 1.0)};
  Remainder w = Remainder::zeros(d);
  for (std::size_t i = 0; i < w.alpha.size(); ++i) w.alpha[i] = base.f[i] * std::cos(1.7 * i);
  for (std::size_t j = 0; j < w.theta.size(); ++j) w.theta[j] = 0.5 + 0.3 * std::sin(2.1 * j);

  const auto zero = eval_L_manifold(base, Remainder::zeros(d), p);
  CHECK(max_abs(zero) == 0.0);

  const auto lin = eval_L_manifold(base, w, p);
  const auto quad = eval_Lcal(w, p);
  double prev = INFINITY;
  for (double h : {1e-2, 1e-3, 1e-4}) {
    Remainder hw = w;
    for (double& x : hw.alpha) x *= h;
    for (double& x : hw.theta) x *= h;
    const auto r = eval_R(compose(base, hw), p);
    double err = 0.0;
    for (std::size_t i = 0; i < r.d_f1.size(); ++i) {
      err = std::max(err, std::abs(r.d_f1[i] / h - lin.d_f1[i] - h * quad.d_f1[i]));
      err = std::max(err, std::abs(r.d_f2[i] / h - lin.d_f2[i] - h * quad.d_f2[i]));
    }
    for (std::size_t j = 0; j < r.d_q.size(); ++j)
      err = std::max(err, std::abs(r.d_q[j] / h - lin.d_q[j] - h * quad.d_q[j]));
    // The quadratic part is exact, so only roundoff remains.
    CHECK(err < 1e-9);
    // Without the quadratic part the error is O(h).
    double err_lin = 0.0;
    for (std::size_t i = 0; i < r.d_f1.size(); ++i) err_lin = std::max(err_lin, std::abs(r.d_f1[i] / h - lin.d_f1[i]));
    CHECK(err_lin < prev);
    prev = err_lin;
  }
}

TEST_CASE("tangent directions are annihilated") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(59);
  const Params p;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 10; ++s) {
    const ManifoldState base{d, 0.1 + 0.08 * s, random_positive(d->grid, rng, 1.0)};
    const double eta = u(rng);
    Field xi(d->grid.size()), g2(d->grid.size());
    for (std::size_t i = 0; i < xi.size(); ++i) {
      xi[i] = u(rng);
      g2[i] = xi[i] + (1.0 - base.lambda) * eta;
    }
    const Field hq(d->sphere.size(), eta);
    CHECK(max_abs(eval_L_multiplicative(base, xi, g2, hq, p)) < 1e-13);
    // A non-tangent direction is not annihilated.
    Field g2bad = g2;
    for (double& x : g2bad) x += 0.1;
    CHECK(max_abs(eval_L_multiplicative(base, xi, g2bad, hq, p)) > 1e-4);
  }
}

TEST_CASE("quadratic part") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(61);
  const Params p;
  CHECK(max_abs(eval_Lcal(Remainder::zeros(d), p)) == 0.0);
  Remainder w = Remainder::zeros(d);
  w.alpha = random_positive(d->grid, rng, 1.0);
  CHECK(max_abs(eval_Lcal(w, p)) == 0.0);
  for (std::size_t j = 0; j < w.theta.size(); ++j) w.theta[j] = 0.2 + 0.1 * j;
  Remainder w3 = w;
  for (double& x : w3.alpha) x *= 3.0;
  for (double& x : w3.theta) x *= 3.0;
  const auto a = eval_Lcal(w, p), b = eval_Lcal(w3, p);
  for (std::size_t i = 0; i < a.d_f1.size(); ++i) CHECK(b.d_f1[i] == doctest::Approx(9.0 * a.d_f1[i]));
  for (std::size_t j = 0; j < a.d_q.size(); ++j) CHECK(b.d_q[j] == doctest::Approx(9.0 * a.d_q[j]));
}

TEST_CASE("steady photon density") {
  const auto d = make_discretization(6, 3.0, 12);
  std::mt19937_64 rng(67);
  FullState s = FullState::zeros(d);
  s.f1 = random_positive(d->grid, rng, 1.0);
  s.f2 = s.f1;
  for (double& x : s.f2) x *= 0.25;
  CHECK(photon_steady_state(s) == doctest::Approx(1.0 / 3.0));
  s.f1 = random_positive(d->grid, rng, 2.0);
  s.f2 = random_positive(d->grid, rng, 0.5);
  CHECK(photon_steady_state(s) == doctest::Approx(1.0 / 3.0));
  s.f2 = s.f1;
  CHECK_THROWS_AS(photon_steady_state(s), Error);
}
