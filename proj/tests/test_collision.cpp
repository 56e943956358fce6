#include "doctest.h"
#include "radkin/collision.hpp"
#include "radkin/limit_solver.hpp"
#include "test_util.hpp"

using namespace radkin;
using namespace testutil;

namespace {

FullState random_state(const DiscPtr& d, std::mt19937_64& rng) {
  FullState s = FullState::zeros(d);
  s.f1 = random_positive(d->grid, rng, 1.0);
  s.f2 = random_positive(d->grid, rng, 0.3);
  return s;
}

double abs_moment_scale(const FullState& s, const CollisionIncrement& inc) {
  const auto& g = s.disc->grid;
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    m += (std::abs(inc.d_f1[i]) + std::abs(inc.d_f2[i])) * (1.0 + g.speed2()[i]);
  return m * g.cell_volume();
}

}  // namespace

TEST_CASE("zero state gives a zero increment") {
  const auto d = make_discretization(6, 3.0, 12);
  const auto inc = eval_K(FullState::zeros(d), Params{});
  for (double x : inc.d_f1) CHECK(x == 0.0);
  for (double x : inc.d_f2) CHECK(x == 0.0);
  const auto corr = eval_K_conservative(FullState::zeros(d), Params{});
  for (double x : corr.d_f1) CHECK(x == 0.0);
}

TEST_CASE("weak moments vanish for the collision invariants") {
  const auto d = make_discretization(8, 4.0, 12);
  std::mt19937_64 rng(21);
  const Params p;
  std::vector<TestPair> tests;
  tests.push_back({{1.0, {}, 0.0}, {1.0, {}, 0.0}});
  for (int k = 0; k < 3; ++k) {
    Vec3 e{};
    if (k == 0) e = {1, 0, 0};
    if (k == 1) e = {0, 1, 0};
    if (k == 2) e = {0, 0, 1};
    tests.push_back({{0.0, e, 0.0}, {0.0, e, 0.0}});
  }
  tests.push_back({{0.0, {}, 1.0}, {2.0 * p.eps0, {}, 1.0}});
  // phi1 = 1, phi2 = 0 gives the excitation flux, which is not an invariant.
  tests.push_back({{1.0, {}, 0.0}, {0.0, {}, 0.0}});
  for (int trial = 0; trial < 3; ++trial) {
    const FullState s = random_state(d, rng);
    const auto w = weak_moments(s, p, tests);
    const double scale = std::abs(w[5]) + 1e-3;
    for (int k = 0; k < 5; ++k) CHECK(std::abs(w[k]) <= 1e-12 * scale);
    CHECK(std::abs(w[5]) > 1e-6);
    const double single = weak_moment(s, p, [](const Vec3&) { return 1.0; }, [](const Vec3&) { return 0.0; });
    CHECK(single == doctest::Approx(w[5]).epsilon(1e-12));
  }
}

TEST_CASE("conservative increments satisfy all invariants") {
  const auto d = make_discretization(8, 4.0, 12);
  std::mt19937_64 rng(23);
  const Params p;
  for (int trial = 0; trial < 3; ++trial) {
    const FullState s = random_state(d, rng);
    const auto inc = eval_K_conservative(s, p);
    const auto mom = increment_moments(inc, d->grid, p.eps0);
    const double scale = abs_moment_scale(s, inc);
    for (int k = 0; k < 5; ++k) CHECK(std::abs(mom[k]) <= 1e-10 * scale);
    CHECK(mom[5] == doctest::Approx(-inc.excitation_flux).epsilon(1e-10));
    for (std::size_t i = 0; i < inc.d_f1.size(); ++i) {
      CHECK(std::isfinite(inc.d_f1[i]));
      CHECK(inc.loss_f1[i] >= 0.0);
      CHECK(inc.loss_f2[i] >= 0.0);
    }
  }
}

TEST_CASE("elastic-only operator with a closed nonelastic channel") {
  const auto d = make_discretization(8, 4.0, 12);
  std::mt19937_64 rng(29);
  Params p;
  p.eps0 = 1e6;
  FullState s = FullState::zeros(d);
  s.f1 = random_positive(d->grid, rng, 1.0);
  const auto raw = eval_K(s, p);
  CHECK(std::abs(raw.excitation_flux) < 1e-14);
  const auto corr = conservative_correction(raw, s, p);
  const double scale = abs_moment_scale(s, corr);
  CHECK(std::abs(integrate_velocity(d->grid, corr.d_f1)) < 1e-10 * scale);
  CHECK(std::abs(integrate_velocity(d->grid, corr.d_f2)) < 1e-10 * scale);
  // The raw strong form is only approximately conservative.
  CHECK(std::abs(integrate_velocity(d->grid, raw.d_f1)) < 0.05 * scale);
}

TEST_CASE("conservative correction leaves consistent data alone") {
  const auto d = make_discretization(8, 4.0, 12);
  std::mt19937_64 rng(31);
  const Params p;
  const FullState s = random_state(d, rng);
  const auto once = eval_K_conservative(s, p);
  const auto twice = conservative_correction(once, s, p);
  const double scale = *std::max_element(once.d_f1.begin(), once.d_f1.end());
  CHECK(max_abs_diff(once.d_f1, twice.d_f1) < 1e-12 * scale);
  CHECK(max_abs_diff(once.d_f2, twice.d_f2) < 1e-12 * scale);
  CHECK(twice.correction_size < 1e-10);

  CollisionIncrement zero;
  zero.d_f1.assign(d->grid.size(), 0.0);
  zero.d_f2 = zero.loss_f1 = zero.loss_f2 = zero.d_f1;
  const auto z = conservative_correction(zero, FullState::zeros(d), p);
  for (double x : z.d_f1) CHECK(x == 0.0);
}

TEST_CASE("correction is a small fraction of a near-Maxwellian increment at N = 16") {
  const auto d = make_discretization(16, 5.0, 12);
  const Params p;
  FullState s = FullState::zeros(d);
  s.f1 = gaussian(d->grid, 0.3, 1.0);
  for (std::size_t i = 0; i < s.f1.size(); ++i) {
    const Vec3 v = d->grid.node(i);
    s.f1[i] *= 1.0 + 0.2 * v.x * std::exp(-0.2 * v.norm2());
  }
  s.f2 = gaussian(d->grid, 0.1, 1.0);
  const auto inc = eval_K_conservative(s, p);
  CHECK(inc.correction_size < 0.01);
}

TEST_CASE("Maxwellian equilibrium is nearly stationary at N = 24") {
  const auto d = make_discretization(24, 5.0, 12);
  const Params p;
  const double k = 1.0;
  const double lam = std::exp(-2.0 * k * p.eps0);
  FullState s = FullState::zeros(d);
  s.f1 = gaussian(d->grid, 0.2, k);
  s.f2 = s.f1;
  for (double& x : s.f2) x *= lam;
  s.q.assign(d->sphere.size(), lam / (1.0 - lam));
  const auto inc = eval_K(s, p);
  const double size = l1(d->grid, s.f1) + l1(d->grid, s.f2);
  CHECK(l1(d->grid, inc.d_f1) + l1(d->grid, inc.d_f2) < 1e-3 * size);

  SUBCASE("weak and strong excitation flux agree within 2%") {
    ManifoldState m{d, 0.2, gaussian(d->grid, 0.2, 0.7, {0.3, 0, 0})};
    const FullState x = manifold_point(m);
    const auto raw = eval_K(x, p);
    const double strong = integrate_velocity(d->grid, raw.d_f1);
    const double weak = weak_moment(x, p, [](const Vec3&) { return 1.0; }, [](const Vec3&) { return 0.0; });
    CHECK(std::abs(strong - weak) < 0.02 * std::abs(weak));
    CHECK(raw.excitation_flux == doctest::Approx(weak).epsilon(1e-10));
  }
}

TEST_CASE("cut-off kernels change the increment and results are reproducible") {
  const auto d = make_discretization(8, 4.0, 12);
  std::mt19937_64 rng(37);
  const Params p;
  const FullState s = random_state(d, rng);
  const auto a = eval_K(s, p, 2.0);
  const auto b = eval_K(s, p, 2.0);
  const auto c = eval_K(s, p);
  CHECK(max_abs_diff(a.d_f1, b.d_f1) == 0.0);
  CHECK(max_abs_diff(a.d_f1, c.d_f1) > 0.0);
  const int saved = default_threads();
  set_default_threads(2);
  const auto e = eval_K(s, p, 2.0);
  set_default_threads(saved);
  CHECK(max_abs_diff(a.d_f1, e.d_f1) < 1e-12 * l1(d->grid, a.loss_f1));
}
