#include "doctest.h"
#include "radkin/kinematics.hpp"
#include "test_util.hpp"

using namespace radkin;
using namespace testutil;

namespace {

double vdist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

}  // namespace

TEST_CASE("elastic head-on example") {
  const auto [v3, v4] = elastic_post({{1, 0, 0}, {-1, 0, 0}}, {0, 1, 0});
  CHECK(vdist(v3, {0, 1, 0}) < 1e-15);
  CHECK(vdist(v4, {0, -1, 0}) < 1e-15);
}

TEST_CASE("elastic identity deflection") {
  const Vec3 a{0.3, -1.2, 2.0}, b{-0.7, 0.4, 0.1};
  const Vec3 om = (a - b) * (1.0 / (a - b).norm());
  const auto [v3, v4] = elastic_post({a, b}, om);
  CHECK(vdist(v3, a) < 1e-14);
  CHECK(vdist(v4, b) < 1e-14);
}

TEST_CASE("elastic and nonelastic maps conserve momentum and shift energy by 2 eps0") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int s = 0; s < 20000; ++s) {
    const Vec3 a = random_vec(rng, 4.0), b = random_vec(rng, 4.0), om = random_unit(rng);
    const double e0 = 0.5;
    const auto [v3, v4] = elastic_post({a, b}, om);
    worst = std::max(worst, (a + b - v3 - v4).norm());
    worst = std::max(worst, std::abs(a.norm2() + b.norm2() - v3.norm2() - v4.norm2()) / (1.0 + a.norm2() + b.norm2()));
    if (auto post = nonelastic_post({a, b}, om, e0)) {
      worst = std::max(worst, (a + b - post->first - post->second).norm());
      const double shift = a.norm2() + b.norm2() - post->first.norm2() - post->second.norm2();
      worst = std::max(worst, std::abs(shift - 2.0 * e0) / (1.0 + a.norm2() + b.norm2()));
    }
    const auto [p1, p2] = nonelastic_pre({a, b}, om, e0);
    worst = std::max(worst, (a + b - p1 - p2).norm());
    const double gain = p1.norm2() + p2.norm2() - a.norm2() - b.norm2();
    worst = std::max(worst, std::abs(gain - 2.0 * e0) / (1.0 + a.norm2() + b.norm2()));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("nonelastic worked examples") {
  const auto post = nonelastic_post({{1, 0, 0}, {-1, 0, 0}}, {1, 0, 0}, 0.5);
  REQUIRE(post.has_value());
  CHECK(vdist(post->first, {std::sqrt(0.5), 0, 0}) < 1e-15);
  CHECK(vdist(post->second, {-std::sqrt(0.5), 0, 0}) < 1e-15);
  CHECK(post->first.norm2() + post->second.norm2() == doctest::Approx(1.0));

  // Threshold: |d|^2 = 4 eps0 exactly.
  const auto thr = nonelastic_post({{0.5, 0, 0}, {-0.5, 0, 0}}, {0, 0, 1}, 0.25);
  REQUIRE(thr.has_value());
  CHECK(thr->first.norm() < 1e-15);
  CHECK(thr->second.norm() < 1e-15);

  CHECK_FALSE(nonelastic_post({{0.4, 0, 0}, {-0.4, 0, 0}}, {0, 0, 1}, 0.25).has_value());

  const auto [p1, p2] = nonelastic_pre({{0, 0, 0}, {0, 0, 0}}, {0, 0, 1}, 0.5);
  CHECK(vdist(p1, {0, 0, std::sqrt(0.5)}) < 1e-15);
  CHECK(vdist(p2, {0, 0, -std::sqrt(0.5)}) < 1e-15);
}

TEST_CASE("nonelastic pre then post recovers the inputs") {
  std::mt19937_64 rng(13);
  double worst = 0.0;
  for (int s = 0; s < 10000; ++s) {
    const Vec3 a = random_vec(rng, 3.0), b = random_vec(rng, 3.0), om = random_unit(rng);
    const auto [p1, p2] = nonelastic_pre({a, b}, om, 0.7);
    // The pre-collision pair's relative direction is omega; the inverse uses
    // the direction of the original pair.
    const Vec3 d = a - b;
    const double n = d.norm();
    if (n < 1e-6) continue;
    const auto back = nonelastic_post({p1, p2}, d * (1.0 / n), 0.7);
    REQUIRE(back.has_value());
    worst = std::max(worst, vdist(back->first, a) + vdist(back->second, b));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("kernel values") {
  CHECK(kernel_ne12({{0.5, 0, 0}, {-0.5, 0, 0}}, 0.25, 1.0) == 0.0);
  CHECK(kernel_ne12({{2, 0, 0}, {0, 0, 0}}, 0.5, 1.0) == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(kernel_ne34({{1, 1, 1}, {1, 1, 1}}, 0.5, 1.0) == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(kernel_elastic({{3, 0, 0}, {0, 4, 0}}) == doctest::Approx(5.0));
  std::mt19937_64 rng(17);
  for (int s = 0; s < 2000; ++s) {
    const CollisionPair p{random_vec(rng, 5.0), random_vec(rng, 5.0)};
    const double bound = kernel_ne_bound(p, 0.5, 1.0);
    CHECK(kernel_ne12(p, 0.5, 1.0) <= bound);
    CHECK(kernel_ne34(p, 0.5, 1.0) <= bound);
  }
}

TEST_CASE("cut-off kernels") {
  CHECK(kernel_elastic_cutoff({{7, 0, 0}, {0, 0, 0}}, 3.0) == doctest::Approx(3.0));
  CHECK(kernel_elastic_cutoff({{2, 0, 0}, {0, 0, 0}}, 3.0) == doctest::Approx(2.0));
  const double n = 3.0;
  CHECK(kernel_ne12_cutoff({{n, 0, 0}, {0, 0, 0}}, 0.5, 1.0, n) ==
        doctest::Approx(kernel_ne12({{n, 0, 0}, {0, 0, 0}}, 0.5, 1.0)));
  CHECK(kernel_ne12_cutoff({{n + 1e-9, 0, 0}, {0, 0, 0}}, 0.5, 1.0, n) == 0.0);
  const double t34 = std::sqrt(7.0);
  CHECK(kernel_ne34_cutoff({{t34 - 1e-9, 0, 0}, {0, 0, 0}}, 0.5, 1.0, n) > 0.0);
  CHECK(kernel_ne34_cutoff({{t34 + 1e-9, 0, 0}, {0, 0, 0}}, 0.5, 1.0, n) == 0.0);
}

TEST_CASE("cut-off equivalence between pre and post relative speeds") {
  CHECK(cutoff_equivalence_check({{1.5, 0, 0}, {-1.5, 0, 0}}, {0, 1, 0}, 0.5, 3.0));
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> un(1.5, 10.0);
  int disagreements = 0, tested = 0;
  for (int s = 0; s < 20000; ++s) {
    const Vec3 a = random_vec(rng, 4.0), b = random_vec(rng, 4.0);
    if ((a - b).norm2() < 4.0 * 0.5) continue;
    ++tested;
    if (!cutoff_equivalence_check({a, b}, random_unit(rng), 0.5, un(rng))) ++disagreements;
  }
  CHECK(tested > 10000);
  CHECK(disagreements == 0);
  CHECK_THROWS_AS(cutoff_equivalence_check({{0.1, 0, 0}, {0, 0, 0}}, {0, 0, 1}, 0.5, 3.0), Error);
}
