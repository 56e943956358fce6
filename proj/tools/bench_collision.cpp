#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "radkin/collision.hpp"

using namespace radkin;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 16;
  const double L = argc > 2 ? std::atof(argv[2]) : 6.0;
  const double cut = argc > 3 ? std::atof(argv[3]) : 0.0;
  auto disc = make_discretization(n, L, 32);
  FullState s = FullState::zeros(disc);
  for (std::size_t i = 0; i < disc->grid.size(); ++i) {
    const Vec3 v = disc->grid.node(i);
    s.f1[i] = 0.2 * std::exp(-0.5 * (v - Vec3(1, 0, 0)).norm2()) + 0.2 * std::exp(-0.5 * (v + Vec3(1, 0, 0)).norm2());
    s.f2[i] = 0.3 * s.f1[i];
  }
  for (auto& q : s.q) q = 0.4;
  Params p;
  const auto t0 = std::chrono::steady_clock::now();
  auto inc = cut > 0 ? eval_K(s, p, cut) : eval_K(s, p);
  const auto t1 = std::chrono::steady_clock::now();
  const auto m = increment_moments(inc, disc->grid, p.eps0);
  std::printf("N=%d eval_K %.3f s  mass %.3e mom %.3e energy %.3e intK2 %.6e flux %.6e\n", n,
              std::chrono::duration<double>(t1 - t0).count(), m[0], m[1], m[4], m[5], inc.excitation_flux);
  double k1 = 0;
  for (double x : inc.d_f1) k1 += x;
  std::printf("strong intK1 %.6e\n", k1 * disc->grid.cell_volume());
}
