// Benchmark: per-cell collision kernels, OpenMP-parallel vs the serial
// reference path, plus FFT convolution vs the direct-sum oracle.

#include <chrono>
#include <cmath>
#include <iostream>
#include <vector>

#include "kinlim/collision.hpp"
#include "kinlim/reference.hpp"

using namespace kinlim;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int n_v = 16, n_x = 32, reps = 3;
  if (argc > 1) n_v = std::atoi(argv[1]);
  if (argc > 2) n_x = std::atoi(argv[2]);
  if (argc > 3) reps = std::atoi(argv[3]);

  VelocityGrid g(n_v, 6.0);
  ConvEngine eng(g);
  Moments m{1.05, {0.1, 0.0, -0.05}, 1.1};
  FrameOps ops(eng, m);

  // one smooth input per cell
  std::vector<Vec> cells(std::size_t(n_x), Vec(g.size()));
  for (int c = 0; c < n_x; ++c)
    for (std::size_t a = 0; a < g.size(); ++a) {
      auto v = g.v(a);
      const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
      cells[std::size_t(c)][a] =
          std::exp(-0.25 * v2) * std::cos(0.3 * v[0] + 0.01 * c);
    }
  std::vector<Vec> out(std::size_t(n_x), Vec(g.size()));

  auto run = [&](bool serial) {
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r)
      parallel_for_cells(
          std::size_t(n_x),
          [&](std::size_t c) { ops.apply_L(cells[c].data(), out[c].data()); },
          serial);
    return seconds_since(t0) / reps;
  };

  std::cout << "per-cell linearized collision, n_v=" << n_v
            << ", cells=" << n_x << "\n";
  const double ts = run(true);
  const double tp = run(false);
  std::cout << "  serial reference: " << ts << " s/sweep\n";
  std::cout << "  parallel:         " << tp << " s/sweep  (speedup "
            << ts / tp << "x)\n";

  // deterministic reductions => identical results on both paths
  double diff = 0.0;
  std::vector<Vec> out2(std::size_t(n_x), Vec(g.size()));
  parallel_for_cells(
      std::size_t(n_x),
      [&](std::size_t c) { ops.apply_L(cells[c].data(), out2[c].data()); },
      true);
  for (int c = 0; c < n_x; ++c)
    for (std::size_t a = 0; a < g.size(); ++a)
      diff = std::max(diff,
                      std::fabs(out[std::size_t(c)][a] - out2[std::size_t(c)][a]));
  std::cout << "  max |parallel - serial| = " << diff << "\n";

  // FFT convolution vs direct sum (small grid: the oracle is O(N^2))
  {
    const int nv_small = std::min(n_v, 12);
    VelocityGrid gs(nv_small, 6.0);
    ConvEngine es(gs);
    Vec f(gs.size());
    for (std::size_t a = 0; a < gs.size(); ++a) {
      auto v = gs.v(a);
      f[a] = std::exp(-0.25 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    }
    auto t0 = Clock::now();
    SigmaField s1 = es.sigma(f);
    const double t_fft = seconds_since(t0);
    t0 = Clock::now();
    SigmaField s2 = sigma_direct(gs, f.data());
    const double t_dir = seconds_since(t0);
    double worst = 0.0;
    for (int q = 0; q < 6; ++q)
      for (std::size_t a = 0; a < gs.size(); ++a)
        worst = std::max(worst, std::fabs(s1.c[std::size_t(q)][a] -
                                          s2.c[std::size_t(q)][a]));
    std::cout << "convolution at n_v=" << nv_small << ": fft " << t_fft
              << " s, direct " << t_dir << " s, max component diff " << worst
              << "\n";
  }
  return 0;
}
