#pragma once
// Shared test utilities: seeded random smooth fields and slope fits.

#include <random>
#include <vector>

#include "cgoscatter/fieldops.hpp"
#include "cgoscatter/grid.hpp"

namespace cgstest {

using cgs::cplx;

// random mixture of Gaussian bumps, tapered to compact support in the window
inline cgs::Field randomSmoothField(cgs::Grid g, uint64_t seed, int bumps = 5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-0.5 * g.R, 0.5 * g.R);
  std::uniform_real_distribution<double> wid(0.15 * g.R, 0.4 * g.R);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  struct Bump { cplx c; double w; cplx a; };
  std::vector<Bump> bs;
  for (int i = 0; i < bumps; ++i)
    bs.push_back({cplx(pos(rng), pos(rng)), wid(rng), cplx(amp(rng), amp(rng))});
  cgs::Field F = cgs::sample(g, [&](cplx z) {
    cplx s = 0;
    for (const auto& b : bs) s += b.a * std::exp(-std::norm(z - b.c) / (b.w * b.w));
    return s;
  });
  return cgs::taper(F);
}

// least-squares slope of log(y) against log(x)
inline double loglogSlope(const std::vector<double>& x,
                          const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace cgstest
