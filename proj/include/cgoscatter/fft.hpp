#pragma once
// FFTW wrapper with a synchronized plan cache. Plans are created unaligned so
// they can run on arbitrary std::vector storage; execution via
// fftw_execute_dft is re-entrant.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "grid.hpp"

namespace cgs {

namespace detail {

inline std::mutex& fftwMutex() {
  static std::mutex m;
  return m;
}

inline fftw_plan planFor(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lk(fftwMutex());
  auto key = std::make_pair(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cplx> tmp(static_cast<size_t>(n) * n);
  fftw_plan p = fftw_plan_dft_2d(
      n, n, reinterpret_cast<fftw_complex*>(tmp.data()),
      reinterpret_cast<fftw_complex*>(tmp.data()), sign,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache[key] = p;
  return p;
}

} // namespace detail

// In-place unnormalized 2-D transform of an n x n row-major array.
inline void fft2(std::vector<cplx>& a, int n, int sign) {
  fftw_plan p = detail::planFor(n, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(a.data()),
                   reinterpret_cast<fftw_complex*>(a.data()));
}

inline void fft2Forward(std::vector<cplx>& a, int n) { fft2(a, n, FFTW_FORWARD); }
inline void fft2Backward(std::vector<cplx>& a, int n) { fft2(a, n, FFTW_BACKWARD); }

// DFT index -> signed wavenumber index in [-n/2, n/2)
inline int signedIndex(int i, int n) { return (i < (n + 1) / 2) ? i : i - n; }

// smallest m >= x whose prime factors are in {2,3,5,7}
inline int nextFastSize(int x) {
  auto smooth = [](int m) {
    for (int p : {2, 3, 5, 7})
      while (m % p == 0) m /= p;
    return m == 1;
  };
  int m = x;
  while (!smooth(m)) ++m;
  return m;
}

} // namespace cgs
