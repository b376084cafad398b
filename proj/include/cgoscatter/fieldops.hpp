#pragma once
// Grid calculus: spectral derivatives, smooth cutoffs, weighted norms, and
// free-space inverse operators realized as FFT convolutions with truncated
// kernels. Truncating the kernel at radius L and padding the transform so the
// period exceeds L + (window diameter) makes the periodic convolution agree
// with the free-space one exactly for all offsets that occur; the kernel
// transforms below are the closed-form Fourier transforms of the truncated
// kernels.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "fft.hpp"
#include "grid.hpp"
#include "special.hpp"

namespace cgs {

// --- derivatives -------------------------------------------------------------

namespace detail {

// multiply the DFT of F by a symbol s(kx, ky); period n*dx per axis
inline Field applySymbol(const Field& F,
                         const std::function<cplx(double, double)>& sym) {
  int n = F.g.n;
  double P = n * F.g.dx();
  double dk = 2.0 * M_PI / P;
  std::vector<cplx> a = F.v;
  fft2Forward(a, n);
  for (int ix = 0; ix < n; ++ix) {
    double kx = dk * signedIndex(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      double ky = dk * signedIndex(iy, n);
      a[static_cast<size_t>(ix) * n + iy] *= sym(kx, ky);
    }
  }
  fft2Backward(a, n);
  Field out(F.g);
  double inv = 1.0 / (static_cast<double>(n) * n);
  for (size_t i = 0; i < a.size(); ++i) out.v[i] = a[i] * inv;
  return out;
}

} // namespace detail

// d/dz = (d/dx - i d/dy)/2, symbol (i kx + ky)/2
inline Field ddz(const Field& F) {
  return detail::applySymbol(F, [](double kx, double ky) {
    return cplx(ky * 0.5, kx * 0.5);
  });
}

// d/dzbar = (d/dx + i d/dy)/2, symbol (i kx - ky)/2
inline Field ddzbar(const Field& F) {
  return detail::applySymbol(F, [](double kx, double ky) {
    return cplx(-ky * 0.5, kx * 0.5);
  });
}

// positive Laplacian -(d^2/dx^2 + d^2/dy^2) = -4 ddz ddzbar, symbol |k|^2
inline Field laplacianPos(const Field& F) {
  return detail::applySymbol(F, [](double kx, double ky) {
    return cplx(kx * kx + ky * ky, 0.0);
  });
}

inline Field gradX(const Field& F) {
  return detail::applySymbol(F, [](double kx, double) { return cplx(0.0, kx); });
}

inline Field gradY(const Field& F) {
  return detail::applySymbol(F, [](double, double ky) { return cplx(0.0, ky); });
}

// --- smooth cutoffs ----------------------------------------------------------

// smooth step: 1 at t<=0, 0 at t>=1. erf profile: its spectrum decays like a
// Gaussian, which the exp(-1/t) bump does not match at practical resolutions;
// the derivative mismatch at the clamp points is erfc(a) ~ 2e-10.
inline double smoothStepDown(double t) {
  if (t <= 0) return 1.0;
  if (t >= 1) return 0.0;
  const double a = 4.5;
  static const double lo = std::erfc(a), hi = std::erfc(-a);
  return (std::erfc(a * (2.0 * t - 1.0)) - lo) / (hi - lo);
}

// radial bump: 1 on |z-c| <= r0, 0 on |z-c| >= r1
inline Field radialCutoff(Grid g, cplx c, double r0, double r1) {
  return sample(g, [=](cplx z) {
    return cplx(smoothStepDown((std::abs(z - c) - r0) / (r1 - r0)), 0.0);
  });
}

// separable window taper: 1 on |x|,|y| <= frac*R, 0 beyond outer*R
inline Field windowTaper(Grid g, double frac = 0.8, double outer = 0.98) {
  Field F(g);
  std::vector<double> s(g.n);
  for (int i = 0; i < g.n; ++i) {
    double t = (std::abs(g.coord(i)) - frac * g.R) / ((outer - frac) * g.R);
    s[i] = smoothStepDown(t);
  }
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      F.at(ix, iy) = s[ix] * s[iy];
  return F;
}

inline Field taper(const Field& F, double frac = 0.8, double outer = 0.98) {
  return F * windowTaper(F.g, frac, outer);
}

// --- truncated-kernel convolutions -------------------------------------------

namespace detail {

struct ConvGeometry {
  int m;       // padded transform size
  double L;    // kernel truncation radius
  double dk;   // padded wavenumber spacing
};

inline ConvGeometry convGeometry(Grid g) {
  ConvGeometry cg;
  cg.L = 2.88 * g.R;
  // period must exceed L + diameter of the offset set (2*sqrt(2)*R per axis
  // pair, i.e. max |offset| = 2*sqrt(2)*R)
  int mMin = static_cast<int>(std::ceil((cg.L + 2.0 * std::sqrt(2.0) * g.R) / g.dx())) + 2;
  cg.m = nextFastSize(std::max(mMin, 2 * g.n));
  cg.dk = 2.0 * M_PI / (cg.m * g.dx());
  return cg;
}

inline std::shared_ptr<const std::vector<cplx>> kernelFT(
    const std::string& name, Grid g, double lambda,
    const std::function<cplx(double kx, double ky, double L)>& eval) {
  static std::map<std::string, std::shared_ptr<const std::vector<cplx>>> cache;
  static std::mutex mu;
  char key[160];
  std::snprintf(key, sizeof(key), "%s|n=%d|R=%.17g|l=%.17g", name.c_str(), g.n,
                g.R, lambda);
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  ConvGeometry cg = convGeometry(g);
  auto arr = std::make_shared<std::vector<cplx>>(
      static_cast<size_t>(cg.m) * cg.m);
  for (int ix = 0; ix < cg.m; ++ix) {
    double kx = cg.dk * signedIndex(ix, cg.m);
    for (int iy = 0; iy < cg.m; ++iy) {
      double ky = cg.dk * signedIndex(iy, cg.m);
      (*arr)[static_cast<size_t>(ix) * cg.m + iy] = eval(kx, ky, cg.L);
    }
  }
  std::lock_guard<std::mutex> lk(mu);
  cache[key] = arr;
  return arr;
}

inline void checkSupported(const Field& F, const char* who) {
  double peak = 0, edge = 0;
  int n = F.g.n;
  for (const auto& x : F.v) peak = std::max(peak, std::abs(x));
  for (int i = 0; i < n; ++i) {
    edge = std::max({edge, std::abs(F.at(i, 0)), std::abs(F.at(i, n - 1)),
                     std::abs(F.at(0, i)), std::abs(F.at(n - 1, i))});
  }
  if (peak > 0 && edge > 1e-5 * peak)
    throw std::runtime_error(std::string(who) +
                             ": input not supported in window (tail mass at "
                             "boundary); taper first");
}

inline Field convolve(const Field& F, const std::string& name, double lambda,
                      const std::function<cplx(double, double, double)>& eval) {
  checkSupported(F, name.c_str());
  ConvGeometry cg = convGeometry(F.g);
  auto K = kernelFT(name, F.g, lambda, eval);
  int n = F.g.n, m = cg.m;
  std::vector<cplx> a(static_cast<size_t>(m) * m, cplx(0, 0));
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      a[static_cast<size_t>(ix) * m + iy] = F.at(ix, iy);
  fft2Forward(a, m);
  for (size_t i = 0; i < a.size(); ++i) a[i] *= (*K)[i];
  fft2Backward(a, m);
  Field out(F.g);
  double inv = 1.0 / (static_cast<double>(m) * m);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      out.at(ix, iy) = a[static_cast<size_t>(ix) * m + iy] * inv;
  return out;
}

} // namespace detail

// R: inverts d/dz. Kernel 1/(pi * conj(z)), truncated at |z| = L.
// FT: -2i e^{i arg k} (1 - J0(|k|L)) / |k|.
inline Field cauchyTransform(const Field& F) {
  return detail::convolve(F, "cauchy", 0.0, [](double kx, double ky, double L) {
    double k = std::hypot(kx, ky);
    if (k == 0) return cplx(0, 0);
    cplx eitheta(kx / k, ky / k);
    return cplx(0, -2.0) * eitheta * (1.0 - besselJ(0, k * L)) / k;
  });
}

// inverts d/dzbar. Kernel 1/(pi z), truncated.
inline Field cauchybarTransform(const Field& F) {
  return detail::convolve(F, "cauchybar", 0.0, [](double kx, double ky, double L) {
    double k = std::hypot(kx, ky);
    if (k == 0) return cplx(0, 0);
    cplx emitheta(kx / k, -ky / k);
    return cplx(0, -2.0) * emitheta * (1.0 - besselJ(0, k * L)) / k;
  });
}

// G: inverts the positive Laplacian. Kernel -(1/2pi) log |z|, truncated.
inline Field greenLaplace(const Field& F) {
  return detail::convolve(F, "green", 0.0, [](double kx, double ky, double L) {
    double k = std::hypot(kx, ky);
    if (k == 0) return cplx(L * L * 0.25 - 0.5 * L * L * std::log(L), 0.0);
    double x = k * L;
    return cplx((1.0 - besselJ(0, x)) / (k * k) -
                    L * std::log(L) * besselJ(1, x) / k,
                0.0);
  });
}

// outgoing inverse of (positive Laplacian - lambda^2): kernel (i/4) H0^(1)(lambda |z|).
inline Field helmholtzOutgoing(const Field& F, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("helmholtzOutgoing: lambda must be positive");
  return detail::convolve(
      F, "helmholtz", lambda, [lambda](double kx, double ky, double L) -> cplx {
        double k = std::hypot(kx, ky);
        cplx H0 = hankel1(0, lambda * L);
        cplx H1 = hankel1(1, lambda * L);
        auto N = [&](double kk) -> cplx {
          return L * kk * besselJ(1, kk * L) * H0 -
                 L * lambda * besselJ(0, kk * L) * H1 - cplx(0, 2.0 / M_PI);
        };
        cplx ip2(0, M_PI / 2);
        if (std::abs(k - lambda) > 1e-3 * std::max(1.0, lambda))
          return ip2 * N(k) / ((k - lambda) * (k + lambda));
        // removable singularity at k = lambda: N(lambda) = 0 by the Wronskian
        double x = k * L, xl = lambda * L;
        cplx Np = L * L * k * besselJ(0, x) * H0 +
                  L * L * lambda * besselJ(1, x) * H1;
        (void)xl;
        cplx Npp = L * L * besselJ(0, x) * H0 - L * L * L * k * besselJ(1, x) * H0 +
                   L * L * L * lambda * besselJPrime(1, x) * H1;
        return ip2 * (Np + 0.5 * Npp * (k - lambda)) / (k + lambda);
      });
}

// --- weights and norms --------------------------------------------------------

inline double defaultX(cplx z) { return 1.0 / std::sqrt(1.0 + std::norm(z)); }

struct WeightSpec {
  // weight(z) multiplies the field inside the norm; the membership norm of
  // x^{-J} L^2 uses weight x^J, of e^{-gamma/x} L^inf uses weight e^{gamma/x}.
  std::function<double(cplx)> weight;

  double operator()(cplx z) const { return weight(z); }

  static WeightSpec unit() {
    return {[](cplx) { return 1.0; }};
  }
  static WeightSpec polynomial(double J,
                               std::function<double(cplx)> x = defaultX) {
    return {[J, x](cplx z) { return std::pow(x(z), J); }};
  }
  // e^{gamma |z|} by default (1/x = |z|)
  static WeightSpec exponential(double gamma) {
    return {[gamma](cplx z) { return std::exp(gamma * std::abs(z)); }};
  }
  // e^{gamma |z|^2} by default
  static WeightSpec gaussian(double gamma) {
    return {[gamma](cplx z) { return std::exp(gamma * std::norm(z)); }};
  }
  static WeightSpec fromFunction(std::function<double(cplx)> w) {
    return {std::move(w)};
  }
};

enum class NormP { One, Two, Inf };

// Quadrature over the window (trapezoid weights along each axis; interiorFrac
// < 1 restricts to the central square of that fractional half-width).
inline double weightedNorm(const Field& F, const WeightSpec& w, NormP p,
                           double interiorFrac = 1.0) {
  const Grid& g = F.g;
  double d = g.dx();
  double lim = interiorFrac * g.R + 1e-12;
  double acc = 0, mx = 0;
  for (int ix = 0; ix < g.n; ++ix) {
    double x = g.coord(ix);
    if (std::abs(x) > lim) continue;
    double wx = (ix == 0 || ix == g.n - 1) ? 0.5 : 1.0;
    for (int iy = 0; iy < g.n; ++iy) {
      double y = g.coord(iy);
      if (std::abs(y) > lim) continue;
      double wy = (iy == 0 || iy == g.n - 1) ? 0.5 : 1.0;
      double val = w(cplx(x, y)) * std::abs(F.at(ix, iy));
      if (!std::isfinite(val))
        throw std::runtime_error("weightedNorm: non-finite weighted value");
      switch (p) {
        case NormP::One: acc += wx * wy * val; break;
        case NormP::Two: acc += wx * wy * val * val; break;
        case NormP::Inf: mx = std::max(mx, val); break;
      }
    }
  }
  switch (p) {
    case NormP::One: return acc * d * d;
    case NormP::Two: return std::sqrt(acc * d * d);
    default: return mx;
  }
}

inline double l2Norm(const Field& F, double interiorFrac = 1.0) {
  return weightedNorm(F, WeightSpec::unit(), NormP::Two, interiorFrac);
}

inline double relErrInterior(const Field& A, const Field& B,
                             double interiorFrac = 0.9) {
  Field D = A - B;
  double den = l2Norm(B, interiorFrac);
  if (den == 0) return l2Norm(D, interiorFrac);
  return l2Norm(D, interiorFrac) / den;
}

// bicubic (Catmull-Rom) interpolation at an off-grid point
inline cplx interpolate(const Field& F, cplx zq) {
  const Grid& g = F.g;
  double fx = (zq.real() + g.R) / g.dx();
  double fy = (zq.imag() + g.R) / g.dx();
  int ix = static_cast<int>(std::floor(fx));
  int iy = static_cast<int>(std::floor(fy));
  if (ix < 1 || ix > g.n - 3 || iy < 1 || iy > g.n - 3)
    throw std::invalid_argument("interpolate: point too close to window edge");
  double tx = fx - ix, ty = fy - iy;
  auto w = [](double t) {
    return std::array<double, 4>{
        0.5 * (-t * t * t + 2 * t * t - t),
        0.5 * (3 * t * t * t - 5 * t * t + 2),
        0.5 * (-3 * t * t * t + 4 * t * t + t),
        0.5 * (t * t * t - t * t)};
  };
  auto wx = w(tx), wy = w(ty);
  cplx acc = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      acc += wx[a] * wy[b] * F.at(ix - 1 + a, iy - 1 + b);
  return acc;
}

// --- convexification weights ---------------------------------------------------

// phi0 for the quadratic class: -|z|^2/4, positive Laplacian = 1 exactly.
// For the linear class: radial solve of (positive Laplacian) phi0 = x^{2-delta}
// with x = (1+r^2)^{-1/2}; then r phi0'(r) = -(integral of s x^{2-delta} ds)
// which evaluates in closed form to (1 - (1+r^2)^{delta/2})/delta.
inline std::function<double(double)> phi0Radial(int j, double delta = 0.5) {
  if (j == 2) {
    return [](double r) { return -0.25 * r * r; };
  }
  if (j != 1) throw std::invalid_argument("phi0Radial: j must be 1 or 2");
  if (!(delta > 0 && delta < 1))
    throw std::invalid_argument("phi0Radial: delta must lie in (0,1)");
  // cumulative trapezoid of phi0'(r) = (1-(1+r^2)^{delta/2})/(delta r)
  auto dphi = [delta](double r) {
    if (r < 1e-8) return -0.5 * r;  // series limit
    return (1.0 - std::pow(1.0 + r * r, delta / 2)) / (delta * r);
  };
  const double rMax = 64.0, dr = 1e-3;
  auto table = std::make_shared<std::vector<double>>();
  table->reserve(static_cast<size_t>(rMax / dr) + 2);
  table->push_back(0.0);
  double prev = dphi(0.0);
  for (double r = dr; r <= rMax + 0.5 * dr; r += dr) {
    double cur = dphi(r);
    table->push_back(table->back() + 0.5 * (prev + cur) * dr);
    prev = cur;
  }
  return [table, dr, dphi](double r) {
    if (r <= 0) return 0.0;
    size_t i = static_cast<size_t>(r / dr);
    if (i + 1 >= table->size()) {
      // extend by one trapezoid step from the table end (rarely used)
      double rEnd = (table->size() - 1) * dr;
      return table->back() + dphi(rEnd) * (r - rEnd);
    }
    double t = r / dr - i;
    return (*table)[i] * (1 - t) + (*table)[i + 1] * t;
  };
}

inline Field phi0Field(Grid g, int j, double delta = 0.5) {
  auto f = phi0Radial(j, delta);
  return sample(g, [&](cplx z) { return cplx(f(std::abs(z)), 0.0); });
}

// phi_eps = phi - (h/eps) phi0
inline Field convexifiedWeight(const Field& phi, const Field& phi0, double h,
                               double eps) {
  if (!(eps > 0) || h < 0)
    throw std::invalid_argument("convexifiedWeight: need eps > 0, h >= 0");
  return phi - cplx(h / eps, 0.0) * phi0;
}

} // namespace cgs
