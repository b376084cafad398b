#pragma once
// Complex-frequency Fourier bounds for Gaussian-decaying functions and the
// division by |xi|^2 - lambda^2 across its zero circle.
//
// fhat(xi + i eta) = int e^{-i xi . z} (e^{eta . z} f) dA, and writing
// e^{eta . z} f = e^{eta . z - gamma|z|^2} (e^{gamma|z|^2} f) gives
//   ||fhat(. + i eta)||_{L^2} <= 2 pi e^{|eta|^2 / 4 gamma} ||e^{gamma|z|^2} f||.
// The transforms are exact shifted DFTs: both the spatial and the dual grid
// are endpoint grids (coord = -R + i dx), the half-bin offsets absorbed into
// modulation phases, so forward then inverse is the identity to rounding.

#include "fieldops.hpp"

namespace cgs {

// dual endpoint grid: spacing dk = 2 pi / (n dx); an involution
inline Grid dualGrid(const Grid& g) {
  double dk = 2.0 * M_PI / (g.n * g.dx());
  return Grid{g.n, dk * (g.n - 1) / 2.0};
}

namespace detail {

// S(i) = sum_m e^{-i beta(i) alpha(m)} v_m per axis, where alpha runs over the
// endpoint grid A and beta over its dual B (A.dx * B.dx = 2 pi / n); the
// off-integer offsets of both grids become the pre/post modulation phases
inline void shiftedDft(std::vector<cplx>& v, const Grid& A, const Grid& B) {
  int n = A.n;
  cplx glob = std::exp(cplx(0, -A.R * B.R));
  std::vector<cplx> pre(n), post(n);
  for (int m = 0; m < n; ++m) pre[m] = std::exp(cplx(0, B.R * A.dx() * m));
  for (int i = 0; i < n; ++i)
    post[i] = glob * std::exp(cplx(0, A.R * B.dx() * i));
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) v[size_t(ix) * n + iy] *= pre[ix] * pre[iy];
  fft2(v, n, -1);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) v[size_t(ix) * n + iy] *= post[ix] * post[iy];
}

} // namespace detail

// fhat(xi) = int e^{-i xi . z} f dA on the dual grid
inline Field forwardFourier(const Field& f) {
  Grid gk = dualGrid(f.g);
  std::vector<cplx> v = f.v;
  detail::shiftedDft(v, f.g, gk);
  double s = f.g.dx() * f.g.dx();
  for (auto& c : v) c *= s;
  return Field(gk, std::move(v));
}

// f(z) = (2 pi)^{-2} int e^{+i xi . z} F dA(xi) back on the spatial grid;
// the sign flip is handled by conjugating around the forward path
inline Field inverseFourier(const Field& F) {
  Grid gs = dualGrid(F.g);
  std::vector<cplx> v = F.v;
  for (auto& c : v) c = std::conj(c);
  detail::shiftedDft(v, F.g, gs);
  double s = F.g.dx() * F.g.dx() / (4.0 * M_PI * M_PI);
  for (auto& c : v) c = std::conj(c) * s;
  return Field(gs, std::move(v));
}

struct ComplexFrequencySlice {
  Field values; // fhat(xi + i eta) on the dual grid
  std::array<double, 2> eta{0, 0};
  double gamma = 1;
  double l2 = 0, sup = 0;
  double bound = 0; // 2 pi e^{|eta|^2/4 gamma} ||e^{gamma|z|^2} f||
  double ratio = 0; // l2 / bound
};

inline ComplexFrequencySlice complexFourier(const Field& f,
                                            std::array<double, 2> eta,
                                            double gamma) {
  const Grid& g = f.g;
  Field m(g);
  double peak = 0, edge = 0;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy) {
      cplx z = g.z(ix, iy);
      m.at(ix, iy) = std::exp(eta[0] * z.real() + eta[1] * z.imag()) * f.at(ix, iy);
      double a = std::abs(m.at(ix, iy));
      peak = std::max(peak, a);
      if (ix == 0 || iy == 0 || ix == g.n - 1 || iy == g.n - 1)
        edge = std::max(edge, a);
    }
  if (peak > 0 && edge > 1e-8 * peak)
    throw std::runtime_error(
        "complexFourier: e^{eta.z} f does not decay inside the window");

  ComplexFrequencySlice out;
  out.values = forwardFourier(m);
  out.eta = eta;
  out.gamma = gamma;
  double dk = out.values.g.dx(), s2 = 0;
  for (auto c : out.values.v) {
    s2 += std::norm(c);
    out.sup = std::max(out.sup, std::abs(c));
  }
  out.l2 = std::sqrt(s2) * dk;
  double w2 = 0;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      w2 += std::norm(std::exp(gamma * std::norm(g.z(ix, iy))) * f.at(ix, iy));
  double eta2 = eta[0] * eta[0] + eta[1] * eta[1];
  out.bound = 2.0 * M_PI * std::exp(eta2 / (4.0 * gamma)) *
              std::sqrt(w2) * g.dx();
  out.ratio = out.bound > 0 ? out.l2 / out.bound : 0.0;
  return out;
}

// shifted-contour inverse at one point: e^{-eta.z} (2 pi)^{-2} sum e^{i xi.z}
inline cplx inverseAt(const ComplexFrequencySlice& slice, cplx z) {
  const Grid& gk = slice.values.g;
  cplx acc = 0;
  for (int ix = 0; ix < gk.n; ++ix)
    for (int iy = 0; iy < gk.n; ++iy) {
      cplx xi = gk.z(ix, iy);
      acc += std::exp(cplx(0, xi.real() * z.real() + xi.imag() * z.imag())) *
             slice.values.at(ix, iy);
    }
  acc *= gk.dx() * gk.dx() / (4.0 * M_PI * M_PI);
  return acc * std::exp(-(slice.eta[0] * z.real() + slice.eta[1] * z.imag()));
}

struct SphereDivisionResult {
  Field quotient; // G = F / (|xi|^2 - lambda^2) on the dual grid
  Field spatial;  // its inverse transform
  double sphereMax = 0; // relative size of F on the zero circle
};

// division with removable-singularity treatment: within rhoCells grid cells
// of the circle |xi| = lambda the quotient is replaced by the radial-slope
// value F_r(lambda u) / (r + lambda) from centered differencing across the
// circle; input must vanish on the circle
inline SphereDivisionResult sphereDivision(const ComplexFrequencySlice& F,
                                           double lambda, double rhoCells = 3.0,
                                           double tol = 1e-3) {
  const Field& Fv = F.values;
  const Grid& gk = Fv.g;
  double dk = gk.dx(), rho = rhoCells * dk;
  if (lambda <= rho || lambda >= 0.8 * gk.R)
    throw std::invalid_argument("sphereDivision: lambda outside the dual window");

  // off-grid values of F near the circle come from a 4x refined dual grid:
  // the spatial function decays to the window edge, so zero-padding it and
  // re-transforming is exact up to the tail, and cubic interpolation on the
  // fine grid is accurate enough for the quotient nodes
  Field fsp = inverseFourier(Fv);
  const Grid& gs = fsp.g;
  int nf = 4 * gs.n;
  Grid gfine{nf, gs.dx() * (nf - 1) / 2.0};
  Field fpad(gfine);
  int off = (nf - gs.n) / 2;
  for (int ix = 0; ix < gs.n; ++ix)
    for (int iy = 0; iy < gs.n; ++iy)
      fpad.at(ix + off, iy + off) = fsp.at(ix, iy);
  Field Ffine = forwardFourier(fpad);

  double fmax = 0;
  for (auto c : Fv.v) fmax = std::max(fmax, std::abs(c));
  SphereDivisionResult out;
  for (int k = 0; k < 128; ++k) {
    cplx xi = lambda * std::exp(cplx(0, 2.0 * M_PI * k / 128.0));
    out.sphereMax = std::max(out.sphereMax, std::abs(interpolate(Ffine, xi)));
  }
  out.sphereMax = fmax > 0 ? out.sphereMax / fmax : 0.0;
  if (out.sphereMax > tol)
    throw std::runtime_error(
        "sphereDivision: input does not vanish on the sphere |xi| = lambda");

  Field G(gk);
  for (int ix = 0; ix < gk.n; ++ix)
    for (int iy = 0; iy < gk.n; ++iy) {
      cplx xi = gk.z(ix, iy);
      double r = std::abs(xi);
      if (std::abs(r - lambda) >= rho) {
        G.at(ix, iy) = Fv.at(ix, iy) / (r * r - lambda * lambda);
      } else {
        // the quotient is analytic across the circle: interpolate it in the
        // radial variable from nodes bracketing the annulus, where the
        // direct division is stable
        cplx u = r > 1e-12 ? xi / r : cplx(1, 0);
        constexpr int nn = 8;
        double rs[nn];
        cplx qs[nn];
        for (int k = 0; k < nn / 2; ++k) {
          double d = rho + (nn / 2 - 1 - k) * dk;
          rs[k] = lambda - d;
          rs[nn - 1 - k] = lambda + d;
        }
        for (int k = 0; k < nn; ++k)
          qs[k] = interpolate(Ffine, rs[k] * u) /
                  (rs[k] * rs[k] - lambda * lambda);
        cplx acc = 0;
        for (int k = 0; k < nn; ++k) {
          cplx term = qs[k];
          for (int j = 0; j < nn; ++j)
            if (j != k) term *= (r - rs[j]) / (rs[k] - rs[j]);
          acc += term;
        }
        G.at(ix, iy) = acc;
      }
    }
  out.quotient = G;
  out.spatial = inverseFourier(G);
  return out;
}

// fitted d log(circle-average |F|) / d(r^2) over radii above the noise floor
inline double gaussianDecaySlope(const Field& F, double floorRel = 1e-8,
                                 double rMin = 0.0, double dr = 0.0) {
  const Grid& g = F.g;
  double fmax = 0;
  for (auto c : F.v) fmax = std::max(fmax, std::abs(c));
  if (rMin <= 0) rMin = 0.1 * g.R;
  if (dr <= 0) dr = 0.05 * g.R;
  std::vector<double> xs, ys;
  for (double r = rMin; r < 0.9 * g.R; r += dr) {
    double acc = 0;
    int nth = 64;
    for (int k = 0; k < nth; ++k)
      acc += std::abs(interpolate(F, r * std::exp(cplx(0, 2.0 * M_PI * k / nth))));
    acc /= nth;
    if (acc < floorRel * fmax) break;
    xs.push_back(r * r);
    ys.push_back(std::log(acc));
  }
  if (xs.size() < 3)
    throw std::runtime_error("gaussianDecaySlope: too few radii above floor");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t n = xs.size();
  for (size_t i = 0; i < n; ++i) {
    sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace cgs
