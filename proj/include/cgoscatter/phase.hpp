#pragma once
// Holomorphic phases with prescribed nondegenerate critical points, amplitudes
// vanishing at the other critical points, and jet-matching correctors.

#include <random>

#include "geometry.hpp"

namespace cgs {

// all critical points of a rational function, with multiplicity; roots of the
// cleared-denominator numerator of the derivative, poles excluded
inline std::vector<std::pair<cplx, int>> criticalPoints(const RationalFunction& f,
                                                        double tol = 1e-7) {
  Poly n = polyAdd(polyMul(polyDeriv(f.num), f.den),
                   polyScale(polyMul(f.num, polyDeriv(f.den)), cplx(-1)));
  n = polyTrim(n, 1e-13);
  if (polyDegree(n) < 0)
    throw std::invalid_argument("criticalPoints: constant function");
  auto poles = polyRoots(f.den);
  std::vector<std::pair<cplx, int>> out;
  for (auto [r, m] : clusterRoots(polyRoots(n), tol)) {
    bool isPole = false;
    for (auto q : poles)
      if (std::abs(r - q) < tol * std::max(1.0, std::abs(q))) isPole = true;
    if (!isPole) out.push_back({r, m});
  }
  return out;
}

struct MorsePhase {
  RationalFunction Phi;
  cplx base;                       // the prescribed critical point p
  std::vector<cplx> criticalPts;   // all of them, base first
  std::vector<cplx> hessians;      // Phi'' at each
  int growthClass = 2;

  std::vector<cplx> otherCriticalPts() const {
    return {criticalPts.begin() + 1, criticalPts.end()};
  }
  Field phiField(const Grid& g) const {
    return sample(g, [&](cplx z) { return cplx(Phi.eval(z).real(), 0); });
  }
  Field psiField(const Grid& g) const {
    return sample(g, [&](cplx z) { return cplx(Phi.eval(z).imag(), 0); });
  }
};

namespace detail {

inline bool morseCheck(const RationalFunction& Phi, cplx p,
                       const std::vector<ExtPoint>& punctures, MorsePhase& out,
                       int j) {
  auto cps = criticalPoints(Phi);
  auto d2 = Phi.derivative().derivative();
  double scale = 0;
  for (auto c : Phi.num) scale = std::max(scale, std::abs(c));
  int baseIdx = -1;
  for (size_t i = 0; i < cps.size(); ++i) {
    if (cps[i].second != 1) return false;
    for (const auto& e : punctures)
      if (!e.inf && std::abs(cps[i].first - e.z) < 1e-6) return false;
    if (std::abs(d2.eval(cps[i].first)) < 1e-6 * scale) return false;
    if (std::abs(cps[i].first - p) < 1e-7 * std::max(1.0, std::abs(p))) baseIdx = int(i);
  }
  if (baseIdx < 0) return false;
  std::swap(cps[0], cps[baseIdx]);
  out.Phi = Phi;
  out.base = cps[0].first;
  out.criticalPts.clear();
  out.hessians.clear();
  for (auto [z, m] : cps) {
    out.criticalPts.push_back(z);
    out.hessians.push_back(d2.eval(z));
  }
  out.growthClass = j;
  return true;
}

} // namespace detail

// Morse-or-retry driver: accept the candidate if it already has a simple
// critical point at p, otherwise perturb it inside the pole-bounded space by
// seeded random amounts that keep Phi'(p) = 0
inline MorsePhase constructPhaseFrom(RationalFunction cand, cplx p,
                                     const SurfaceModel& model, int j,
                                     uint64_t seed = 1) {
  MorsePhase out;
  if (detail::morseCheck(cand, p, model.punctures, out, j)) return out;

  auto basis = basisOfSpace(model.punctures, j);
  // direction with derivative 1 at p, used to cancel g'(p)
  RationalFunction ell;
  {
    double best = 0;
    for (const auto& f : basis) {
      cplx d = f.derivative().eval(p);
      if (std::abs(d) > best) { best = std::abs(d); ell = f.scaled(cplx(1) / d); }
    }
    if (best == 0) throw std::runtime_error("constructPhase: degenerate basis at p");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  double eps = 0.1;
  for (int retry = 0; retry < 10; ++retry, eps *= 0.5) {
    RationalFunction g = RationalFunction::polynomial({0.0});
    for (const auto& f : basis) g = g + f.scaled(eps * cplx(u(rng), u(rng)));
    g = g + ell.scaled(-g.derivative().eval(p)); // keep the critical point at p
    RationalFunction trial = cand + g;
    if (detail::morseCheck(trial, p, model.punctures, out, j)) return out;
  }
  throw std::runtime_error("constructPhase: no Morse phase after retries");
}

// phase with a nondegenerate critical point at p: closed-form candidate
// (z-p)^2 for quadratic growth, (z-p)^2/(z-e1) for linear growth
inline MorsePhase constructPhase(cplx p, const SurfaceModel& model, int j,
                                 uint64_t seed = 1) {
  for (const auto& e : model.punctures)
    if (!e.inf && std::abs(p - e.z) < 1e-9)
      throw std::invalid_argument("constructPhase: p coincides with a puncture");
  if (j != 1 && j != 2) throw std::invalid_argument("constructPhase: j must be 1 or 2");
  if (j == 1 && model.endCount() < 2)
    throw std::invalid_argument("constructPhase: linear growth needs two ends");

  RationalFunction cand;
  if (j == 2) {
    cand = RationalFunction::polynomial(polyMul({-p, 1.0}, {-p, 1.0}));
  } else {
    cplx e1(0);
    bool found = false;
    for (const auto& e : model.punctures)
      if (!e.inf) { e1 = e.z; found = true; break; }
    if (!found) throw std::invalid_argument("constructPhase: j=1 needs a finite puncture");
    cand = RationalFunction::make(polyMul({-p, 1.0}, {-p, 1.0}), {-e1, 1.0});
  }
  return constructPhaseFrom(std::move(cand), p, model, j, seed);
}

// polynomial vanishing to order L at each given point, nonzero at p
inline RationalFunction constructAmplitude(cplx p, const std::vector<cplx>& others,
                                           int L) {
  Poly a{cplx(1)};
  for (cplx q : others) {
    if (std::abs(q - p) < 1e-12)
      throw std::invalid_argument("constructAmplitude: p among zero points");
    for (int k = 0; k < L; ++k) a = polyMul(a, {-q, 1.0});
  }
  return RationalFunction::polynomial(a);
}

// polynomial f with prescribed Taylor jet c0..cK at p0 and zeros of order >= L
// at each zeroPoint: f = P(z) * prod (z - q)^L with P solved triangularly
inline RationalFunction taylorMatch(const std::vector<cplx>& jet, cplx p0,
                                    const std::vector<cplx>& zeroPoints, int L) {
  int K = static_cast<int>(jet.size()) - 1;
  if (K < 0) throw std::invalid_argument("taylorMatch: empty jet");
  Poly Q{cplx(1)};
  for (cplx q : zeroPoints) {
    if (std::abs(q - p0) < 1e-12)
      throw std::invalid_argument("taylorMatch: p0 among zero points");
    for (int k = 0; k < L; ++k) Q = polyMul(Q, {-q, 1.0});
  }
  // Taylor coefficients of Q at p0
  std::vector<cplx> qc(K + 1, cplx(0));
  {
    Poly d = Q;
    double fact = 1;
    for (int k = 0; k <= K; ++k) {
      qc[k] = polyEval(d, p0) / fact;
      d = polyDeriv(d);
      fact *= (k + 1);
    }
  }
  std::vector<cplx> pc(K + 1);
  for (int k = 0; k <= K; ++k) {
    cplx s = jet[k];
    for (int i = 0; i < k; ++i) s -= pc[i] * qc[k - i];
    pc[k] = s / qc[0];
  }
  // P(z) = sum pc[k] (z - p0)^k, expanded
  Poly P{cplx(0)}, pw{cplx(1)};
  for (int k = 0; k <= K; ++k) {
    P = polyAdd(P, polyScale(pw, pc[k]));
    pw = polyMul(pw, {-p0, 1.0});
  }
  return RationalFunction::polynomial(polyMul(P, Q));
}

// local 2-jet (and higher) of a grid field at a point: least-squares fit of
// sum c_{lm} (z-p)^l (conj(z-p))^m over a small stencil; c_{lm} estimates
// d_z^l d_zbar^m f / (l! m!)
struct FieldJet {
  int K = 2;
  std::vector<cplx> c; // c[idx(l,m)] for l+m <= K
  int idx(int l, int m) const {
    int base = 0;
    for (int t = 0; t < l + m; ++t) base += t + 1;
    return base + m;
  }
  cplx coeff(int l, int m) const { return c[idx(l, m)]; }
};

inline FieldJet fieldJet(const Field& F, cplx p, int K = 2, int halfWidth = 8) {
  const Grid& g = F.g;
  int ix0 = static_cast<int>(std::lround((p.real() + g.R) / g.dx()));
  int iy0 = static_cast<int>(std::lround((p.imag() + g.R) / g.dx()));
  int hw = halfWidth;
  if (ix0 - hw < 0 || ix0 + hw >= g.n || iy0 - hw < 0 || iy0 + hw >= g.n)
    throw std::invalid_argument("fieldJet: stencil leaves the window");
  // fit a few orders past K so the truncation error lands in discarded terms
  int Kf = K + 6;
  int terms = (Kf + 1) * (Kf + 2) / 2;
  int rows = (2 * hw + 1) * (2 * hw + 1);
  double sc = hw * g.dx(); // coordinate scale for conditioning
  Eigen::MatrixXcd A(rows, terms);
  Eigen::VectorXcd rhs(rows);
  int r = 0;
  for (int ix = ix0 - hw; ix <= ix0 + hw; ++ix) {
    for (int iy = iy0 - hw; iy <= iy0 + hw; ++iy, ++r) {
      cplx w = (g.z(ix, iy) - p) / sc;
      int col = 0;
      for (int tot = 0; tot <= Kf; ++tot)
        for (int m = 0; m <= tot; ++m, ++col)
          A(r, col) = std::pow(w, tot - m) * std::pow(std::conj(w), m);
      rhs(r) = F.at(ix, iy);
    }
  }
  Eigen::VectorXcd sol = A.colPivHouseholderQr().solve(rhs);
  FieldJet J;
  J.K = K;
  J.c.resize((K + 1) * (K + 2) / 2);
  int col = 0;
  for (int tot = 0; tot <= Kf; ++tot)
    for (int m = 0; m <= tot; ++m, ++col)
      if (tot <= K) J.c[J.idx(tot - m, m)] = sol(col) / std::pow(sc, tot);
  return J;
}

} // namespace cgs
