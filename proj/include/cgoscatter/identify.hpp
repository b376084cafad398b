#pragma once
// Pointwise identification of potential differences at phase critical points.
// Pairing a solution oscillating with phase Phi against one with phase -Phi
// cancels the growing factors and leaves e^{2i psi/h}; stationary phase at
// the nondegenerate critical point p gives
//   I(h) = int e^{2i psi/h} |a|^2 W e^{2 sigma} dA = C h W(p) + o(h),
//   C = pi |a(p)|^2 e^{2 sigma(p)} / |Phi''(p)|,
// (Hess of 2 psi has signature 0 and determinant -4|Phi''|^2), so W(p) is
// read off by extrapolating I(h) / (C h) to h = 0.

#include "cgo.hpp"
#include "scattering.hpp"

namespace cgs {

// the partner solution oscillates with -Phi: same critical points, negated
// Hessians, same growth class
inline MorsePhase negatePhase(const MorsePhase& P) {
  MorsePhase out = P;
  out.Phi = P.Phi.scaled(cplx(-1));
  for (auto& hs : out.hessians) hs = -hs;
  return out;
}

// quadrature of int e^{2i psi/h} amp * W * e^{2 sigma} dA for a general
// amplitude factor field
inline cplx oscillatoryPairing(const Field& amp, const Field& W,
                               const MorsePhase& phase, double h,
                               const SurfaceModel& model) {
  const Grid& g = W.g;
  cplx acc = 0;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy) {
      cplx z = g.z(ix, iy);
      cplx ph = phase.Phi.eval(z);
      if (!std::isfinite(std::abs(ph))) continue;
      acc += std::exp(cplx(0, 2.0 * ph.imag() / h)) * amp.at(ix, iy) *
             W.at(ix, iy) * std::exp(2.0 * model.sigma(z));
    }
  return acc * g.dx() * g.dx();
}

inline cplx stationaryPhasePairing(const Field& W, const MorsePhase& phase,
                                   const RationalFunction& a, double h,
                                   const SurfaceModel& model) {
  const Grid& g = W.g;
  Field amp(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy) {
      cplx av = a.eval(g.z(ix, iy));
      amp.at(ix, iy) = std::isfinite(std::abs(av)) ? std::norm(av) : cplx(0);
    }
  return oscillatoryPairing(amp, W, phase, h, model);
}

// closed-form saddle constant C = pi |a(p)|^2 e^{2 sigma(p)} / |Phi''(p)|
inline double stationaryPhaseConstant(const MorsePhase& phase,
                                      const RationalFunction& a,
                                      const SurfaceModel& model) {
  cplx hess = phase.hessians.at(0);
  if (std::abs(hess) < 1e-12)
    throw std::runtime_error("stationaryPhaseConstant: degenerate critical point");
  return M_PI * std::norm(a.eval(phase.base)) *
         std::exp(2.0 * model.sigma(phase.base)) / std::abs(hess);
}

// Neville evaluation at h = 0 of the polynomial through (h_i, v_i)
inline cplx extrapolateToZero(std::vector<double> hs, std::vector<cplx> vals) {
  size_t n = vals.size();
  for (size_t k = 1; k < n; ++k)
    for (size_t i = 0; i + k < n; ++i)
      vals[i] = (hs[i + k] * vals[i] - hs[i] * vals[i + 1]) / (hs[i + k] - hs[i]);
  return vals.empty() ? cplx(0) : vals[0];
}

// brute-force determination of C against a reference Gaussian of known peak,
// cross-checked with the saddle formula
struct ConstantCheck {
  cplx oracle = 0;
  double formula = 0;
  double relErr = 0;
};

inline ConstantCheck stationaryPhaseConstantCheck(
    const Grid& g, const MorsePhase& phase, const RationalFunction& a,
    const SurfaceModel& model, double width = 0.3,
    const std::vector<double>& hs = {0.2, 0.1, 0.05, 0.025}) {
  cplx p = phase.base;
  Field G = sample(g, [=](cplx z) {
    return std::exp(-std::norm(z - p) / (width * width));
  });
  std::vector<cplx> vals;
  std::vector<double> hs2;
  for (double h : hs) {
    vals.push_back(stationaryPhasePairing(G, phase, a, h, model) / h);
    hs2.push_back(h * h);
  }
  ConstantCheck out;
  // against the centered Gaussian, I(h) = |h| F(h^2) with F smooth (the
  // pairing is even in h), so the extrapolation runs in h^2; G(p) = 1
  out.oracle = extrapolateToZero(hs2, vals);
  out.formula = stationaryPhaseConstant(phase, a, model);
  out.relErr = std::abs(out.oracle - out.formula) / out.formula;
  return out;
}

struct IdentificationReport {
  cplx p = 0;
  std::vector<double> h;
  std::vector<cplx> pairings; // I(h)
  double C = 0;
  cplx estimate = 0, truth = 0;
  double relErr = 0;
  // order-h cross terms h int e^{2i psi/h}(abar r12~(V1) + a conj(r12~(V2))) W
  std::vector<double> crossTerm;
  double mainSlope = 0, crossSlope = 0;
};

// Richardson-extrapolated estimate of (V1 - V2)(p) from the pairing sweep;
// with crossCheck the order-h middle terms of the full solution product are
// integrated as well so their faster decay can be asserted by the caller
inline IdentificationReport pointwiseDifference(
    const Field& V1, const Field& V2, cplx p, const SurfaceModel& model, int j,
    const std::vector<double>& hList, double lambda = 1.0, uint64_t seed = 1,
    bool crossCheck = false) {
  const Grid& g = V1.g;
  MorsePhase P = constructPhase(p, model, j, seed);
  RationalFunction a = constructAmplitude(p, P.otherCriticalPts(), 3);
  Field W = V1 - V2;

  IdentificationReport rep;
  rep.p = p;
  rep.h = hList;
  rep.C = stationaryPhaseConstant(P, a, model);
  double wImax = 0, wAmax = 0;
  for (auto c : W.v) {
    wImax = std::max(wImax, std::abs(c.imag()));
    wAmax = std::max(wAmax, std::abs(c));
  }
  // a real difference has a real limit: the finite-h imaginary part is pure
  // extrapolation residue, so drop it before the Richardson step
  bool realW = wImax <= 1e-12 * std::max(wAmax, 1e-300);
  std::vector<cplx> vals;
  for (double h : hList) {
    cplx I = stationaryPhasePairing(W, P, a, h, model);
    rep.pairings.push_back(I);
    cplx v = I / (rep.C * h);
    vals.push_back(realW ? cplx(v.real(), 0) : v);
  }
  rep.estimate = extrapolateToZero(hList, vals);
  rep.truth = interpolate(W, p);
  double wmax = 0;
  for (auto c : W.v) wmax = std::max(wmax, std::abs(c));
  rep.relErr = std::abs(rep.estimate - rep.truth) /
               std::max(std::abs(rep.truth), 0.05 * std::max(wmax, 1e-300));

  if (crossCheck) {
    MorsePhase Pm = negatePhase(P);
    Field r12a = buildR12Global(buildB(a, V1, lambda, P).b, P);
    Field r12b = buildR12Global(buildB(a, V2, lambda, Pm).b, Pm);
    Field amp(g);
    for (int ix = 0; ix < g.n; ++ix)
      for (int iy = 0; iy < g.n; ++iy) {
        cplx av = a.eval(g.z(ix, iy));
        if (!std::isfinite(std::abs(av))) continue;
        amp.at(ix, iy) = std::conj(av) * r12a.at(ix, iy) +
                         av * std::conj(r12b.at(ix, iy));
      }
    std::vector<double> absI;
    for (size_t i = 0; i < hList.size(); ++i) {
      double h = hList[i];
      rep.crossTerm.push_back(
          h * std::abs(oscillatoryPairing(amp, W, P, h, model)));
      absI.push_back(std::abs(rep.pairings[i]));
    }
    auto slope = [&](const std::vector<double>& y) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      size_t n = y.size();
      for (size_t i = 0; i < n; ++i) {
        double lx = std::log(hList[i]), ly = std::log(std::max(y[i], 1e-300));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
      }
      return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    rep.mainSlope = slope(absI);
    rep.crossSlope = slope(rep.crossTerm);
  }
  return rep;
}

struct UniquenessConfig {
  double lambda = 1.0;
  int mMax = 4;
  double matchRadius = 12.0;
  Grid scatterGrid{384, 16.0};
  Grid quadGrid{640, 3.0}; // probe-map pairing quadratures
  Grid cgoGrid{768, 2.5};  // assembled-solution pairings
  std::vector<double> hQuad{0.2, 0.1, 0.05, 0.025};
  std::vector<double> hCgo{0.1, 0.05, 0.025};
  int probeN = 5;
  double probeExtent = 0.8;
  bool withCgoPairing = true;
};

struct ProbeEstimate {
  cplx p = 0, estimate = 0, truth = 0;
  double relErr = 0;
};

struct UniquenessReport {
  double sDiffNorm = 0;
  std::vector<DifferencePairing> modePairings;
  std::vector<double> h; // assembled-pairing sweep
  std::vector<cplx> cgoPairings, predicted;
  std::vector<double> cgoRelErr;
  std::vector<ProbeEstimate> probes;
  double probeMaxRelErr = 0;
};

// end-to-end chain on the plane: scattering matrices, the difference identity
// over a mode family, assembled-solution pairings against the
// stationary-phase prediction, and the probe map of (V1 - V2) estimates
inline UniquenessReport uniquenessChain(const std::function<double(cplx)>& V1f,
                                        const std::function<double(cplx)>& V2f,
                                        const UniquenessConfig& cfg = {}) {
  UniquenessReport rep;
  SurfaceModel model({ExtPoint::infinity()}, 2);
  auto sampleV = [](const Grid& g, const std::function<double(cplx)>& f) {
    return sample(g, [&](cplx z) { return cplx(f(z), 0); });
  };

  // scattering matrices and the difference identity, incident mode 0 against
  // the full partner-mode family
  {
    Field V1 = sampleV(cfg.scatterGrid, V1f);
    Field V2 = sampleV(cfg.scatterGrid, V2f);
    ScatteringMatrix S1 =
        extractSMatrix(V1, cfg.lambda, cfg.mMax, cfg.matchRadius);
    ScatteringMatrix S2 =
        extractSMatrix(V2, cfg.lambda, cfg.mMax, cfg.matchRadius);
    rep.sDiffNorm = (S1.S - S2.S).norm();
    int M = 2 * cfg.mMax + 1;
    for (int m = -cfg.mMax; m <= cfg.mMax; ++m) {
      std::vector<cplx> e1(M, cplx(0)), e2(M, cplx(0));
      e1[cfg.mMax] = 1.0;
      e2[m + cfg.mMax] = 1.0;
      rep.modePairings.push_back(scatteringDifferenceIdentity(
          V1, V2, cfg.lambda, e1, e2, cfg.mMax, cfg.matchRadius, &S1, &S2));
    }
  }

  // assembled solutions u1 = e^{Phi/h}(a + r1 + r2), u2 with phase -Phi for
  // V2: the pairing integral against the prediction C h W(0)
  if (cfg.withCgoPairing) {
    const Grid& g = cfg.cgoGrid;
    Field V1 = sampleV(g, V1f), V2 = sampleV(g, V2f);
    MorsePhase P = constructPhase(cplx(0), model, 2);
    MorsePhase Pm = negatePhase(P);
    RationalFunction a = constructAmplitude(cplx(0), P.otherCriticalPts(), 3);
    CgoWorkspace w1 = cgoPrepare(model, g, P, a, V1, cfg.lambda, 0.1, 0.5);
    CgoWorkspace w2 = cgoPrepare(model, g, Pm, a, V2, cfg.lambda, 0.1, 0.5);
    double C = stationaryPhaseConstant(P, a, model);
    Field W = V1 - V2;
    cplx Wp = interpolate(W, cplx(0));
    double wmax = 0;
    for (auto c : W.v) wmax = std::max(wmax, std::abs(c));
    for (double h : cfg.hCgo) {
      CgoSolution s1 = assembleCgo(w1, h, true);
      CgoSolution s2 = assembleCgo(w2, h, true);
      Field amp(g);
      for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy) {
          cplx av = a.eval(g.z(ix, iy));
          if (!std::isfinite(std::abs(av))) continue;
          size_t i = size_t(ix) * g.n + iy;
          cplx f1 = av + s1.r11.v[i] + h * s1.r12.v[i] + s1.r2.v[i];
          cplx f2 = av + s2.r11.v[i] + h * s2.r12.v[i] + s2.r2.v[i];
          amp.at(ix, iy) = f1 * std::conj(f2);
        }
      cplx I = oscillatoryPairing(amp, W, P, h, model);
      cplx pred = C * h * Wp;
      rep.h.push_back(h);
      rep.cgoPairings.push_back(I);
      rep.predicted.push_back(pred);
      rep.cgoRelErr.push_back(std::abs(I - pred) /
                              std::max(std::abs(pred),
                                       C * h * 0.05 * std::max(wmax, 1e-300)));
    }
  }

  // probe map of pointwise estimates; probes snap to a constructible phase
  {
    const Grid& g = cfg.quadGrid;
    Field V1 = sampleV(g, V1f), V2 = sampleV(g, V2f);
    for (int ix = 0; ix < cfg.probeN; ++ix)
      for (int iy = 0; iy < cfg.probeN; ++iy) {
        double t = cfg.probeN > 1 ? 2.0 / (cfg.probeN - 1) : 0.0;
        cplx p = cfg.probeExtent * cplx(-1.0 + t * ix, -1.0 + t * iy);
        IdentificationReport r;
        for (int attempt = 0;; ++attempt) {
          try {
            r = pointwiseDifference(V1, V2, p, model, 2, cfg.hQuad, cfg.lambda,
                                    1 + attempt);
            break;
          } catch (const std::exception&) {
            if (attempt >= 4) throw;
            p += 0.01 * cplx(attempt + 1, 1 - attempt);
          }
        }
        rep.probes.push_back({p, r.estimate, r.truth, r.relErr});
        rep.probeMaxRelErr = std::max(rep.probeMaxRelErr, r.relErr);
      }
  }
  return rep;
}

} // namespace cgs
