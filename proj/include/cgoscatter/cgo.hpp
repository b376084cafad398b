#pragma once
// Complex-geometric-optics solutions u = e^{Phi/h}(a + r1 + r2).
//
// With Delta = -4 d/dz d/dzbar and Phi holomorphic, the conjugated operator
// factorizes as
//   e^{-Phi/h}(Delta + V - lambda^2)e^{Phi/h} f
//     = -4 dzbar( e^{-2i psi/h} dz( e^{2i psi/h} f ) ) + (V - lambda^2) f,
// psi = Im Phi, since 2i dz(psi) = Phi'. The pieces below kill the O(1) term
// (V - lambda^2) a order by order:
//   b  with dzbar(b) = a (V - lambda^2)/4, 2-jet vanishing at the other
//      critical points of Phi and b(p) = 0 (a holomorphic corrector omega
//      absorbs the jets);
//   r11 = chi e^{-2i psi/h} R(e^{2i psi/h} chi1 b), R the inverse of d/dz;
//   r12 from the transport quotient 2i r12 dz(psi) = (1 - chi1) b;
//   r2  from a linear solve against the conjugated operator, preconditioned
//      by the factorized inverse built from the two Cauchy transforms.
// All residuals are evaluated through exact algebraic identities so that no
// spectral derivative ever falls on an unresolved oscillation.

#include <map>
#include <string>

#include "fieldops.hpp"
#include "gmres.hpp"
#include "phase.hpp"

namespace cgs {

// polynomial taking prescribed Taylor jets at several points: coefficients of
// (z - pt)^k for k = 0..K_i at each point; confluent Vandermonde solve, degree
// = total condition count - 1
inline RationalFunction hermiteFit(
    const std::vector<std::pair<cplx, std::vector<cplx>>>& conditions) {
  int total = 0;
  for (const auto& [pt, jet] : conditions) total += static_cast<int>(jet.size());
  if (total == 0) return RationalFunction::polynomial({cplx(0)});
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(total, total);
  Eigen::VectorXcd rhs(total);
  int r = 0;
  for (const auto& [pt, jet] : conditions) {
    for (int k = 0; k < static_cast<int>(jet.size()); ++k, ++r) {
      double kfact = 1;
      for (int t = 2; t <= k; ++t) kfact *= t;
      for (int j = k; j < total; ++j) {
        double fall = 1; // j! / (j-k)!
        for (int t = j - k + 1; t <= j; ++t) fall *= t;
        A(r, j) = fall * std::pow(pt, j - k);
      }
      rhs(r) = kfact * jet[k];
    }
  }
  Eigen::VectorXcd sol = A.colPivHouseholderQr().solve(rhs);
  Poly p(total);
  for (int j = 0; j < total; ++j) p[j] = sol(j);
  return RationalFunction::polynomial(polyTrim(p, 1e-13));
}

struct TransportData {
  Field b;                 // dzbar(b) = a (V - lambda^2)/4 with matched jets
  RationalFunction omega;  // the holomorphic corrector
};

// b = -dz G(a(V - lambda^2)) + omega. The decaying product a V goes through
// the Cauchy-type convolution (1/4) * inverse of dzbar; the non-decaying
// -lambda^2 a part has the exact antiderivative -lambda^2 conj(z) a(z)/4.
// omega matches minus the 2-jet of the raw field at every other critical
// point and minus its value at p, so b has vanishing 2-jets there and
// b(p) = 0. The product a V is windowed at the frame edge; V must decay
// well inside the window.
inline TransportData buildB(const RationalFunction& a, const Field& V,
                            double lambda, const MorsePhase& phase) {
  const Grid& g = V.g;
  Field aV(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      aV.at(ix, iy) = a.eval(g.z(ix, iy)) * V.at(ix, iy);
  Field c = cplx(0.25, 0.0) * cauchybarTransform(taper(aV, 0.9, 0.98));
  if (lambda != 0) {
    for (int ix = 0; ix < g.n; ++ix)
      for (int iy = 0; iy < g.n; ++iy) {
        cplx z = g.z(ix, iy);
        c.at(ix, iy) += -lambda * lambda * std::conj(z) * a.eval(z) * 0.25;
      }
  }
  std::vector<std::pair<cplx, std::vector<cplx>>> cond;
  for (cplx q : phase.otherCriticalPts()) {
    FieldJet J = fieldJet(c, q, 2);
    cond.push_back({q, {-J.coeff(0, 0), -J.coeff(1, 0), -J.coeff(2, 0)}});
  }
  {
    FieldJet J = fieldJet(c, phase.base, 2);
    cond.push_back({phase.base, {-J.coeff(0, 0)}});
  }
  TransportData out;
  out.omega = hermiteFit(cond);
  out.b = c;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      out.b.at(ix, iy) += out.omega.eval(g.z(ix, iy));
  return out;
}

// nested radial cutoffs around the base critical point; the reference radii
// 0.5 / 1 / 1.5 / 2 shrink by `scale` (resolution or critical-point spacing)
struct Cutoffs {
  Field chi, chi1, dchi;
  double scale = 1.0;
};

inline Cutoffs buildCutoffs(const Grid& g, cplx p, double scale = 1.0) {
  Cutoffs c;
  c.scale = scale;
  c.chi1 = radialCutoff(g, p, 0.5 * scale, 1.0 * scale);
  c.chi = radialCutoff(g, p, 1.5 * scale, 2.0 * scale);
  c.dchi = ddz(c.chi);
  return c;
}

struct R11Result {
  Field r11, eta;
};

// r11 = chi e^{-2i psi/h} R(e^{2i psi/h} chi1 b) and the commutator term
// eta = e^{-2i psi/h} R(e^{2i psi/h} chi1 b) dz(chi); the exact identity
// e^{-2i psi/h} dz(e^{2i psi/h} r11) = chi1 b + eta holds because R inverts dz
inline R11Result buildR11(const Field& b, const Field& psi, double h,
                          const Cutoffs& co) {
  const Grid& g = b.g;
  Field f(g);
  for (size_t i = 0; i < f.v.size(); ++i) {
    double ps = psi.v[i].real();
    f.v[i] = std::isfinite(ps)
                 ? std::exp(cplx(0, 2.0 * ps / h)) * co.chi1.v[i] * b.v[i]
                 : cplx(0);
  }
  Field w = cauchyTransform(f);
  R11Result out{Field(g), Field(g)};
  for (size_t i = 0; i < w.v.size(); ++i) {
    double ps = psi.v[i].real();
    if (!std::isfinite(ps)) continue;
    cplx em = std::exp(cplx(0, -2.0 * ps / h));
    out.r11.v[i] = co.chi.v[i] * em * w.v[i];
    out.eta.v[i] = em * w.v[i] * co.dchi.v[i];
  }
  return out;
}

// transport quotient r12 = mask * b / Phi'(z) (2i dz psi = Phi'); zeros of
// Phi' are removable where the mask or the matched jets of b vanish, filled
// by 0 as the jet ratio vanishes linearly there; poles of Phi give 0
inline Field transportQuotient(const Field& b, const MorsePhase& phase,
                               const Field* oneMinusMaskOf /*chi1 or null*/) {
  const Grid& g = b.g;
  RationalFunction dP = phase.Phi.derivative();
  Field out(g);
  double big = 0;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy) {
      cplx d = dP.eval(g.z(ix, iy));
      double mask = oneMinusMaskOf
                        ? 1.0 - oneMinusMaskOf->at(ix, iy).real()
                        : 1.0;
      if (!std::isfinite(std::abs(d)) || std::abs(d) < 1e-8) continue;
      out.at(ix, iy) = mask * b.at(ix, iy) / d;
      big = std::max(big, std::abs(out.at(ix, iy)));
    }
  double bScale = 0;
  for (auto c : b.v) bScale = std::max(bScale, std::abs(c));
  if (big > 1e8 * std::max(bScale, 1e-300))
    throw std::runtime_error(
        "transportQuotient: blow-up at a critical point (jet matching failed)");
  return out;
}

inline Field buildR12(const Field& b, const MorsePhase& phase, const Field& chi1) {
  return transportQuotient(b, phase, &chi1);
}

// global quotient solving 2i r12t dz psi = b, used by the o(h) comparison
inline Field buildR12Global(const Field& b, const MorsePhase& phase) {
  return transportQuotient(b, phase, nullptr);
}

// conjugated operator applied brute force to a window-tapered field:
//   Delta u - (4 Phi'/h) dzbar(u) + (V - lambda^2) u
inline Field cgoConjugatedApply(const Field& u, const Field& V, double lambda,
                                const Field& dphi, double h, double frac = 0.75,
                                double outer = 0.95) {
  Field ut = frac < 1.0 ? taper(u, frac, outer) : u;
  Field lap = laplacianPos(ut);
  Field uzb = ddzbar(ut);
  Field out(u.g);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = lap.v[i] - (4.0 / h) * dphi.v[i] * uzb.v[i] +
               (V.v[i] - lambda * lambda) * ut.v[i];
  return out;
}

// residual of a + r1 through the exact identities: the transport term cancels
// a(V - lambda^2) algebraically, leaving
//   h Delta(r12) - 4 dzbar(eta) + (V - lambda^2)(r11 + h r12),
// so the only spectral derivatives fall on the non-oscillatory r12 (passed in
// pre-differentiated) and on the mildly oscillatory compactly supported eta
inline Field conjugatedResidualField(const Field& V, double lambda,
                                     const Field& r11, const Field& r12,
                                     const Field& eta, double h,
                                     const Field& lapR12) {
  Field ez = ddzbar(eta);
  Field out(V.g);
  for (size_t i = 0; i < out.v.size(); ++i) {
    cplx r1 = r11.v[i] + h * r12.v[i];
    out.v[i] = h * lapR12.v[i] - 4.0 * ez.v[i] +
               (V.v[i] - lambda * lambda) * r1;
  }
  return out;
}

struct R2Result {
  Field r2;
  double relResidual = 0;
  int iterations = 0;
  bool converged = false;
};

// largest radius around `p` on which the oscillation e^{2i psi/h} is resolved:
// the local wavenumber 2|Phi'(z)|/h stays below nyqFrac of the grid Nyquist
inline double resolvableRadius(const Field& dphi, cplx p, double h,
                               double nyqFrac = 0.75) {
  const Grid& g = dphi.g;
  double kmax = nyqFrac * M_PI / g.dx();
  double r = 2.0 * g.R;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      if (2.0 * std::abs(dphi.at(ix, iy)) / h > kmax)
        r = std::min(r, std::abs(g.z(ix, iy) - p));
  return r;
}

// r2 solves (conjugated operator) r2 = forcing on the plateau of `mask`,
// GMRES with the factorized right preconditioner
//   M^{-1} g = e^{-2i psi/h} R( e^{2i psi/h} Rbar(-g/4) ),
// an exact inverse of the free conjugated operator up to the confining
// cutoffs. Everything is confined to the disk |z - p| <= rSolve where the
// oscillation is resolvable: outside it the exponential factors alias, and
// spectral derivatives would spread that junk back into the interior. The
// operator output is masked like the forcing so that the least-squares
// objective only sees the region where the equation is posed. The weighted
// norm bound on the result is checked downstream.
inline R2Result buildR2(const Field& forcing, const Field& mask, const Field& V,
                        double lambda, const Field& psi, const Field& dphi,
                        double h, cplx p, double rSolve, double tol = 1e-5,
                        int maxIter = 35) {
  const Grid& g = forcing.g;
  const size_t N = forcing.v.size();
  Field oscP(g), oscM(g);
  for (size_t i = 0; i < N; ++i) {
    double ps = psi.v[i].real();
    oscP.v[i] = std::isfinite(ps) ? std::exp(cplx(0, 2.0 * ps / h)) : cplx(0);
    oscM.v[i] = std::isfinite(ps) ? std::exp(cplx(0, -2.0 * ps / h)) : cplx(0);
  }
  Field conf = radialCutoff(g, p, 0.85 * rSolve, rSolve);
  auto minv = [&](const CVec& y) {
    Field t(g, y);
    for (size_t i = 0; i < N; ++i) t.v[i] *= -0.25 * conf.v[i];
    Field s = cauchybarTransform(t);
    for (size_t i = 0; i < N; ++i) s.v[i] *= oscP.v[i] * conf.v[i];
    s = cauchyTransform(s);
    for (size_t i = 0; i < N; ++i) s.v[i] *= oscM.v[i] * conf.v[i];
    return s;
  };
  auto apply = [&](const CVec& y) {
    Field x = minv(y);
    Field ax = cgoConjugatedApply(x, V, lambda, dphi, h, 1.0, 1.0);
    for (size_t i = 0; i < N; ++i) ax.v[i] *= mask.v[i];
    return std::move(ax.v);
  };
  GmresResult gr = gmres(apply, forcing.v, tol, maxIter);
  R2Result out;
  out.relResidual = gr.relResidual;
  out.iterations = gr.iterations;
  out.converged = gr.converged;
  // minv already confines its output, so this is the solution itself
  out.r2 = gr.x.empty() ? Field(g) : minv(gr.x);
  return out;
}

struct CgoSolution {
  double h = 0, lambda = 0, eps = 0.1, J = 2.5;
  RationalFunction a, omega;
  Field b, chi, chi1, r11, r12, eta, r2, residual;
  std::map<std::string, double> norms;
  bool r2Converged = false;
};

// per-grid data shared across the h-sweep (everything except r11, eta, r2 and
// the residual is h-independent)
struct CgoWorkspace {
  Grid g{2, 1.0};
  SurfaceModel model{{ExtPoint::infinity()}, 2};
  MorsePhase phase;
  RationalFunction a;
  Field V;
  double lambda = 0, eps = 0.1, J = 2.5, cutoffScale = 1.0;
  TransportData td;
  Cutoffs co;
  Field psi, dphi, r12, r12t, lapR12, aF;
  std::function<double(double)> phi0r;
};

inline CgoWorkspace cgoPrepare(const SurfaceModel& model, const Grid& g,
                               const MorsePhase& phase, const RationalFunction& a,
                               const Field& V, double lambda, double eps = 0.1,
                               double cutoffScale = 1.0) {
  CgoWorkspace ws;
  ws.g = g;
  ws.model = model;
  ws.phase = phase;
  ws.a = a;
  ws.V = V;
  ws.lambda = lambda;
  ws.eps = eps;
  ws.cutoffScale = cutoffScale;
  ws.J = std::max(0, polyDegree(a.num)) + 2.5; // x^J b integrable
  ws.td = buildB(a, V, lambda, phase);
  ws.co = buildCutoffs(g, phase.base, cutoffScale);
  ws.psi = phase.psiField(g);
  ws.dphi = Field(g);
  {
    RationalFunction dP = phase.Phi.derivative();
    for (int ix = 0; ix < g.n; ++ix)
      for (int iy = 0; iy < g.n; ++iy) {
        cplx d = dP.eval(g.z(ix, iy));
        ws.dphi.at(ix, iy) = std::isfinite(std::abs(d)) ? d : cplx(0);
      }
  }
  ws.r12 = buildR12(ws.td.b, phase, ws.co.chi1);
  ws.r12t = buildR12Global(ws.td.b, phase);
  ws.lapR12 = laplacianPos(taper(ws.r12, 0.75, 0.95));
  ws.aF = Field(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy) {
      cplx z = g.z(ix, iy);
      ws.aF.at(ix, iy) = a.eval(z) * (V.at(ix, iy) - lambda * lambda);
    }
  ws.phi0r = phi0Radial(phase.growthClass);
  return ws;
}

inline CgoSolution assembleCgo(const CgoWorkspace& ws, double h,
                               bool withR2 = true) {
  const Grid& g = ws.g;
  CgoSolution s;
  s.h = h;
  s.lambda = ws.lambda;
  s.eps = ws.eps;
  s.J = ws.J;
  s.a = ws.a;
  s.omega = ws.td.omega;
  s.b = ws.td.b;
  s.chi = ws.co.chi;
  s.chi1 = ws.co.chi1;
  s.r12 = ws.r12;

  R11Result r11 = buildR11(ws.td.b, ws.psi, h, ws.co);
  s.r11 = r11.r11;
  s.eta = r11.eta;
  s.residual = conjugatedResidualField(ws.V, ws.lambda, s.r11, s.r12, s.eta, h,
                                       ws.lapR12);

  const SurfaceModel model = ws.model;
  WeightSpec wx = WeightSpec::fromFunction(
      [model, J = ws.J](cplx z) { return std::pow(model.xWeight(z), J); });
  WeightSpec wp0 = WeightSpec::fromFunction(
      [f = ws.phi0r, eps = ws.eps](cplx z) { return std::exp(f(std::abs(z)) / eps); });

  Field r1(g), diff(g);
  for (size_t i = 0; i < r1.v.size(); ++i) {
    r1.v[i] = s.r11.v[i] + h * s.r12.v[i];
    diff.v[i] = r1.v[i] - h * ws.r12t.v[i];
  }
  s.norms["xJ_r1"] = weightedNorm(r1, wx, NormP::Two);
  s.norms["r1_minus_h_r12t_xJ"] = weightedNorm(diff, wx, NormP::Two);
  s.norms["residual_xJ"] = weightedNorm(s.residual, wx, NormP::Two, 0.7);
  {
    Field ez = ddz(s.eta), ezb = ddzbar(s.eta);
    double n0 = l2Norm(s.eta), n1 = l2Norm(ez), n2 = l2Norm(ezb);
    s.norms["eta_H1"] = std::sqrt(n0 * n0 + 2.0 * (n1 * n1 + n2 * n2));
  }

  if (withR2) {
    cplx p = ws.phase.base;
    double rSolve =
        std::min(0.9 * g.R, resolvableRadius(ws.dphi, p, h));
    Field mask = radialCutoff(g, p, 0.60 * rSolve, 0.72 * rSolve);
    Field forcing(g);
    for (size_t i = 0; i < forcing.v.size(); ++i)
      forcing.v[i] = -mask.v[i] * s.residual.v[i];
    R2Result r2 = buildR2(forcing, mask, ws.V, ws.lambda, ws.psi, ws.dphi, h,
                          p, rSolve);
    s.r2 = r2.r2;
    s.r2Converged = r2.converged;
    s.norms["r2_relResidual"] = r2.relResidual;
    s.norms["r2_solve_radius"] = rSolve;
    s.norms["r2_weighted"] = weightedNorm(s.r2, wp0, NormP::Two);
    // assembled conjugated residual over the disk where the equation was
    // posed, relative to the residual scale of the bare amplitude
    Field back = cgoConjugatedApply(s.r2, ws.V, ws.lambda, ws.dphi, h, 1.0, 1.0);
    double rMeas = 0.55 * rSolve, num = 0, den = 0;
    for (int ix = 0; ix < g.n; ++ix)
      for (int iy = 0; iy < g.n; ++iy) {
        if (std::abs(g.z(ix, iy) - p) > rMeas) continue;
        num += std::norm(s.residual.at(ix, iy) + back.at(ix, iy));
        den += std::norm(ws.aF.at(ix, iy));
      }
    s.norms["assembled_residual_rel"] = std::sqrt(num / std::max(den, 1e-300));
  }
  return s;
}

struct CgoSweepResult {
  std::vector<double> h;
  std::map<std::string, std::vector<double>> norms;
};

inline CgoSweepResult cgoSweep(const CgoWorkspace& ws,
                               const std::vector<double>& hList,
                               bool withR2 = true) {
  CgoSweepResult out;
  out.h = hList;
  for (double h : hList) {
    CgoSolution s = assembleCgo(ws, h, withR2);
    for (const auto& [k, v] : s.norms) out.norms[k].push_back(v);
  }
  return out;
}

} // namespace cgs
