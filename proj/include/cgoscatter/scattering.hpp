#pragma once
// Direct scattering at fixed positive energy on the plane: free resolvent,
// Lippmann-Schwinger solve, far-field mode matching, scattering matrix, the
// boundary pairing, and the scattering-difference identity.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fieldops.hpp"
#include "gmres.hpp"
#include "parallel.hpp"
#include "special.hpp"

namespace cgs {

// convolution with (i/4) H0^(1)(lambda r); (Delta_pos - lambda^2) out = f
inline Field freeResolventApply(const Field& f, double lambda) {
  if (lambda <= 0) throw std::invalid_argument("freeResolventApply: lambda > 0 required");
  return helmholtzOutgoing(f, lambda);
}

// sum of c[m+mMax] J_m(lambda r) e^{i m theta}
inline Field besselModeField(const Grid& g, double lambda, const std::vector<cplx>& c) {
  int mMax = (static_cast<int>(c.size()) - 1) / 2;
  return sample(g, [&](cplx z) {
    double r = std::abs(z), th = std::atan2(z.imag(), z.real());
    cplx s = 0;
    for (int m = -mMax; m <= mMax; ++m) {
      cplx cm = c[m + mMax];
      if (cm == cplx(0)) continue;
      s += cm * besselJ(m, lambda * r) * std::exp(cplx(0, m * th));
    }
    return s;
  });
}

// per-mode Hankel coefficients fitted on circles r in [Rm, Rm + band];
// fPlus/fMinus are coefficients of r^{-1/2} e^{+-i lambda r} e^{i m theta}
struct FarFieldDecomposition {
  double lambda = 1, matchRadius = 12;
  int mMax = 8;
  std::vector<cplx> alpha, beta, fPlus, fMinus; // index m + mMax
  double fitResidual = 0;

  cplx alphaAt(int m) const { return alpha[m + mMax]; }
  cplx betaAt(int m) const { return beta[m + mMax]; }
  cplx fPlusAt(int m) const { return fPlus[m + mMax]; }
  cplx fMinusAt(int m) const { return fMinus[m + mMax]; }
};

inline FarFieldDecomposition decomposeFarField(const Field& u, double lambda,
                                               int mMax, double matchRadius,
                                               double band = 1.0, int nRadii = 9,
                                               int nTheta = 256) {
  if (nTheta < 4 * mMax + 8) nTheta = 4 * mMax + 8;
  FarFieldDecomposition D;
  D.lambda = lambda;
  D.matchRadius = matchRadius;
  D.mMax = mMax;
  int M = 2 * mMax + 1;
  D.alpha.assign(M, 0);
  D.beta.assign(M, 0);
  D.fPlus.assign(M, 0);
  D.fMinus.assign(M, 0);

  // angular Fourier coefficients per radius
  Eigen::MatrixXcd um(nRadii, M);
  std::vector<double> radii(nRadii);
  for (int k = 0; k < nRadii; ++k) {
    double r = matchRadius + band * k / (nRadii - 1);
    radii[k] = r;
    std::vector<cplx> ring(nTheta);
    for (int l = 0; l < nTheta; ++l) {
      double th = 2 * M_PI * l / nTheta;
      ring[l] = interpolate(u, r * cplx(std::cos(th), std::sin(th)));
    }
    for (int m = -mMax; m <= mMax; ++m) {
      cplx s = 0;
      for (int l = 0; l < nTheta; ++l)
        s += ring[l] * std::exp(cplx(0, -m * 2 * M_PI * l / nTheta));
      um(k, m + mMax) = s / double(nTheta);
    }
  }

  double uScale = 0;
  for (int k = 0; k < nRadii; ++k) uScale = std::max(uScale, um.row(k).norm());
  for (int m = -mMax; m <= mMax; ++m) {
    Eigen::MatrixXcd A(nRadii, 2);
    Eigen::VectorXcd b(nRadii);
    for (int k = 0; k < nRadii; ++k) {
      A(k, 0) = hankel1(m, lambda * radii[k]);
      A(k, 1) = hankel2(m, lambda * radii[k]);
      b(k) = um(k, m + mMax);
    }
    Eigen::Vector2cd ab = A.colPivHouseholderQr().solve(b);
    D.alpha[m + mMax] = ab(0);
    D.beta[m + mMax] = ab(1);
    if (uScale > 0)
      D.fitResidual = std::max(D.fitResidual, (A * ab - b).norm() / uScale);
    // large-argument Hankel phase e^{+-i(rho - m pi/2 - pi/4)} sqrt(2/(pi rho))
    double c = std::sqrt(2.0 / (M_PI * lambda));
    D.fPlus[m + mMax] = ab(0) * c * std::exp(cplx(0, -(m * M_PI / 2 + M_PI / 4)));
    D.fMinus[m + mMax] = ab(1) * c * std::exp(cplx(0, +(m * M_PI / 2 + M_PI / 4)));
  }
  return D;
}

struct PoissonSolution {
  Field u;
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};

// Lippmann-Schwinger: (I + R0(lambda) V) u = u0 with u0 the incident J-mode sum
inline PoissonSolution poissonOperator(const Field& V, double lambda,
                                       const std::vector<cplx>& incidentModes,
                                       double tol = 1e-8, int maxIter = 120) {
  const Grid& g = V.g;
  Field u0 = besselModeField(g, lambda, incidentModes);
  auto apply = [&](const CVec& w) {
    Field W{g, w};
    Field Rw = freeResolventApply(V * W, lambda);
    return (W + Rw).v;
  };
  GmresResult r = gmres(apply, u0.v, tol, maxIter);
  if (!r.converged)
    throw std::runtime_error("poissonOperator: solver stalled at residual " +
                             std::to_string(r.relResidual) +
                             " (possible near-resonance)");
  return {Field{g, std::move(r.x)}, r.relResidual, r.iterations, r.converged};
}

struct ScatteringMatrix {
  double lambda = 1;
  int mMax = 8;
  double matchRadius = 12;
  Eigen::MatrixXcd S;
  double fitResidual = 0;

  cplx at(int m, int mp) const { return S(m + mMax, mp + mMax); }
  double unitarityDefect() const {
    Eigen::MatrixXcd D = S.adjoint() * S - Eigen::MatrixXcd::Identity(S.rows(), S.cols());
    return D.jacobiSvd().singularValues()(0);
  }
};

inline ScatteringMatrix extractSMatrix(const Field& V, double lambda, int mMax,
                                       double matchRadius) {
  int M = 2 * mMax + 1;
  Eigen::MatrixXcd Fp(M, M), Fm(M, M);
  std::vector<double> resid(M, 0.0);
  parallelFor(M, [&](size_t col) {
    std::vector<cplx> e(M, 0.0);
    e[col] = 1.0;
    PoissonSolution sol = poissonOperator(V, lambda, e);
    FarFieldDecomposition D = decomposeFarField(sol.u, lambda, mMax, matchRadius);
    for (int i = 0; i < M; ++i) {
      Fp(i, col) = D.fPlus[i];
      Fm(i, col) = D.fMinus[i];
    }
    resid[col] = D.fitResidual;
  });
  ScatteringMatrix S;
  S.lambda = lambda;
  S.mMax = mMax;
  S.matchRadius = matchRadius;
  S.S = Fm * Fp.inverse();
  for (double r : resid) S.fitResidual = std::max(S.fitResidual, r);
  return S;
}

// Green's identity check: volume form <u+, P u-> - <P u+, u-> over the disk
// of radius R against the circle expression from the far-field data
struct BoundaryPairing {
  cplx volume;
  cplx circle;
};

inline BoundaryPairing boundaryPairing(const Field& uPlus, const Field& uMinus,
                                       const Field& V, double lambda, double R,
                                       int mMax = 8) {
  const Grid& g = uPlus.g;
  double frac = std::min(0.85, (R + 1.0) / g.R);
  auto Pu = [&](const Field& u) {
    Field tu = taper(u, frac, 0.98);
    return laplacianPos(tu) + (V - sample(g, [&](cplx) { return cplx(lambda * lambda, 0); })) * u;
  };
  Field Pp = Pu(uPlus), Pm = Pu(uMinus);
  cplx vol = 0;
  double w = g.dx() * g.dx();
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy) {
      if (std::abs(g.z(ix, iy)) > R) continue;
      vol += (uPlus.at(ix, iy) * std::conj(Pm.at(ix, iy)) -
              Pp.at(ix, iy) * std::conj(uMinus.at(ix, iy))) * w;
    }

  FarFieldDecomposition Dp = decomposeFarField(uPlus, lambda, mMax, R);
  FarFieldDecomposition Dm = decomposeFarField(uMinus, lambda, mMax, R);
  cplx s = 0;
  for (int i = 0; i < 2 * mMax + 1; ++i)
    s += Dp.fPlus[i] * std::conj(Dm.fPlus[i]) - Dp.fMinus[i] * std::conj(Dm.fMinus[i]);
  return {vol, cplx(0, 2 * lambda) * 2.0 * M_PI * s};
}

// volume-vs-scattering-data identity for a pair of potentials: the volume
// integral int (V1 - V2) u1 conj(u2) equals -2 i lambda <(S1 - S2~) f1, f2>
// on the circle (2 pi from the angular measure), where u2 is the conjugated
// solution at -lambda and S2~ is S2 with both mode indices negated
struct DifferencePairing {
  cplx lhs, rhs;
  // scale guards pairings where both sides legitimately vanish
  double relErr(double scale = 0) const {
    double s = std::abs(lhs) + std::abs(rhs) + scale;
    return s == 0 ? 0.0 : std::abs(lhs - rhs) / s;
  }
};

inline DifferencePairing scatteringDifferenceIdentity(
    const Field& V1, const Field& V2, double lambda,
    const std::vector<cplx>& incident1, const std::vector<cplx>& incident2,
    int mMax, double matchRadius, const ScatteringMatrix* S1pre = nullptr,
    const ScatteringMatrix* S2pre = nullptr) {
  const Grid& g = V1.g;
  int M = 2 * mMax + 1;

  PoissonSolution s1 = poissonOperator(V1, lambda, incident1);
  PoissonSolution s2 = poissonOperator(V2, lambda, incident2);
  FarFieldDecomposition D1 = decomposeFarField(s1.u, lambda, mMax, matchRadius);
  FarFieldDecomposition D2 = decomposeFarField(s2.u, lambda, mMax, matchRadius);
  Field u2 = conjField(s2.u); // solution of the same equation at -lambda

  cplx lhs = 0;
  double w = g.dx() * g.dx();
  Field W = V1 - V2;
  for (size_t i = 0; i < W.v.size(); ++i)
    lhs += W.v[i] * s1.u.v[i] * std::conj(u2.v[i]) * w;

  ScatteringMatrix S1 = S1pre ? *S1pre : extractSMatrix(V1, lambda, mMax, matchRadius);
  ScatteringMatrix S2 = S2pre ? *S2pre : extractSMatrix(V2, lambda, mMax, matchRadius);

  // actual far-field data: f1 = outgoing data of u1; f2 from the conjugated
  // field, f2_m = conj(g+_{-m}) with g+ the outgoing data of s2.u
  Eigen::VectorXcd f1(M), f2(M);
  for (int m = -mMax; m <= mMax; ++m) {
    f1(m + mMax) = D1.fPlusAt(m);
    f2(m + mMax) = std::conj(D2.fPlusAt(-m));
  }
  Eigen::MatrixXcd S2p(M, M); // parity transpose: S2~(k, m) = S2(-m, -k)
  for (int k = -mMax; k <= mMax; ++k)
    for (int m = -mMax; m <= mMax; ++m)
      S2p(k + mMax, m + mMax) = S2.at(-m, -k);

  Eigen::VectorXcd diff = (S1.S - S2p) * f1;
  cplx inner = 0;
  for (int i = 0; i < M; ++i) inner += diff(i) * std::conj(f2(i));
  cplx rhs = cplx(0, -2 * lambda) * 2.0 * M_PI * inner;
  return {lhs, rhs};
}

// least-squares fit of a window-interior target by the span of Poisson
// solutions over modes |m| <= mMax; returns the relative fit residual
inline double densityProxyFit(const Field& uTarget, const Field& V, double lambda,
                              int mMax, double subRadius, int stride = 4) {
  const Grid& g = uTarget.g;
  int M = 2 * mMax + 1;
  std::vector<Field> basis;
  basis.reserve(M);
  std::vector<Field> tmp(M, Field{Grid{16, 1.0}});
  parallelFor(M, [&](size_t col) {
    std::vector<cplx> e(M, 0.0);
    e[col] = 1.0;
    tmp[col] = poissonOperator(V, lambda, e).u;
  });
  for (auto& f : tmp) basis.push_back(std::move(f));

  std::vector<size_t> idx;
  for (int ix = 0; ix < g.n; ix += stride)
    for (int iy = 0; iy < g.n; iy += stride)
      if (std::abs(g.z(ix, iy)) <= subRadius) idx.push_back(size_t(ix) * g.n + iy);
  Eigen::MatrixXcd A(idx.size(), M);
  Eigen::VectorXcd b(idx.size());
  for (size_t r = 0; r < idx.size(); ++r) {
    for (int c = 0; c < M; ++c) A(r, c) = basis[c].v[idx[r]];
    b(r) = uTarget.v[idx[r]];
  }
  Eigen::VectorXcd coef = A.colPivHouseholderQr().solve(b);
  double bn = b.norm();
  return bn == 0 ? 0.0 : (A * coef - b).norm() / bn;
}

} // namespace cgs
