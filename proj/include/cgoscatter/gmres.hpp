#pragma once
// Plain GMRES (no restart) for complex linear maps given as callbacks.

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cgs {

using CVec = std::vector<std::complex<double>>;

struct GmresResult {
  CVec x;
  double relResidual = 0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {
inline std::complex<double> dotc(const CVec& a, const CVec& b) {
  std::complex<double> s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}
inline double nrm2(const CVec& a) { return std::sqrt(std::abs(dotc(a, a))); }
inline void axpy(std::complex<double> c, const CVec& x, CVec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}
} // namespace detail

inline GmresResult gmres(const std::function<CVec(const CVec&)>& apply,
                         const CVec& rhs, double tol = 1e-8, int maxIter = 120) {
  using detail::axpy;
  using detail::dotc;
  using detail::nrm2;
  const size_t n = rhs.size();
  double bnorm = nrm2(rhs);
  GmresResult res;
  res.x.assign(n, 0.0);
  if (bnorm == 0) { res.converged = true; return res; }

  std::vector<CVec> V;
  V.push_back(rhs);
  for (auto& c : V[0]) c /= bnorm;
  std::vector<std::vector<std::complex<double>>> H; // column j after rotations
  std::vector<std::complex<double>> cs, sn, g{bnorm};

  int k = 0; // accepted Krylov dimension
  for (int j = 0; j < maxIter; ++j) {
    CVec w = apply(V[j]);
    if (w.size() != n) throw std::invalid_argument("gmres: size mismatch");
    std::vector<std::complex<double>> h(j + 2);
    for (int i = 0; i <= j; ++i) { // modified Gram-Schmidt
      h[i] = dotc(V[i], w);
      axpy(-h[i], V[i], w);
    }
    double hnext = nrm2(w);
    h[j + 1] = hnext;
    // previously accumulated Givens rotations
    for (int i = 0; i < j; ++i) {
      auto t = std::conj(cs[i]) * h[i] + std::conj(sn[i]) * h[i + 1];
      h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
      h[i] = t;
    }
    // new rotation zeroing h[j+1]
    double denom = std::sqrt(std::norm(h[j]) + std::norm(h[j + 1]));
    if (denom == 0) { cs.push_back(1.0); sn.push_back(0.0); }
    else { cs.push_back(h[j] / denom); sn.push_back(h[j + 1] / denom); }
    h[j] = std::conj(cs[j]) * h[j] + std::conj(sn[j]) * h[j + 1];
    h[j + 1] = 0;
    g.push_back(-sn[j] * g[j]);
    g[j] = std::conj(cs[j]) * g[j];
    H.push_back(h);
    k = j + 1;

    double rel = std::abs(g[j + 1]) / bnorm;
    res.relResidual = rel;
    res.iterations = k;
    if (rel < tol) { res.converged = true; break; }
    if (hnext == 0) break; // exact breakdown: solution is in the current space
    for (auto& c : w) c /= hnext;
    V.push_back(std::move(w));
  }

  // back-substitute y from the triangularized H, x = V y
  std::vector<std::complex<double>> y(k);
  for (int i = k - 1; i >= 0; --i) {
    std::complex<double> s = g[i];
    for (int l = i + 1; l < k; ++l) s -= H[l][i] * y[l];
    y[i] = s / H[i][i];
  }
  for (int i = 0; i < k; ++i) axpy(y[i], V[i], res.x);
  return res;
}

} // namespace cgs
