#pragma once
// Genus-zero surface model: punctured sphere, divisors, rational functions,
// dimension counts for spaces of functions with prescribed pole orders.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "fieldops.hpp"

namespace cgs {

// ---- polynomials, coefficient vectors c[0] + c[1] z + ... ----

using Poly = std::vector<cplx>;

inline Poly polyTrim(Poly p, double tol = 0.0) {
  double scale = 0;
  for (auto c : p) scale = std::max(scale, std::abs(c));
  double cut = tol * scale;
  while (p.size() > 1 && std::abs(p.back()) <= cut) p.pop_back();
  if (p.empty()) p.push_back(0.0);
  return p;
}

inline int polyDegree(const Poly& p) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
    if (p[i] != cplx(0)) return i;
  return -1; // zero polynomial
}

inline cplx polyEval(const Poly& p, cplx z) {
  cplx acc = 0;
  for (size_t i = p.size(); i-- > 0;) acc = acc * z + p[i];
  return acc;
}

inline Poly polyDeriv(const Poly& p) {
  if (p.size() <= 1) return {cplx(0)};
  Poly d(p.size() - 1);
  for (size_t i = 1; i < p.size(); ++i) d[i - 1] = double(i) * p[i];
  return d;
}

inline Poly polyMul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, cplx(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return polyTrim(r);
}

inline Poly polyAdd(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), cplx(0));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

inline Poly polyScale(const Poly& a, cplx s) {
  Poly r = a;
  for (auto& c : r) c *= s;
  return r;
}

// roots via companion matrix eigenvalues
inline std::vector<cplx> polyRoots(const Poly& pIn) {
  Poly p = polyTrim(pIn, 1e-14);
  int d = polyDegree(p);
  if (d <= 0) return {};
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) C(i, d - 1) = -p[i] / p[d];
  for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("polyRoots: eigen solver failed");
  std::vector<cplx> roots(d);
  for (int i = 0; i < d; ++i) roots[i] = es.eigenvalues()(i);
  return roots;
}

// cluster nearby roots into (root, multiplicity) pairs
inline std::vector<std::pair<cplx, int>> clusterRoots(std::vector<cplx> roots,
                                                      double tol = 1e-6) {
  double scale = 1.0;
  for (auto r : roots) scale = std::max(scale, std::abs(r));
  std::vector<std::pair<cplx, int>> out;
  std::vector<bool> used(roots.size(), false);
  for (size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    cplx sum = roots[i];
    int count = 1;
    used[i] = true;
    for (size_t j = i + 1; j < roots.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(roots[j] - sum / double(count)) < tol * scale) {
        sum += roots[j];
        ++count;
        used[j] = true;
      }
    }
    out.push_back({sum / double(count), count});
  }
  return out;
}

// ---- points on the extended plane ----

struct ExtPoint {
  cplx z{0};
  bool inf = false;
  static ExtPoint infinity() { return {cplx(0), true}; }
  static ExtPoint at(cplx z) { return {z, false}; }
};

inline bool samePoint(const ExtPoint& a, const ExtPoint& b, double tol = 1e-9) {
  if (a.inf || b.inf) return a.inf == b.inf;
  return std::abs(a.z - b.z) <= tol * std::max(1.0, std::max(std::abs(a.z), std::abs(b.z)));
}

// ---- divisors: finite formal products of points with integer exponents ----

struct Divisor {
  std::vector<std::pair<ExtPoint, int>> entries;

  void add(ExtPoint p, int order) {
    if (order == 0) return;
    for (auto& e : entries) {
      if (samePoint(e.first, p)) {
        e.second += order;
        if (e.second == 0)
          entries.erase(entries.begin() + (&e - entries.data()));
        return;
      }
    }
    entries.push_back({p, order});
  }
  int orderAt(ExtPoint p) const {
    for (const auto& e : entries)
      if (samePoint(e.first, p)) return e.second;
    return 0;
  }
};

inline int divisorDegree(const Divisor& D) {
  int s = 0;
  for (const auto& e : D.entries) s += e.second;
  return s;
}

// ---- rational functions, numerator/denominator coefficient lists ----

struct RationalFunction {
  Poly num{cplx(1)};
  Poly den{cplx(1)}; // monic

  static RationalFunction polynomial(Poly p) { return {polyTrim(std::move(p)), {cplx(1)}}; }
  static RationalFunction make(Poly n, Poly d) {
    n = polyTrim(std::move(n));
    d = polyTrim(std::move(d));
    if (polyDegree(d) < 0) throw std::invalid_argument("zero denominator");
    cplx lead = d[polyDegree(d)];
    return {polyScale(n, cplx(1) / lead), polyScale(d, cplx(1) / lead)};
  }

  cplx eval(cplx z) const { return polyEval(num, z) / polyEval(den, z); }

  RationalFunction derivative() const {
    Poly n = polyAdd(polyMul(polyDeriv(num), den),
                     polyScale(polyMul(num, polyDeriv(den)), cplx(-1)));
    return make(n, polyMul(den, den));
  }

  RationalFunction operator+(const RationalFunction& o) const {
    return make(polyAdd(polyMul(num, o.den), polyMul(o.num, den)), polyMul(den, o.den));
  }
  RationalFunction operator*(const RationalFunction& o) const {
    return make(polyMul(num, o.num), polyMul(den, o.den));
  }
  RationalFunction scaled(cplx s) const { return {polyScale(num, s), den}; }
};

inline RationalFunction operator*(cplx s, const RationalFunction& f) { return f.scaled(s); }

inline Divisor principalDivisor(const RationalFunction& f) {
  if (polyDegree(f.num) < 0)
    throw std::invalid_argument("principalDivisor: zero function");
  Divisor D;
  for (auto [r, m] : clusterRoots(polyRoots(f.num))) D.add(ExtPoint::at(r), m);
  for (auto [r, m] : clusterRoots(polyRoots(f.den))) D.add(ExtPoint::at(r), -m);
  int atInf = polyDegree(f.den) - polyDegree(f.num);
  if (atInf != 0) D.add(ExtPoint::infinity(), atInf);
  return D;
}

// dim of { f : (f) >= D^{-1} } on the sphere; valid when deg(D) > -2
inline int riemannRochDim(const Divisor& D) {
  int deg = divisorDegree(D);
  if (deg <= -2)
    throw std::invalid_argument("riemannRochDim: degree must exceed -2");
  return deg + 1; // genus 0
}

// explicit basis of { f : ord_p(f) >= -n_p for all p }, deg(D) >= 0
inline std::vector<RationalFunction> basisForDivisor(const Divisor& D) {
  int deg = divisorDegree(D);
  if (deg < 0) return {};
  Poly denom{cplx(1)}, numerBase{cplx(1)};
  for (const auto& [p, n] : D.entries) {
    if (p.inf) continue;
    Poly lin{-p.z, cplx(1)};
    for (int k = 0; k < std::abs(n); ++k) {
      if (n > 0) denom = polyMul(denom, lin);
      else numerBase = polyMul(numerBase, lin);
    }
  }
  std::vector<RationalFunction> basis;
  Poly zk{cplx(1)};
  for (int k = 0; k <= deg; ++k) {
    basis.push_back(RationalFunction::make(polyMul(zk, numerBase), denom));
    zk.insert(zk.begin(), cplx(0));
  }
  return basis;
}

// basis of functions with poles of order <= j at each puncture only
inline std::vector<RationalFunction> basisOfSpace(const std::vector<ExtPoint>& punctures,
                                                  int j) {
  if (j != 1 && j != 2) throw std::invalid_argument("basisOfSpace: j must be 1 or 2");
  int n = static_cast<int>(punctures.size());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (samePoint(punctures[a], punctures[b]))
        throw std::invalid_argument("basisOfSpace: punctures must be distinct");
  if (j == 1 && n < 2)
    throw std::invalid_argument("basisOfSpace: linear growth needs at least two ends");
  std::vector<RationalFunction> basis;
  basis.push_back(RationalFunction::polynomial({cplx(1)}));
  for (const auto& p : punctures) {
    if (p.inf) {
      Poly zk{cplx(0), cplx(1)};
      for (int k = 1; k <= j; ++k) {
        basis.push_back(RationalFunction::polynomial(zk));
        zk.insert(zk.begin(), cplx(0));
      }
    } else {
      Poly lin{-p.z, cplx(1)}, dk = lin;
      for (int k = 1; k <= j; ++k) {
        basis.push_back(RationalFunction::make({cplx(1)}, dk));
        dk = polyMul(dk, lin);
      }
    }
  }
  return basis;
}

// ---- surface model: sphere with punctures, conformally Euclidean ends ----

struct SurfaceModel {
  std::vector<ExtPoint> punctures;
  int growthClass = 2; // j

  SurfaceModel(std::vector<ExtPoint> ps, int j) : punctures(std::move(ps)), growthClass(j) {
    if (punctures.empty()) throw std::invalid_argument("SurfaceModel: need at least one end");
    if (j == 1 && punctures.size() < 2)
      throw std::invalid_argument("SurfaceModel: linear growth needs at least two ends");
    for (size_t a = 0; a < punctures.size(); ++a)
      for (size_t b = a + 1; b < punctures.size(); ++b)
        if (samePoint(punctures[a], punctures[b]))
          throw std::invalid_argument("SurfaceModel: punctures must be distinct");
  }

  int endCount() const { return static_cast<int>(punctures.size()); }

  // transition 1 -> 0 over end-coordinate radius [1/2, 1]
  static double cut(double t) { return smoothStepDown(2.0 * t - 1.0); }

  // log conformal factor: metric e^{2 sigma} |dz|^2, Euclidean outside unit
  // disks around finite punctures (the end chart there is w = 1/(z - e))
  double sigma(cplx z) const {
    double s = 0;
    for (const auto& p : punctures) {
      if (p.inf) continue;
      double t = std::abs(z - p.z);
      if (t >= 1.0) continue;
      if (t < 1e-300) t = 1e-300;
      s += -2.0 * std::log(t) * cut(t);
    }
    return s;
  }

  // boundary defining function: ~ 1/|w| in each end coordinate w
  double xWeight(cplx z) const {
    double x = 1.0 / std::sqrt(1.0 + std::norm(z));
    for (const auto& p : punctures) {
      if (p.inf) continue;
      double t = std::abs(z - p.z);
      if (t >= 1.0) continue;
      double c = cut(t);
      x *= t * c + (1.0 - c);
    }
    return x;
  }

  bool nearPuncture(cplx z, double radius) const {
    for (const auto& p : punctures)
      if (!p.inf && std::abs(z - p.z) < radius) return true;
    return false;
  }
};

} // namespace cgs
