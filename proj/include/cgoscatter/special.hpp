#pragma once
// Bessel and Hankel functions for integer order (possibly negative), real
// positive argument.

#include <cmath>
#include <complex>
#include <stdexcept>

namespace cgs {

inline double besselJ(int m, double x) {
  int am = m < 0 ? -m : m;
  double val = std::cyl_bessel_j(static_cast<double>(am), x);
  return (m < 0 && (am & 1)) ? -val : val;
}

inline double besselY(int m, double x) {
  if (!(x > 0)) throw std::domain_error("besselY: argument must be positive");
  int am = m < 0 ? -m : m;
  double val = std::cyl_neumann(static_cast<double>(am), x);
  return (m < 0 && (am & 1)) ? -val : val;
}

inline std::complex<double> hankel1(int m, double x) {
  return {besselJ(m, x), besselY(m, x)};
}

inline std::complex<double> hankel2(int m, double x) {
  return {besselJ(m, x), -besselY(m, x)};
}

// d/dx J_m(x)
inline double besselJPrime(int m, double x) {
  return 0.5 * (besselJ(m - 1, x) - besselJ(m + 1, x));
}

inline std::complex<double> hankel1Prime(int m, double x) {
  return 0.5 * (hankel1(m - 1, x) - hankel1(m + 1, x));
}

inline std::complex<double> hankel2Prime(int m, double x) {
  return 0.5 * (hankel2(m - 1, x) - hankel2(m + 1, x));
}

} // namespace cgs
