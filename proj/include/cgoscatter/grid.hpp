#pragma once
// Uniform square grid window and complex field container.

#include <complex>
#include <vector>
#include <stdexcept>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <cmath>
#include <functional>
#include <string>

namespace cgs {

using cplx = std::complex<double>;

struct Grid {
  int n = 0;        // samples per axis, >= 16
  double R = 0.0;   // half-width of the window [-R,R]^2

  double dx() const { return 2.0 * R / (n - 1); }
  double coord(int i) const { return -R + i * dx(); }
  cplx z(int ix, int iy) const { return {coord(ix), coord(iy)}; }
  bool operator==(const Grid&) const = default;
};

// values stored row-major with the x index as the row: v[ix*n + iy]
struct Field {
  Grid g;
  std::vector<cplx> v;

  Field() = default;
  explicit Field(Grid gr) : g(gr), v(static_cast<size_t>(gr.n) * gr.n) {
    if (gr.n < 16) throw std::invalid_argument("Field: n must be >= 16");
    if (!(gr.R > 0)) throw std::invalid_argument("Field: R must be positive");
  }
  Field(Grid gr, std::vector<cplx> vals) : g(gr), v(std::move(vals)) {
    if (v.size() != static_cast<size_t>(gr.n) * gr.n)
      throw std::invalid_argument("Field: value count does not match the grid");
  }

  size_t size() const { return v.size(); }
  cplx& at(int ix, int iy) { return v[static_cast<size_t>(ix) * g.n + iy]; }
  const cplx& at(int ix, int iy) const { return v[static_cast<size_t>(ix) * g.n + iy]; }

  Field& operator+=(const Field& o) { check(o); for (size_t i = 0; i < v.size(); ++i) v[i] += o.v[i]; return *this; }
  Field& operator-=(const Field& o) { check(o); for (size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i]; return *this; }
  Field& operator*=(const Field& o) { check(o); for (size_t i = 0; i < v.size(); ++i) v[i] *= o.v[i]; return *this; }
  Field& operator*=(cplx s) { for (auto& x : v) x *= s; return *this; }

  void check(const Field& o) const {
    if (!(g == o.g)) throw std::invalid_argument("Field: grid mismatch in binary operation");
  }
};

inline Field operator+(Field a, const Field& b) { a += b; return a; }
inline Field operator-(Field a, const Field& b) { a -= b; return a; }
inline Field operator*(Field a, const Field& b) { a *= b; return a; }
inline Field operator*(cplx s, Field a) { a *= s; return a; }
inline Field operator*(Field a, cplx s) { a *= s; return a; }

inline Field sample(Grid g, const std::function<cplx(cplx)>& f) {
  Field F(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      F.at(ix, iy) = f(g.z(ix, iy));
  return F;
}

inline Field conjField(Field a) { for (auto& x : a.v) x = std::conj(x); return a; }

inline Field zeroField(Grid g) { return Field(g); }

// --- CGF1 binary field dump -------------------------------------------------
// magic "CGF1", then n and R as little-endian 64-bit values, then row-major
// complex pairs of 64-bit floats.

inline void writeCGF1(const Field& F, const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("writeCGF1: cannot open " + path);
  std::fwrite("CGF1", 1, 4, fp);
  uint64_t n64 = static_cast<uint64_t>(F.g.n);
  double R = F.g.R;
  std::fwrite(&n64, 8, 1, fp);
  std::fwrite(&R, 8, 1, fp);
  std::fwrite(F.v.data(), sizeof(cplx), F.v.size(), fp);
  std::fclose(fp);
}

inline Field readCGF1(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("readCGF1: cannot open " + path);
  char magic[4];
  if (std::fread(magic, 1, 4, fp) != 4 || std::memcmp(magic, "CGF1", 4) != 0) {
    std::fclose(fp);
    throw std::runtime_error("readCGF1: bad magic in " + path);
  }
  uint64_t n64 = 0; double R = 0;
  if (std::fread(&n64, 8, 1, fp) != 1 || std::fread(&R, 8, 1, fp) != 1) {
    std::fclose(fp);
    throw std::runtime_error("readCGF1: truncated header in " + path);
  }
  Field F(Grid{static_cast<int>(n64), R});
  if (std::fread(F.v.data(), sizeof(cplx), F.v.size(), fp) != F.v.size()) {
    std::fclose(fp);
    throw std::runtime_error("readCGF1: truncated payload in " + path);
  }
  std::fclose(fp);
  return F;
}

} // namespace cgs
