#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>

// Small dimension-generic vectors and matrices for n in {2,3}.
// Fixed storage (stride 3) with a runtime dimension keeps hot loops
// allocation-free while the rest of the code stays non-templated.

namespace varexp {

struct VecN {
  int n = 2;
  std::array<double, 3> c{};

  VecN() = default;
  explicit VecN(int dim) : n(dim) { assert(dim == 2 || dim == 3); }
  VecN(double x, double y) : n(2), c{x, y, 0.0} {}
  VecN(double x, double y, double z) : n(3), c{x, y, z} {}

  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }

  VecN& operator+=(const VecN& o) {
    for (int i = 0; i < n; ++i) c[i] += o.c[i];
    return *this;
  }
  VecN& operator-=(const VecN& o) {
    for (int i = 0; i < n; ++i) c[i] -= o.c[i];
    return *this;
  }
  VecN& operator*=(double s) {
    for (int i = 0; i < n; ++i) c[i] *= s;
    return *this;
  }

  friend VecN operator+(VecN a, const VecN& b) { return a += b; }
  friend VecN operator-(VecN a, const VecN& b) { return a -= b; }
  friend VecN operator*(double s, VecN a) { return a *= s; }
  friend VecN operator*(VecN a, double s) { return a *= s; }

  double dot(const VecN& o) const {
    double s = 0;
    for (int i = 0; i < n; ++i) s += c[i] * o.c[i];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

struct MatN {
  int n = 2;
  std::array<double, 9> a{};  // row-major, stride 3 regardless of n

  MatN() = default;
  explicit MatN(int dim) : n(dim) { assert(dim == 2 || dim == 3); }

  double& operator()(int i, int j) { return a[i * 3 + j]; }
  double operator()(int i, int j) const { return a[i * 3 + j]; }

  static MatN identity(int dim) {
    MatN m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }
  static MatN zero(int dim) { return MatN(dim); }

  MatN& operator+=(const MatN& o) {
    for (int i = 0; i < 9; ++i) a[i] += o.a[i];
    return *this;
  }
  MatN& operator-=(const MatN& o) {
    for (int i = 0; i < 9; ++i) a[i] -= o.a[i];
    return *this;
  }
  MatN& operator*=(double s) {
    for (int i = 0; i < 9; ++i) a[i] *= s;
    return *this;
  }
  friend MatN operator+(MatN x, const MatN& y) { return x += y; }
  friend MatN operator-(MatN x, const MatN& y) { return x -= y; }
  friend MatN operator*(double s, MatN x) { return x *= s; }
  friend MatN operator*(MatN x, double s) { return x *= s; }

  MatN transpose() const {
    MatN t(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t(i, j) = (*this)(j, i);
    return t;
  }

  MatN mul(const MatN& o) const {
    MatN r(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int k = 0; k < n; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  VecN mul(const VecN& v) const {
    VecN r(n);
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int j = 0; j < n; ++j) s += (*this)(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }

  double trace() const {
    double s = 0;
    for (int i = 0; i < n; ++i) s += (*this)(i, i);
    return s;
  }

  double det() const {
    if (n == 2) return a[0] * a[4] - a[1] * a[3];
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }

  // Frobenius inner product and norm, the matrix norm |A| used throughout.
  double ddot(const MatN& o) const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += (*this)(i, j) * o(i, j);
    return s;
  }
  double norm() const { return std::sqrt(ddot(*this)); }

  MatN sym() const {
    MatN s(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
    return s;
  }
  MatN skew() const {
    MatN s(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s(i, j) = 0.5 * ((*this)(i, j) - (*this)(j, i));
    return s;
  }
};

inline MatN outer(const VecN& u, const VecN& v) {
  MatN m(u.n);
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j) m(i, j) = u[i] * v[j];
  return m;
}

}  // namespace varexp
