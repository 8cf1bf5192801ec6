#pragma once

#include <cmath>
#include <utility>
#include <vector>

namespace varexp {

// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration on
// the Legendre polynomial roots. Deterministic to machine precision.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m) {
  std::vector<double> x(m), w(m);
  const double pi = 3.141592653589793238462643383279502884;
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (m + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = m * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[m - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[m - 1 - i] = w[i];
  }
  return {x, w};
}

// Same rule mapped to [a,b].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_on(int m, double a,
                                                                             double b) {
  auto [x, w] = gauss_legendre(m);
  for (int i = 0; i < m; ++i) {
    x[i] = 0.5 * (a + b) + 0.5 * (b - a) * x[i];
    w[i] *= 0.5 * (b - a);
  }
  return {x, w};
}

}  // namespace varexp
