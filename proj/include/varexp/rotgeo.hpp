#pragma once

#include <utility>

#include "varexp/smallmat.hpp"

namespace varexp {

struct Rotation {
  MatN m;
  // False when the polar factor is not the unique minimizer (degenerate
  // SVD with a det flip); a deterministic choice is still returned.
  bool unique = true;
};

// Euclidean (Frobenius) distance of A from SO(n).
double dist_SO(const MatN& A);

// Polar projection onto SO(n): from A = U S V^T take R = U diag(1,..,det(UV^T)) V^T,
// so |A - R| = dist_SO(A). The det flip always hits the smallest singular
// direction, making the choice reproducible.
Rotation nearest_rotation(const MatN& A);

// g(q,t) = t^2/2 for t <= 1, t^q/q + 1/2 - 1/q for t > 1; C^1 across t = 1.
double g_eval(double q, double t);
double g_deriv_t(double q, double t);

std::pair<MatN, MatN> sym_skew_split(const MatN& A);

MatN cofactor(const MatN& A);

// |dist_SO(A) - |A_sym - I|| / |A - I|^2; requires |A - I| >= 1e-8.
double taylor_defect(const MatN& A);

}  // namespace varexp
