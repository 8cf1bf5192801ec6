#include "varexp/rotgeo.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace varexp {

namespace {

template <int N>
Rotation polar_project(const MatN& A) {
  using Mat = Eigen::Matrix<double, N, N>;
  Mat a;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = A(i, j);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU(), v = svd.matrixV();
  double duv = (u * v.transpose()).determinant();
  Mat d = Mat::Identity();
  d(N - 1, N - 1) = duv < 0 ? -1.0 : 1.0;  // singular values sorted, flip the smallest
  Mat r = u * d * v.transpose();
  Rotation rot;
  rot.m = MatN(N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) rot.m(i, j) = r(i, j);
  if (duv < 0) {
    auto s = svd.singularValues();
    if (s(N - 2) + s(N - 1) <= 1e-12 * (1.0 + s(0))) rot.unique = false;
  }
  return rot;
}

template <int N>
double dist_so_impl(const MatN& A) {
  using Mat = Eigen::Matrix<double, N, N>;
  Mat a;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = A(i, j);
  Eigen::JacobiSVD<Mat> svd(a);
  auto s = svd.singularValues();
  double det = a.determinant();
  double acc = 0;
  for (int i = 0; i < N - 1; ++i) acc += (s(i) - 1) * (s(i) - 1);
  double last = det >= 0 ? (s(N - 1) - 1) : (s(N - 1) + 1);
  acc += last * last;
  return std::sqrt(acc);
}

}  // namespace

double dist_SO(const MatN& A) {
  if (A.n == 2) return dist_so_impl<2>(A);
  return dist_so_impl<3>(A);
}

Rotation nearest_rotation(const MatN& A) {
  if (A.n == 2) return polar_project<2>(A);
  return polar_project<3>(A);
}

double g_eval(double q, double t) {
  if (q < 1.0 || q > 2.0) throw std::invalid_argument("g_eval: q must lie in [1,2]");
  if (t < 0.0) throw std::invalid_argument("g_eval: t must be nonnegative");
  if (t <= 1.0) return 0.5 * t * t;
  return std::pow(t, q) / q + 0.5 - 1.0 / q;
}

double g_deriv_t(double q, double t) {
  if (q < 1.0 || q > 2.0) throw std::invalid_argument("g_deriv_t: q must lie in [1,2]");
  if (t < 0.0) throw std::invalid_argument("g_deriv_t: t must be nonnegative");
  if (t <= 1.0) return t;
  return std::pow(t, q - 1.0);
}

std::pair<MatN, MatN> sym_skew_split(const MatN& A) {
  MatN s = A.sym();
  return {s, A - s};  // reconstruction A_sym + A_skew == A is bit-exact
}

MatN cofactor(const MatN& A) {
  MatN c(A.n);
  if (A.n == 2) {
    c(0, 0) = A(1, 1);
    c(0, 1) = -A(1, 0);
    c(1, 0) = -A(0, 1);
    c(1, 1) = A(0, 0);
    return c;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
      int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      c(i, j) = A(i1, j1) * A(i2, j2) - A(i1, j2) * A(i2, j1);
    }
  return c;
}

double taylor_defect(const MatN& A) {
  MatN ai = A - MatN::identity(A.n);
  double nai = ai.norm();
  if (nai < 1e-8) throw std::invalid_argument("taylor_defect: |A - I| below 1e-8");
  double d = dist_SO(A);
  double s = (A.sym() - MatN::identity(A.n)).norm();
  return std::abs(d - s) / (nai * nai);
}

}  // namespace varexp
