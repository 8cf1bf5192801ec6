#pragma once

#include <optional>
#include <vector>

#include "varexp/exponent.hpp"
#include "varexp/grid.hpp"
#include "varexp/rotgeo.hpp"
#include "varexp/varnorm.hpp"

namespace varexp {

// One estimator run: the inequality's two sides and their ratio. Constants
// from the source results are never asserted here, only measured.
struct RigidityReport {
  MatN rotation_or_skew;
  double lhs_norm = 0;
  double rhs_norm = 0;
  double ratio = 0;
  bool exact_zero = false;  // both sides below 1e-12
  double grid_h = 0;
  double p_minus = 0, p_plus = 0;
  double c_log = -1;  // filled when requested (pair scan is quadratic)
};

// |grad u - R|_p vs |d(grad u, SO(n))|_p with R the polar factor of the
// mean gradient. Set with_clog to also estimate the exponent's log-Holder
// constant (or pass a precomputed value via c_log_hint).
RigidityReport rigidity_report(const TensorField& u, const ExponentField& p,
                               double c_log_hint = -1);

// |grad u - S|_p vs |eu|_p with S the skew part of the mean gradient.
RigidityReport korn_report(const TensorField& u, const ExponentField& p,
                           double c_log_hint = -1);

// min_a |f - a|_p vs |d(.,dOmega) grad f|_p; a found by per-component
// golden-section descent.
RigidityReport weighted_poincare_report(const TensorField& f, const ExponentField& p);

// g-modular rigidity: both sides are g-modulars, not norms.
RigidityReport g_rigidity_report(const TensorField& u, const ExponentField& p);

struct LusinResult {
  TensorField v;
  std::vector<uint8_t> changed;  // node-set {u != v}
  int64_t changed_count = 0;
  double grad_inf_ratio = 0;  // |grad v|_inf / lambda (implementation constant)
  double changed_measure = 0; // weighted measure of the changed set
  double rhs_iii = 0;         // integral of |grad u|/lambda over {|grad u| > lambda}
  bool degenerate = false;
};

// Lipschitz truncation: v = u on the good set {M_Omega(|grad u|) <= lambda},
// McShane extension with slope lambda per component elsewhere.
LusinResult lusin_truncate(const TensorField& u, double lambda);

// 5/7-point Laplacian with zero values outside the interior, conjugate
// gradient to relative residual 1e-10; componentwise on any rank.
TensorField solve_poisson_dirichlet(const TensorField& f);

struct MixedSplit {
  TensorField f_part;  // rank 2 for Korn, rank 0 for dist-bound splits
  TensorField g_part;
  ExponentField p;
  ExponentField q;  // q >= p pointwise (q = mu*p for rigidity)
};

struct MixedKornResult {
  MatN S;
  TensorField F, G;            // on the ball grid; reliable on the half ball
  NodeMask half_mask;          // nodes of the half ball
  double residual_inf = 0;     // |grad u - S - F - G|_inf on the half ball
  double ratio_F = 0;          // |F|_p(half) / |f|_p(ball)
  double ratio_G = 0;          // |G|_q(half) / (|f|_p + |g|_q)(ball)
};

// Korn with mixed growth on a ball: Poisson potentials for f and g, the
// harmonic remainder absorbed into G, S the skew mean gradient of the
// remainder over the half ball.
MixedKornResult mixed_korn_decompose(const TensorField& u, const MixedSplit& split);

struct MixedRigidityResult {
  MatN R;
  TensorField F, G;
  double residual_inf = 0;  // |grad u - R - F - G|_inf over the domain
  double ratio_F = 0;       // |F|_p / |f|_p
  double ratio_G = 0;       // |G|_q / |g|_q
  bool failure = false;     // residual beyond 100h
  int recursion_levels = 0;
  bool used_g_dominant_branch = false;
};

// Constructive mixed-growth rigidity: Lusin truncation at lambda = 2 sqrt(n),
// clamping, single-exponent rigidity at q, Taylor correction, mixed Korn on
// the inscribed ball, rotation update R = O P; mu in (2,4] runs one recursion
// level through the doubled exponent. The rotation is finalized as the polar
// factor of the mean gradient.
MixedRigidityResult mixed_rigidity_decompose(const TensorField& u, const MixedSplit& split,
                                             double mu);

struct NitscheResult {
  DomainPtr out_dom;  // cube (-r, r)^n grid
  TensorField u_ext, f_ext, g_ext;
  ExponentField p_ext, q_ext;
  double r = 0;
  double moment0 = 0, moment1 = 0;    // quadrature of psi and lambda psi
  double residual_inf = 0;            // |e(u_ext) - f_ext - g_ext|_inf, all nodes
  double residual_inf_interior = 0;   // same, nodes at distance >= 2h from the graph
  double modular_f_outside = 0;       // modular of f_ext over Q_r \ Omega
};

// Reflection extension across an affine graph x_n = slope*x' given
// eu = f + g below the graph. Inputs live on a graph-halfspace domain whose
// sampled values cover the full bounding grid; the kernel is
// psi(lambda) = 28 - 18 lambda on [1,2].
NitscheResult nitsche_extend(const TensorField& u, const TensorField& f, const TensorField& g,
                             const ExponentField& p, const ExponentField& q, double slope,
                             double R);

// Row divergence (div F)_i = sum_j d_j F_ij.
TensorField divergence_rows(const TensorField& F);

}  // namespace varexp
