#pragma once

#include <utility>
#include <vector>

#include "varexp/exponent.hpp"
#include "varexp/grid.hpp"

namespace varexp {

enum class DensityKind { GDist, QuadraticWell };

// Data of one linearization experiment. The default density
// W(x,F) = g(p(x), d(F,SO(n))) is frame indifferent, vanishes on SO(n),
// and meets the subquadratic lower bound with equality; its quadratic form
// at the identity is |M_sym|^2.
struct EnergySpec {
  DomainPtr domain;
  ExponentField p;            // 1 < p^- <= p^+ <= 2
  TensorField boundary_data;  // rank-1 h, sampled on the whole grid
  DensityKind density = DensityKind::GDist;
  std::vector<double> epsilons;  // strictly decreasing
};

EnergySpec make_energy_spec(DomainPtr domain, ExponentField p, TensorField boundary_data,
                            std::vector<double> epsilons,
                            DensityKind density = DensityKind::GDist);

// Pointwise stored energy W(x, F) for exponent value pval at x.
double stored_energy_density(DensityKind kind, double pval, const MatN& F);

// eps^-2 integral of W(x, I + eps grad u); cell-based Gauss quadrature with
// multilinear element gradients. Rejects u violating the Dirichlet data.
double energy_nonlinear(const TensorField& u, double eps, const EnergySpec& spec);

// 1/2 integral of |eu|^2, the small-strain limit form.
double energy_linear(const TensorField& u, const EnergySpec& spec);

// Energy and its analytic gradient with respect to the free nodal values
// (Dirichlet rows zeroed). Used by the minimizers and the gradient check.
double energy_nonlinear_with_gradient(const TensorField& u, double eps, const EnergySpec& spec,
                                      TensorField& grad_out);
double energy_linear_with_gradient(const TensorField& u, const EnergySpec& spec,
                                   TensorField& grad_out);

struct MinimizeTrace {
  std::vector<double> energies;  // accepted iterates, non-increasing
  int iterations = 0;
  double grad_inf = 0;
  bool line_search_failure = false;
};

// Limited-memory quasi-Newton descent on the free nodes, gradient-only
// (the well density is C^1 across the branch point), Armijo backtracking.
std::pair<TensorField, MinimizeTrace> minimize_nonlinear(const EnergySpec& spec, double eps,
                                                         const TensorField& init);

// Conjugate gradient on the normal equations of the quadratic form with
// frozen Dirichlet values; relative residual 1e-10.
TensorField minimize_linear(const EnergySpec& spec);

// lhs = modular of grad u; rhs = 1 + F_eps(u) + (boundary integral of |h|)^2.
std::pair<double, double> compactness_check(const TensorField& u, double eps,
                                            const EnergySpec& spec);

// Edge-length-weighted trapezoid of |h| over the Dirichlet part.
double boundary_integral_h(const EnergySpec& spec);

struct ConvergenceRow {
  double eps = 0;
  double F_eps = 0;
  double gap = 0;          // |F_eps(u_eps) - F(u*)|
  double wp_dist = 0;      // |grad u_eps - grad u*|_p
  double modular = 0;      // modular of grad u_eps
  double compactness_rhs = 0;
  double tail_1 = 0, tail_2 = 0, tail_5 = 0, tail_10 = 0;
  int iters = 0;
  int flag = 0;  // bit 0: line search, bit 1: cold-start mismatch, bit 2: non-finite
  double recovery_strain_l2 = 0;  // |eu_eps chi_B - eu*|_L2, B = {sqrt(eps)|grad u| <= 1}
  double offwell_energy = 0;      // eps^-2 integral of W over B^c
  double poincare2_const = 0;     // fitted constant of the |I - R| estimate
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double min_F = 0;          // energy of the linear minimizer
  double norm_grad_star = 0; // |grad u*|_p
};

ConvergenceTable gamma_convergence_experiment(const EnergySpec& spec);

}  // namespace varexp
