#pragma once

#include <utility>
#include <vector>

#include "varexp/exponent.hpp"
#include "varexp/grid.hpp"

namespace varexp {

// Optional node restriction for norms over subsets (chi_E f).
using NodeMask = std::vector<uint8_t>;

struct NormResult {
  double value = 0;
  double modular_at_value = 0;  // within 1e-9 of 1 unless value == 0
  int iterations = 0;
  double bracket_lo = 0;
  double bracket_hi = 0;
};

// Quadrature of |f(x)|^p(x) over the (optionally masked) domain.
double modular(const TensorField& f, const ExponentField& p, const NodeMask* mask = nullptr);

// Luxemburg norm by bisection on lambda -> modular(f/lambda).
NormResult luxemburg_norm(const TensorField& f, const ExponentField& p,
                          const NodeMask* mask = nullptr);

// Returns (|f.g|_s , 2 |f|_p |g|_q); requires 1/s = 1/p + 1/q pointwise.
std::pair<double, double> holder_product_check(const TensorField& f, const TensorField& g,
                                               const ExponentField& p, const ExponentField& q,
                                               const ExponentField& s);

enum class MaximalMode { Global, Local };

// Discrete Hardy-Littlewood maximal function: sup over dyadic radii
// {h, 2h, 4h, ...} covering diam(Omega) of ball averages of |f|. Global mode
// extends f by zero outside Omega and divides by the full lattice ball;
// local mode averages over Omega-intersected balls with quadrature weights.
TensorField maximal_function(const TensorField& f, MaximalMode mode);

struct LocalizationResult {
  double norm_sum = 0;   // | sum_Q chi_Q f |
  double middle = 0;     // | sum_Q chi_Q |chi_Q f| / |chi_Q| |
  double ratio_up = 0;   // middle / norm_sum
  double ratio_down = 0; // norm_sum / middle
};

LocalizationResult localization_check(const TensorField& f, const ExponentField& p,
                                      const std::vector<WhitneyCube>& cubes);

// (M, modular of f over {|f| > M}) for each threshold; non-increasing in M.
std::vector<std::pair<double, double>> equi_integrability_profile(
    const TensorField& f, const ExponentField& p, const std::vector<double>& thresholds);

// Quadrature of g(p(x), |f(x)|); requires p within [1,2].
double g_modular(const TensorField& f, const ExponentField& p);

}  // namespace varexp
