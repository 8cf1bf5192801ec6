#pragma once

#include <functional>
#include <string>
#include <vector>

#include "varexp/grid.hpp"

namespace varexp {

// Variable exponent p(x) sampled at the grid nodes. Immutable after
// construction; p_minus/p_plus are the exact extrema over the nodes carrying
// field values (interior and boundary).
struct ExponentField {
  DomainPtr dom;
  std::vector<double> values;  // one per node
  double p_minus = 1;
  double p_plus = 1;

  double at(int64_t idx) const { return values[size_t(idx)]; }
};

ExponentField build_exponent_from(const DomainPtr& dom,
                                  const std::function<double(const VecN&)>& f);

ExponentField build_constant(const DomainPtr& dom, double p);
// p0 at bbox.lo[axis] ramping linearly to p1 at bbox.hi[axis].
ExponentField build_linear_ramp(const DomainPtr& dom, double p0, double p1, int axis = 0);
// base + amp * exp(-|x-center|^2 / width^2), smooth (log-Holder) bump.
ExponentField build_smooth_bump(const DomainPtr& dom, double base, double amp,
                                const VecN& center, double width);
// Alternating tiles of pa/pb; deliberately not log-Holder (negative tests).
ExponentField build_checkerboard(const DomainPtr& dom, double pa, double pb, int tiles);

// Largest |p(x)-p(y)| log(e + 1/|x-y|) over interior node pairs; a lower
// bound for the log-Holder constant that stabilizes under refinement for
// genuinely log-Holder fields.
double log_holder_constant(const ExponentField& p);

// p'(x) = p(x)/(p(x)-1); requires p > 1 everywhere.
ExponentField dual_exponent(const ExponentField& p);

// q(x) = p(x0 + lambda x) on the target grid, by multilinear interpolation.
ExponentField rescale_exponent(const ExponentField& p, const VecN& x0, double lambda,
                               const DomainPtr& target);

// max over cubes of |Q|^(p_Q^- - p_Q^+), exponents from nodes inside Q.
double cube_oscillation_check(const ExponentField& p, const std::vector<WhitneyCube>& cubes);

double interp_exponent(const ExponentField& p, const VecN& x);

}  // namespace varexp
