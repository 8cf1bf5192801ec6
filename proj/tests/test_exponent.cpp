#include <doctest.h>

#include <cmath>

#include "varexp/exponent.hpp"
#include "varexp/grid.hpp"

using namespace varexp;

namespace {

// Independent pair-scan oracle for the log-Holder estimator, written against
// the raw node arrays rather than the library loop.
double pair_scan_oracle(const ExponentField& p) {
  const GridDomain& d = *p.dom;
  double best = 0;
  for (int64_t a = 0; a < d.num_nodes(); ++a) {
    if (!d.inside[a]) continue;
    for (int64_t b = a + 1; b < d.num_nodes(); ++b) {
      if (!d.inside[b]) continue;
      double r = (d.point(a) - d.point(b)).norm();
      double val = std::abs(p.values[a] - p.values[b]) * std::log(std::exp(1.0) + 1.0 / r);
      best = std::max(best, val);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("build_exponent: constant, ramp, checkerboard extrema") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  auto pc = build_constant(dom, 2.0);
  CHECK(pc.p_minus == 2.0);
  CHECK(pc.p_plus == 2.0);

  auto pr = build_linear_ramp(dom, 1.4, 2.0, 0);
  CHECK(pr.p_minus == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(pr.p_plus == doctest::Approx(2.0).epsilon(1e-15));

  auto pcb = build_checkerboard(dom, 1.2, 1.8, 4);
  CHECK(pcb.p_minus == 1.2);
  CHECK(pcb.p_plus == 1.8);
}

TEST_CASE("build_exponent rejects values below 1") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  CHECK_THROWS(build_linear_ramp(dom, 0.8, 2.0, 0));
}

TEST_CASE("log_holder_constant: zero for constants, matches the pair scan") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 33);
  auto pc = build_constant(dom, 1.7);
  CHECK(log_holder_constant(pc) == 0.0);

  auto pr = build_linear_ramp(dom, 1.4, 2.0, 0);
  CHECK(log_holder_constant(pr) == doctest::Approx(pair_scan_oracle(pr)).epsilon(1e-14));
}

TEST_CASE("log_holder_constant grows under refinement for the checkerboard") {
  double prev = 0;
  for (int res : {17, 33, 65}) {
    auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), res);
    auto p = build_checkerboard(dom, 1.2, 1.8, 4);
    double c = log_holder_constant(p);
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("dual exponent: closed forms and involution") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  auto p2 = build_constant(dom, 2.0);
  auto d2 = dual_exponent(p2);
  for (double v : d2.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-15));

  auto p15 = build_constant(dom, 1.5);
  auto d15 = dual_exponent(p15);
  for (double v : d15.values) CHECK(v == doctest::Approx(3.0).epsilon(1e-15));

  auto pr = build_linear_ramp(dom, 1.4, 2.0, 0);
  auto dr = dual_exponent(pr);
  for (size_t i = 0; i < pr.values.size(); ++i) {
    CHECK(std::abs(1.0 / pr.values[i] + 1.0 / dr.values[i] - 1.0) <= 1e-12);
  }
  auto back = dual_exponent(dr);
  for (size_t i = 0; i < pr.values.size(); ++i)
    CHECK(std::abs(back.values[i] - pr.values[i]) <= 1e-12);

  auto p1 = build_linear_ramp(dom, 1.0, 2.0, 0);
  CHECK_THROWS(dual_exponent(p1));
}

TEST_CASE("rescale_exponent: constants, half-scale ramp, identity") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 33);
  auto target = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 25);

  auto pc = build_constant(dom, 1.6);
  auto qc = rescale_exponent(pc, VecN(0.1, 0.2), 0.5, target);
  for (double v : qc.values) CHECK(v == doctest::Approx(1.6).epsilon(1e-15));

  auto pr = build_linear_ramp(dom, 1.4, 2.0, 0);
  auto qr = rescale_exponent(pr, VecN(0.0, 0.0), 0.5, target);
  for (int64_t idx = 0; idx < target->num_nodes(); ++idx) {
    VecN x = target->point(idx);
    double expect = 1.4 + 0.6 * (0.5 * x[0]);
    CHECK(qr.values[idx] == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(qr.p_minus == doctest::Approx(1.4).epsilon(1e-13));
  CHECK(qr.p_plus == doctest::Approx(1.7).epsilon(1e-13));
  CHECK(qr.p_minus >= pr.p_minus - 1e-13);
  CHECK(qr.p_plus <= pr.p_plus + 1e-13);

  auto qi = rescale_exponent(pr, VecN(0.0, 0.0), 1.0, dom);
  for (size_t i = 0; i < pr.values.size(); ++i)
    CHECK(std::abs(qi.values[i] - pr.values[i]) <= 1e-12);

  CHECK_THROWS(rescale_exponent(pr, VecN(0.9, 0.0), 0.5, target));
}

TEST_CASE("log-Holder modulus does not grow under contraction") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 33);
  auto p = build_smooth_bump(dom, 1.5, 0.3, VecN(0.5, 0.5), 0.25);
  double base = log_holder_constant(p);
  for (double lam : {1.0, 0.5, 0.25}) {
    VecN x0((1.0 - lam) * 0.5, (1.0 - lam) * 0.5);
    auto q = rescale_exponent(p, x0, lam, make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 33));
    CHECK(log_holder_constant(q) <= base + 1e-9);
  }
}

TEST_CASE("cube oscillation: constants give 1, ramps stay bounded, jumps blow up") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 33);
  auto cubes = whitney_decomposition(*dom);

  auto pc = build_constant(dom, 1.9);
  CHECK(cube_oscillation_check(pc, cubes) == doctest::Approx(1.0));

  auto pr = build_linear_ramp(dom, 1.4, 2.0, 0);
  double c_log = log_holder_constant(pr);
  double osc = cube_oscillation_check(pr, cubes);
  CHECK(osc >= 1.0);
  CHECK(osc <= std::exp(dom->n * c_log));

  // stable as the family refines
  auto fine = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 65);
  auto pr_fine = build_linear_ramp(fine, 1.4, 2.0, 0);
  double osc_fine = cube_oscillation_check(pr_fine, whitney_decomposition(*fine));
  CHECK(osc_fine <= 1.5 * osc);
  CHECK(osc <= 1.5 * osc_fine);

  // Shrinking cubes straddling a checkerboard jump: unbounded growth.
  auto pcb = build_checkerboard(dom, 1.2, 1.8, 4);
  double prev = 0;
  for (double side : {0.5, 0.25, 0.125, 0.0625}) {
    std::vector<WhitneyCube> straddle{{VecN(0.25, 0.25), side, 0}};  // jump at x=0.25
    double val = cube_oscillation_check(pcb, straddle);
    CHECK(val >= prev);
    prev = val;
  }
  CHECK(prev >= std::pow(0.0625 * 0.0625, -0.6) * 0.99);
}
