#include <doctest.h>

#include <cmath>
#include <limits>

#include "varexp/exponent.hpp"
#include "varexp/grid.hpp"
#include "varexp/rigidity.hpp"
#include "varexp/varnorm.hpp"

using namespace varexp;

TEST_CASE("luxemburg norm rejects non-finite samples") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  auto p = build_constant(dom, 1.5);
  auto f = sample_scalar(dom, [](const VecN&) { return 1.0; });
  f.at(dom->index(5, 5)) = std::numeric_limits<double>::infinity();
  CHECK_THROWS(luxemburg_norm(f, p));
}

TEST_CASE("mixed korn rejects a broken strain split") {
  auto ball = make_disk(VecN(0.0, 0.0), 0.5, 17);
  auto p = build_constant(ball, 1.5);
  auto q = build_constant(ball, 2.0);
  auto u = sample_vector(ball, [](const VecN& x) { return VecN(x[1] * x[1], 0.0); });
  auto eu = sym_gradient(u);
  TensorField wrong(ball, 2);
  for (int64_t idx = 0; idx < ball->num_nodes(); ++idx) {
    MatN m = eu.mat_at(idx);
    m(0, 0) += 1.0;  // defect far beyond 10h
    wrong.set_mat(idx, m);
  }
  MixedSplit split{wrong, TensorField(ball, 2), p, q};
  CHECK_THROWS(mixed_korn_decompose(u, split));
}

TEST_CASE("mixed rigidity rejects violated dist bounds and bad mu") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  auto p = build_constant(dom, 1.5);
  auto u = sample_vector(dom, [](const VecN& x) { return VecN(2.0 * x[1], -x[0]); });
  MixedSplit zero{TensorField(dom, 0), TensorField(dom, 0), p, p};
  CHECK_THROWS(mixed_rigidity_decompose(u, zero, 2.0));  // dist >> 0 but f = g = 0

  auto rigid = sample_vector(dom, [](const VecN& x) { return x; });
  CHECK_THROWS(mixed_rigidity_decompose(rigid, zero, 0.5));
  CHECK_THROWS(mixed_rigidity_decompose(rigid, zero, 4.01));
}

TEST_CASE("nitsche rejects non-graph domains") {
  auto dom = make_rectangle(VecN(-1.0, -1.0), VecN(1.0, 1.0), 33);
  auto p = build_constant(dom, 1.5);
  auto u = sample_vector(dom, [](const VecN& x) { return x; });
  auto f = sample_matrix(dom, [](const VecN&) { return MatN::identity(2); });
  CHECK_THROWS(nitsche_extend(u, f, f, p, p, 0.3, 1.0));
}

TEST_CASE("graph halfspace construction is 2d only") {
  Box clip3(VecN(-1.0, -1.0, -1.0), VecN(1.0, 1.0, 1.0));
  CHECK_THROWS(make_graph_halfspace(0.3, 0.0, clip3, 17));
}

TEST_CASE("estimators insist on p minus above one") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  auto p1 = build_linear_ramp(dom, 1.0, 2.0, 0);
  auto u = sample_vector(dom, [](const VecN& x) { return VecN(x[1], 0.0); });
  CHECK_THROWS(rigidity_report(u, p1));
  CHECK_THROWS(korn_report(u, p1));
}

TEST_CASE("lusin requires a positive level") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  auto u = sample_vector(dom, [](const VecN& x) { return x; });
  CHECK_THROWS(lusin_truncate(u, 0.0));
}
