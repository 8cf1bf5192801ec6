#include <doctest.h>

#include <cmath>

#include "varexp/grid.hpp"

using namespace varexp;

namespace {
const double pi = 3.14159265358979323846;
}

TEST_CASE("rectangle domain: node and interior counts") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 33);
  CHECK(dom->num_nodes() == 33 * 33);
  CHECK(dom->inside_count == 31 * 31);
  CHECK(dom->active_count == 33 * 33);
  CHECK(dom->measure == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(dom->h == doctest::Approx(1.0 / 32));
}

TEST_CASE("lshape: pixel-count area close to 0.75") {
  auto dom = make_lshape(33);
  double area = double(dom->inside_count) * dom->h * dom->h;
  CHECK(std::abs(area - 0.75) <= 2 * dom->h);
  CHECK(dom->measure == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("graph halfspace: mask edge hugs the line") {
  Box clip(VecN(0.0, 0.0), VecN(1.0, 1.0));
  auto dom = make_graph_halfspace(0.3, 0.0, clip, 33);
  REQUIRE(dom->inside_count > 0);
  // Interior nodes whose upper neighbor leaves the region sit within h of
  // the graph line x2 = 0.3 x1.
  int edge_nodes = 0;
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
    if (!dom->inside[idx]) continue;
    int i, j, k;
    dom->coords(idx, i, j, k);
    if (j + 1 >= dom->dims[1]) continue;
    if (dom->inside[dom->index(i, j + 1)]) continue;
    VecN p = dom->point(idx);
    double line_dist = std::abs(0.3 * p[0] - p[1]) / std::sqrt(1.0 + 0.09);
    CHECK(line_dist <= dom->h);
    ++edge_nodes;
  }
  CHECK(edge_nodes > 10);
}

TEST_CASE("make_domain rejects tiny resolutions") {
  CHECK_THROWS(make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 4));
}

TEST_CASE("gradient exact for affine fields") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  MatN A(2);
  A(0, 0) = 0.5;
  A(0, 1) = -1.25;
  A(1, 0) = 2.0;
  A(1, 1) = 0.75;
  // Binary-representable entries: the stencils reproduce A bit-exactly.
  auto u = sample_vector(dom, [&](const VecN& x) { return A.mul(x) + VecN(0.25, -0.75); });
  auto g = gradient(u);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
    if (!dom->active[idx]) continue;
    CHECK((g.mat_at(idx) - A).norm() == 0.0);
  }
}

TEST_CASE("gradient of sin within 1e-3 at h=1/64") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 65);
  auto u = sample_vector(dom, [](const VecN& x) { return VecN(std::sin(x[0]), 0.0); });
  auto g = gradient(u);
  double worst = 0;
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
    if (!dom->active[idx]) continue;
    VecN p = dom->point(idx);
    worst = std::max(worst, std::abs(g.mat_at(idx)(0, 0) - std::cos(p[0])));
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("gradient of a constant vanishes, and is linear") {
  auto dom = make_lshape(17);
  auto u = sample_vector(dom, [](const VecN&) { return VecN(3.0, -2.0); });
  auto g = gradient(u);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
    if (dom->active[idx]) CHECK(g.mat_at(idx).norm() == 0.0);

  auto v = sample_vector(dom, [](const VecN& x) { return VecN(x[0] * x[1], x[1] * x[1]); });
  auto w = sample_vector(dom, [](const VecN& x) { return VecN(std::sin(x[0]), x[0]); });
  double a = 2.5, b = -1.5;
  TensorField lin(dom, 1);
  for (size_t i = 0; i < lin.v.size(); ++i) lin.v[i] = a * v.v[i] + b * w.v[i];
  auto gl = gradient(lin);
  auto gv = gradient(v);
  auto gw = gradient(w);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
    if (!dom->active[idx]) continue;
    MatN expect = a * gv.mat_at(idx) + b * gw.mat_at(idx);
    CHECK((gl.mat_at(idx) - expect).norm() <= 1e-13);
  }
}

TEST_CASE("sym_gradient annihilates skew motions and splits exactly") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  MatN S(2);
  S(0, 1) = 1.0;
  S(1, 0) = -1.0;
  auto u = sample_vector(dom, [&](const VecN& x) { return S.mul(x); });
  auto e = sym_gradient(u);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
    if (dom->active[idx]) CHECK(e.mat_at(idx).norm() <= 1e-14);

  auto v = sample_vector(dom, [](const VecN& x) { return VecN(x[0] * x[0], std::sin(3 * x[1])); });
  auto gv = gradient(v);
  auto ev = sym_gradient(v);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
    if (!dom->active[idx]) continue;
    MatN recon = ev.mat_at(idx) + gv.mat_at(idx).skew();
    CHECK((recon - gv.mat_at(idx)).norm() <= 1e-14);
  }
}

TEST_CASE("mean_gradient: affine exactly, sinusoid perturbation to 1e-6") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 65);
  MatN A(2);
  A(0, 0) = 1.0;
  A(0, 1) = 0.25;
  A(1, 0) = -0.5;
  A(1, 1) = 2.0;
  auto u = sample_vector(dom, [&](const VecN& x) { return A.mul(x) + VecN(1.0, 2.0); });
  CHECK((mean_gradient(u) - A).norm() <= 1e-13);

  auto up = sample_vector(dom, [&](const VecN& x) {
    VecN val = A.mul(x);
    val[0] += 0.2 * std::sin(2 * pi * x[0]) * std::sin(2 * pi * x[1]);
    return val;
  });
  CHECK((mean_gradient(up) - A).norm() <= 1e-6);

  auto c = sample_vector(dom, [](const VecN&) { return VecN(4.0, 5.0); });
  CHECK(mean_gradient(c).norm() <= 1e-14);
}

TEST_CASE("gradient_adjoint is the exact transpose of gradient") {
  auto dom = make_lshape(17);
  auto u = sample_vector(dom, [](const VecN& x) {
    return VecN(std::sin(3 * x[0] + x[1]), x[0] * x[0] - 0.5 * x[1]);
  });
  auto P = sample_matrix(dom, [](const VecN& x) {
    MatN m(2);
    m(0, 0) = std::cos(2 * x[0]);
    m(0, 1) = x[1];
    m(1, 0) = x[0] * x[1];
    m(1, 1) = 1.0 - x[0];
    return m;
  });
  // Zero P outside the active set to match the adjoint's support.
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
    if (!dom->active[idx]) P.set_mat(idx, MatN(2));
  auto g = gradient(u);
  double lhs = 0;
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
    if (dom->active[idx]) lhs += P.mat_at(idx).ddot(g.mat_at(idx));
  auto adj = gradient_adjoint(P);
  double rhs = 0;
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
    rhs += adj.vec_at(idx).dot(u.vec_at(idx));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("whitney decomposition: exact predicates, overlap, coverage") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 33);
  auto cubes = whitney_decomposition(*dom);
  REQUIRE(!cubes.empty());
  double sqn = std::sqrt(2.0);
  for (const auto& q : cubes) {
    double dist = dom->shape.boundary_distance(q.box());
    CHECK(dist >= sqn * q.side);
    CHECK(dist <= 4.0 * sqn * q.side);
    // doubled cube contained in Omega
    Box dbl = q.doubled();
    CHECK(dbl.lo[0] >= 0.0);
    CHECK(dbl.lo[1] >= 0.0);
    CHECK(dbl.hi[0] <= 1.0);
    CHECK(dbl.hi[1] <= 1.0);
  }
  // Node-wise overlap of doubled cubes and coverage of interior nodes.
  int maxoverlap = 0;
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
    VecN p = dom->point(idx);
    int count = 0, cover = 0;
    for (const auto& q : cubes) {
      if (q.doubled().contains(p)) ++count;
      if (q.contains_halfopen(p)) ++cover;
    }
    maxoverlap = std::max(maxoverlap, count);
    if (dom->inside[idx]) CHECK(cover >= 1);
    CHECK(cover <= 1);  // half-open cubes tile disjointly
  }
  CHECK(maxoverlap <= 16);
}

TEST_CASE("whitney on lshape: cube size shrinks toward the corner") {
  auto dom = make_lshape(33);
  auto cubes = whitney_decomposition(*dom);
  VecN corner(0.5, 0.5);
  std::array<double, 3> bin_max{0, 0, 0};
  std::array<double, 3> edges{0.06, 0.15, 10.0};
  for (const auto& q : cubes) {
    double dc = dist_point_box(corner, q.box());
    for (int b = 0; b < 3; ++b)
      if (dc <= edges[b]) {
        bin_max[b] = std::max(bin_max[b], q.side);
        break;
      }
  }
  CHECK(bin_max[0] <= bin_max[1]);
  CHECK(bin_max[1] <= bin_max[2]);
}

TEST_CASE("distance_weight values") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 33);
  auto w = distance_weight(dom);
  int64_t center = dom->index(16, 16);
  CHECK(w.at(center) == doctest::Approx(0.5));
  int64_t near_b = dom->index(1, 16);
  CHECK(w.at(near_b) > 0.0);
  CHECK(w.at(near_b) <= std::sqrt(2.0) * dom->h + 1e-15);

  auto disk = make_disk(VecN(0.0, 0.0), 0.5, 33);
  double maxd = 0;
  for (int64_t idx = 0; idx < disk->num_nodes(); ++idx)
    if (disk->inside[idx]) maxd = std::max(maxd, disk->bdist[idx]);
  CHECK(std::abs(maxd - 0.5) <= disk->h);
}

TEST_CASE("boundary distance is 1-Lipschitz across adjacent nodes") {
  for (auto dom : {make_lshape(17), make_disk(VecN(0.0, 0.0), 0.5, 17)}) {
    for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) {
      int i, j, k;
      dom->coords(idx, i, j, k);
      if (i + 1 < dom->dims[0]) {
        double diff = std::abs(dom->bdist[idx] - dom->bdist[dom->index(i + 1, j)]);
        CHECK(diff <= dom->h + 1e-12);
      }
      if (j + 1 < dom->dims[1]) {
        double diff = std::abs(dom->bdist[idx] - dom->bdist[dom->index(i, j + 1)]);
        CHECK(diff <= dom->h + 1e-12);
      }
    }
  }
}

TEST_CASE("3d box: counts and affine gradient exactness") {
  auto dom = make_rectangle(VecN(0.0, 0.0, 0.0), VecN(1.0, 1.0, 1.0), 9);
  CHECK(dom->num_nodes() == 9 * 9 * 9);
  CHECK(dom->inside_count == 7 * 7 * 7);
  CHECK(dom->measure == doctest::Approx(1.0).epsilon(1e-13));
  MatN A(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = 0.3 * i - 0.7 * j + (i == j);
  auto u = sample_vector(dom, [&](const VecN& x) { return A.mul(x); });
  auto g = gradient(u);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx)
    if (dom->active[idx]) CHECK((g.mat_at(idx) - A).norm() <= 1e-12);
}
