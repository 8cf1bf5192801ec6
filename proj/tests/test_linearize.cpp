#include <doctest.h>

#include <cmath>

#include "varexp/linearize.hpp"
#include "varexp/rng.hpp"
#include "varexp/rotgeo.hpp"
#include "varexp/varnorm.hpp"

using namespace varexp;

namespace {

MatN rot2(double theta) {
  MatN r(2);
  r(0, 0) = std::cos(theta);
  r(0, 1) = -std::sin(theta);
  r(1, 0) = std::sin(theta);
  r(1, 1) = std::cos(theta);
  return r;
}

EnergySpec square_spec(int res, const std::function<VecN(const VecN&)>& h,
                       std::vector<double> eps = {1e-1, 1e-2, 1e-3}) {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), res);
  auto p = build_linear_ramp(dom, 1.3, 2.0, 0);
  auto hb = sample_vector(dom, h);
  return make_energy_spec(dom, p, hb, std::move(eps));
}

}  // namespace

TEST_CASE("energy spec validation") {
  auto dom = make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17);
  auto h = sample_vector(dom, [](const VecN&) { return VecN(0.0, 0.0); });
  CHECK_THROWS(make_energy_spec(dom, build_constant(dom, 2.5), h, {0.1}));
  CHECK_THROWS(make_energy_spec(dom, build_constant(dom, 1.0), h, {0.1}));
  CHECK_THROWS(make_energy_spec(dom, build_constant(dom, 1.8), h, {0.1, 0.2}));
}

TEST_CASE("nonlinear energy: zero state, skew data, symmetric limit") {
  auto spec = square_spec(17, [](const VecN&) { return VecN(0.0, 0.0); });
  auto zero = sample_vector(spec.domain, [](const VecN&) { return VecN(0.0, 0.0); });
  CHECK(energy_nonlinear(zero, 0.1, spec) == 0.0);

  // u = Sx is admissible only with matching data; use a free boundary here.
  auto dom_free = with_dirichlet(spec.domain, [](const VecN&) { return false; });
  auto pf = build_linear_ramp(dom_free, 1.3, 2.0, 0);
  auto hf = sample_vector(dom_free, [](const VecN&) { return VecN(0.0, 0.0); });
  auto spec_free = make_energy_spec(dom_free, pf, hf, {1e-1, 1e-2, 1e-3});
  MatN s(2);
  s(0, 1) = -1.0;
  s(1, 0) = 1.0;
  auto us = sample_vector(dom_free, [&](const VecN& x) { return s.mul(x); });
  double prev = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    double e = energy_nonlinear(us, eps, spec_free);
    CHECK(e <= prev + 1e-12);  // O(eps^2) decay of the skew energy
    prev = e;
  }
  CHECK(prev <= 1e-4);

  MatN a(2);
  a(0, 0) = 0.4;
  a(0, 1) = a(1, 0) = 0.1;
  a(1, 1) = -0.2;
  auto ua = sample_vector(dom_free, [&](const VecN& x) { return a.mul(x); });
  double target = 0.5 * a.ddot(a);  // |Omega| = 1
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    double e = energy_nonlinear(ua, eps, spec_free);
    CHECK(std::abs(e - target) <= 3.0 * eps + 1e-10);
  }

  // boundary violation rejected
  auto bad = sample_vector(spec.domain, [](const VecN&) { return VecN(0.5, 0.0); });
  CHECK_THROWS(energy_nonlinear(bad, 0.1, spec));
}

TEST_CASE("linear energy: kernel, closed form, 2-homogeneity") {
  auto dom = with_dirichlet(make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17),
                            [](const VecN&) { return false; });
  auto p = build_linear_ramp(dom, 1.3, 2.0, 0);
  auto h = sample_vector(dom, [](const VecN&) { return VecN(0.0, 0.0); });
  auto spec = make_energy_spec(dom, p, h, {0.1});

  MatN s(2);
  s(0, 1) = 2.0;
  s(1, 0) = -2.0;
  auto us = sample_vector(dom, [&](const VecN& x) { return s.mul(x); });
  CHECK(energy_linear(us, spec) <= 1e-24);

  MatN a(2);
  a(0, 0) = 1.0;
  a(0, 1) = a(1, 0) = 0.25;
  a(1, 1) = 0.5;
  auto ua = sample_vector(dom, [&](const VecN& x) { return a.mul(x); });
  CHECK(energy_linear(ua, spec) == doctest::Approx(0.5 * a.ddot(a)).epsilon(1e-12));

  auto u2 = sample_vector(dom, [&](const VecN& x) { return 2.0 * a.mul(x); });
  CHECK(energy_linear(u2, spec) ==
        doctest::Approx(4.0 * energy_linear(ua, spec)).epsilon(1e-10));
}

TEST_CASE("analytic gradient matches central differences") {
  auto spec = square_spec(33, [](const VecN& x) { return VecN(0.05 * x[1], 0.05 * x[0]); });
  const GridDomain& d = *spec.domain;
  auto u = sample_vector(spec.domain, [&](const VecN& x) {
    return VecN(0.05 * x[1] + 0.0, 0.05 * x[0]);
  });
  // free perturbation so BC still holds
  SplitMix64 rng(99);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx] || d.dirichlet[idx]) continue;
    u.at(idx, 0) += 0.3 * rng.sym(1.0);
    u.at(idx, 1) += 0.3 * rng.sym(1.0);
  }
  double eps = 0.05;
  TensorField g(spec.domain, 1);
  energy_nonlinear_with_gradient(u, eps, spec, g);

  for (int trial = 0; trial < 20; ++trial) {
    TensorField dir(spec.domain, 1);
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx] || d.dirichlet[idx]) continue;
      dir.at(idx, 0) = rng.sym(1.0);
      dir.at(idx, 1) = rng.sym(1.0);
    }
    double gdot = 0;
    for (size_t i = 0; i < g.v.size(); ++i) gdot += g.v[i] * dir.v[i];
    double delta = 1e-6;
    TensorField up = u, um = u;
    for (size_t i = 0; i < u.v.size(); ++i) {
      up.v[i] += delta * dir.v[i];
      um.v[i] -= delta * dir.v[i];
    }
    double fd = (energy_nonlinear(up, eps, spec) - energy_nonlinear(um, eps, spec)) / (2 * delta);
    CHECK(std::abs(fd - gdot) <= 1e-5 * std::max(1.0, std::abs(gdot)));
  }
}

TEST_CASE("frame indifference of the discrete energy") {
  auto dom = with_dirichlet(make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17),
                            [](const VecN&) { return false; });
  auto p = build_linear_ramp(dom, 1.3, 2.0, 0);
  auto h = sample_vector(dom, [](const VecN&) { return VecN(0.0, 0.0); });
  auto spec = make_energy_spec(dom, p, h, {0.1});
  double eps = 0.1;
  auto u = sample_vector(dom, [](const VecN& x) {
    return VecN(0.3 * std::sin(x[0] + 2 * x[1]), 0.2 * x[0] * x[0]);
  });
  MatN r = rot2(0.9);
  // y' = R y for the deformation y = x + eps u gives I + eps grad u' = R(I + eps grad u)
  auto urot = sample_vector(dom, [&](const VecN& x) {
    VecN y = x + eps * VecN(0.3 * std::sin(x[0] + 2 * x[1]), 0.2 * x[0] * x[0]);
    return (1.0 / eps) * (r.mul(y) - x);
  });
  double e0 = energy_nonlinear(u, eps, spec);
  double e1 = energy_nonlinear(urot, eps, spec);
  CHECK(std::abs(e0 - e1) <= 1e-10 * std::max(1.0, e0));
}

TEST_CASE("quadratic well dominates the subquadratic density") {
  auto dom = with_dirichlet(make_rectangle(VecN(0.0, 0.0), VecN(1.0, 1.0), 17),
                            [](const VecN&) { return false; });
  auto p = build_linear_ramp(dom, 1.3, 2.0, 0);
  auto h = sample_vector(dom, [](const VecN&) { return VecN(0.0, 0.0); });
  auto spec_g = make_energy_spec(dom, p, h, {0.1});
  auto spec_q = make_energy_spec(dom, p, h, {0.1}, DensityKind::QuadraticWell);
  auto u = sample_vector(dom, [](const VecN& x) {
    return VecN(2.0 * std::sin(3 * x[1]), 2.0 * x[0]);
  });
  CHECK(energy_nonlinear(u, 0.5, spec_q) >= energy_nonlinear(u, 0.5, spec_g) - 1e-12);
}

TEST_CASE("minimize_nonlinear: zero data, rigid data, descent") {
  auto spec = square_spec(17, [](const VecN&) { return VecN(0.0, 0.0); }, {1e-1});
  auto zero = sample_vector(spec.domain, [](const VecN&) { return VecN(0.0, 0.0); });
  auto [u0, t0] = minimize_nonlinear(spec, 0.1, zero);
  CHECK(energy_nonlinear(u0, 0.1, spec) <= 1e-12);

  double eps = 0.05;
  MatN s(2);
  s(0, 1) = -1.0;
  s(1, 0) = 1.0;
  MatN r0 = rot2(eps);  // exp of eps*s
  auto spec_r = square_spec(17, [&](const VecN& x) { return (1.0 / eps) * (r0.mul(x) - x); });
  auto init = spec_r.boundary_data;
  SplitMix64 rng(5);
  const GridDomain& d = *spec_r.domain;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx] || d.dirichlet[idx]) continue;
    init.at(idx, 0) += 0.2 * rng.sym(1.0);
    init.at(idx, 1) += 0.2 * rng.sym(1.0);
  }
  double e_init = energy_nonlinear(init, eps, spec_r);
  auto [ur, tr] = minimize_nonlinear(spec_r, eps, init);
  double e_final = energy_nonlinear(ur, eps, spec_r);
  CHECK(e_final <= 1e-7);      // the rigid state is admissible with zero energy
  CHECK(e_final <= e_init);    // descent
  for (size_t i = 1; i < tr.energies.size(); ++i)
    CHECK(tr.energies[i] <= tr.energies[i - 1] + 1e-15);
}

TEST_CASE("minimize_linear: kernel data and affine criticality") {
  auto spec0 = square_spec(17, [](const VecN&) { return VecN(0.0, 0.0); });
  auto u0 = minimize_linear(spec0);
  for (double v : u0.v) CHECK(std::abs(v) <= 1e-12);

  MatN s(2);
  s(0, 1) = 0.7;
  s(1, 0) = -0.7;
  auto spec_s = square_spec(17, [&](const VecN& x) { return s.mul(x); });
  auto us = minimize_linear(spec_s);
  CHECK(energy_linear(us, spec_s) <= 1e-16);
  for (int64_t idx = 0; idx < spec_s.domain->num_nodes(); ++idx) {
    if (!spec_s.domain->active[idx]) continue;
    VecN expect = s.mul(spec_s.domain->point(idx));
    CHECK(std::abs(us.at(idx, 0) - expect[0]) <= 1e-7);
    CHECK(std::abs(us.at(idx, 1) - expect[1]) <= 1e-7);
  }

  MatN a(2);
  a(0, 0) = 0.6;
  a(0, 1) = a(1, 0) = 0.2;
  a(1, 1) = -0.4;
  auto spec_a = square_spec(17, [&](const VecN& x) { return a.mul(x); });
  auto ua = minimize_linear(spec_a);
  for (int64_t idx = 0; idx < spec_a.domain->num_nodes(); ++idx) {
    if (!spec_a.domain->active[idx]) continue;
    VecN expect = a.mul(spec_a.domain->point(idx));
    CHECK(std::abs(ua.at(idx, 0) - expect[0]) <= 1e-6);
    CHECK(std::abs(ua.at(idx, 1) - expect[1]) <= 1e-6);
  }
}

TEST_CASE("compactness check: trivial state and data scaling") {
  auto spec = square_spec(17, [](const VecN&) { return VecN(0.0, 0.0); });
  auto zero = sample_vector(spec.domain, [](const VecN&) { return VecN(0.0, 0.0); });
  auto [lhs, rhs] = compactness_check(zero, 0.1, spec);
  CHECK(lhs == 0.0);
  CHECK(rhs == doctest::Approx(1.0));

  auto spec1 = square_spec(17, [](const VecN& x) { return VecN(x[1], 0.2 * x[0]); });
  auto spec2 = square_spec(17, [](const VecN& x) { return VecN(2 * x[1], 0.4 * x[0]); });
  double b1 = boundary_integral_h(spec1);
  double b2 = boundary_integral_h(spec2);
  CHECK(b2 == doctest::Approx(2.0 * b1).epsilon(1e-13));
}

TEST_CASE("the default density meets the subquadratic bound with equality") {
  SplitMix64 rng(314);
  for (int trial = 0; trial < 500; ++trial) {
    double pv = rng.uniform(1.0, 2.0);
    MatN f(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) f(i, j) = rng.sym(3.0);
    double lower = g_eval(pv, dist_SO(f));
    CHECK(stored_energy_density(DensityKind::GDist, pv, f) == lower);
    CHECK(stored_energy_density(DensityKind::QuadraticWell, pv, f) >= lower - 1e-12);
  }
}

TEST_CASE("gamma experiment: zero data and skew rigid data") {
  auto spec0 = square_spec(17, [](const VecN&) { return VecN(0.0, 0.0); }, {1e-1, 1e-2});
  auto t0 = gamma_convergence_experiment(spec0);
  CHECK(t0.min_F == 0.0);
  for (const auto& row : t0.rows) {
    CHECK(row.F_eps <= 1e-12);
    CHECK(row.gap <= 1e-12);
    CHECK(row.wp_dist <= 1e-6);
  }

  MatN s(2);
  s(0, 1) = 0.3;
  s(1, 0) = -0.3;
  auto spec_s = square_spec(17, [&](const VecN& x) { return s.mul(x); }, {1e-1, 1e-2, 1e-3});
  auto ts = gamma_convergence_experiment(spec_s);
  CHECK(ts.min_F <= 1e-16);
  REQUIRE(ts.rows.size() == 3);
  CHECK(ts.rows.back().gap <= ts.rows.front().gap + 1e-12);
  CHECK(ts.rows.back().wp_dist <= 0.1 * std::max(1.0, ts.norm_grad_star));
  for (const auto& row : ts.rows) CHECK((row.flag & 4) == 0);
}

TEST_CASE("gamma diagnostics: recovery sequences decay, fitted constants bounded") {
  auto spec = square_spec(17, [](const VecN& x) {
    return VecN(0.1 * x[1] + 0.02 * std::sin(4 * x[0]), 0.1 * x[0]);
  }, {1e-1, 1e-2, 1e-3});
  auto table = gamma_convergence_experiment(spec);
  REQUIRE(table.rows.size() == 3);
  for (size_t i = 1; i < table.rows.size(); ++i) {
    CHECK(table.rows[i].recovery_strain_l2 <= table.rows[i - 1].recovery_strain_l2 + 1e-12);
    CHECK(table.rows[i].offwell_energy <= table.rows[i - 1].offwell_energy + 1e-12);
  }
  for (const auto& row : table.rows) {
    CHECK(std::isfinite(row.poincare2_const));
    CHECK(row.poincare2_const <= 100.0);
  }
}
