#include "varexp/linearize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "varexp/rotgeo.hpp"
#include "varexp/varnorm.hpp"

namespace varexp {

namespace {

// Element quadrature: 2^n Gauss points per grid cell whose corners are all
// active, multilinear shape functions. Full Gauss integration keeps the
// quadratic form hourglass-free and makes affine fields exact minimizers
// under affine Dirichlet data.
struct CellQuadrature {
  struct GaussPoint {
    // per corner: shape value and physical shape gradient
    std::array<double, 8> shape{};
    std::array<std::array<double, 3>, 8> shape_grad{};
    double weight = 0;
  };
  std::vector<int64_t> cell_base;           // index of the low corner per cell
  std::vector<std::array<int64_t, 8>> cell_corners;
  std::vector<GaussPoint> gauss;            // same for every cell
  int corners = 4;

  static const CellQuadrature& of(const GridDomain& d);
};

const CellQuadrature& CellQuadrature::of(const GridDomain& d) {
  // Keyed by the domain's serial: addresses can be recycled, serials cannot.
  static thread_local std::deque<std::pair<uint64_t, CellQuadrature>> cache;
  for (auto& [key, val] : cache)
    if (key == d.serial) return val;
  if (cache.size() > 32) cache.pop_front();

  CellQuadrature q;
  const int n = d.n;
  q.corners = 1 << n;
  std::array<int64_t, 3> stride = {1, d.dims[0], int64_t(d.dims[0]) * d.dims[1]};

  for (int k = 0; k < std::max(1, d.dims[2] - (n == 3 ? 1 : 0)); ++k) {
    if (n == 2 && k > 0) break;
    for (int j = 0; j + 1 < d.dims[1]; ++j)
      for (int i = 0; i + 1 < d.dims[0]; ++i) {
        if (n == 3 && k + 1 >= d.dims[2]) continue;
        int64_t base = d.index(i, j, k);
        std::array<int64_t, 8> cs{};
        bool ok = true;
        for (int c = 0; c < q.corners; ++c) {
          int64_t idx = base;
          for (int a = 0; a < n; ++a)
            if ((c >> a) & 1) idx += stride[a];
          cs[c] = idx;
          if (!d.active[idx]) ok = false;
        }
        if (!ok) continue;
        q.cell_base.push_back(base);
        q.cell_corners.push_back(cs);
      }
  }

  const double gp[2] = {0.5 * (1.0 - 1.0 / std::sqrt(3.0)), 0.5 * (1.0 + 1.0 / std::sqrt(3.0))};
  int ngp = 1 << n;
  for (int g = 0; g < ngp; ++g) {
    CellQuadrature::GaussPoint pt;
    std::array<double, 3> xi{};
    for (int a = 0; a < n; ++a) xi[a] = gp[(g >> a) & 1];
    pt.weight = std::pow(d.h, n) / ngp;
    for (int c = 0; c < q.corners; ++c) {
      double val = 1;
      for (int a = 0; a < n; ++a) val *= ((c >> a) & 1) ? xi[a] : 1.0 - xi[a];
      pt.shape[c] = val;
      for (int b = 0; b < n; ++b) {
        double der = ((c >> b) & 1) ? 1.0 : -1.0;
        for (int a = 0; a < n; ++a) {
          if (a == b) continue;
          der *= ((c >> a) & 1) ? xi[a] : 1.0 - xi[a];
        }
        pt.shape_grad[c][b] = der / d.h;
      }
    }
    q.gauss.push_back(pt);
  }

  cache.push_back({d.serial, std::move(q)});
  return cache.back().second;
}

void check_boundary_data(const TensorField& u, const EnergySpec& spec) {
  const GridDomain& d = *spec.domain;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.dirichlet[idx]) continue;
    for (int c = 0; c < d.n; ++c)
      if (std::abs(u.at(idx, c) - spec.boundary_data.at(idx, c)) > 1e-10)
        throw std::invalid_argument("energy: u violates the Dirichlet data beyond 1e-10");
  }
}

// Pointwise dW/dF. For the default density W = g(p, d(F,SO(n))):
// dW/dF = (g_t(p,d)/d) (F - R(F)), and g_t(p,d)/d == 1 for d <= 1.
MatN density_stress(DensityKind kind, double pval, const MatN& F, double* w_out) {
  double dist = dist_SO(F);
  if (dist < 1e-14) {
    if (w_out) *w_out = 0;
    return MatN(F.n);
  }
  MatN R = nearest_rotation(F).m;
  MatN dir = F - R;
  if (kind == DensityKind::QuadraticWell) {
    if (w_out) *w_out = 0.5 * dist * dist;
    return dir;
  }
  if (w_out) *w_out = g_eval(pval, dist);
  double factor = dist <= 1.0 ? 1.0 : std::pow(dist, pval - 2.0);
  return factor * dir;
}

double density_value(DensityKind kind, double pval, const MatN& F) {
  double dist = dist_SO(F);
  if (kind == DensityKind::QuadraticWell) return 0.5 * dist * dist;
  return g_eval(pval, dist);
}

}  // namespace

double stored_energy_density(DensityKind kind, double pval, const MatN& F) {
  return density_value(kind, pval, F);
}

EnergySpec make_energy_spec(DomainPtr domain, ExponentField p, TensorField boundary_data,
                            std::vector<double> epsilons, DensityKind density) {
  if (!(p.p_minus > 1.0 && p.p_plus <= 2.0))
    throw std::invalid_argument("make_energy_spec: requires 1 < p^- <= p^+ <= 2");
  if (boundary_data.rank != 1 || boundary_data.dom.get() != domain.get())
    throw std::invalid_argument("make_energy_spec: boundary data must be a vector field on the domain");
  for (size_t i = 1; i < epsilons.size(); ++i)
    if (epsilons[i] >= epsilons[i - 1])
      throw std::invalid_argument("make_energy_spec: epsilons must decrease");
  for (double e : epsilons)
    if (e <= 0) throw std::invalid_argument("make_energy_spec: epsilons must be positive");
  EnergySpec spec;
  spec.domain = std::move(domain);
  spec.p = std::move(p);
  spec.boundary_data = std::move(boundary_data);
  spec.epsilons = std::move(epsilons);
  spec.density = density;
  return spec;
}

double energy_nonlinear(const TensorField& u, double eps, const EnergySpec& spec) {
  check_boundary_data(u, spec);
  const GridDomain& d = *spec.domain;
  const auto& cq = CellQuadrature::of(d);
  const int n = d.n;
  double acc = 0;
  for (size_t cell = 0; cell < cq.cell_corners.size(); ++cell) {
    const auto& cs = cq.cell_corners[cell];
    for (const auto& gp : cq.gauss) {
      MatN grad(n);
      double pval = 0;
      for (int c = 0; c < cq.corners; ++c) {
        pval += gp.shape[c] * spec.p.values[cs[c]];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) grad(i, j) += u.at(cs[c], i) * gp.shape_grad[c][j];
      }
      MatN F = MatN::identity(n) + eps * grad;
      acc += gp.weight * density_value(spec.density, pval, F);
    }
  }
  return acc / (eps * eps);
}

double energy_nonlinear_with_gradient(const TensorField& u, double eps, const EnergySpec& spec,
                                      TensorField& grad_out) {
  const GridDomain& d = *spec.domain;
  const auto& cq = CellQuadrature::of(d);
  const int n = d.n;
  grad_out = TensorField(spec.domain, 1);
  double acc = 0;
  for (size_t cell = 0; cell < cq.cell_corners.size(); ++cell) {
    const auto& cs = cq.cell_corners[cell];
    for (const auto& gp : cq.gauss) {
      MatN grad(n);
      double pval = 0;
      for (int c = 0; c < cq.corners; ++c) {
        pval += gp.shape[c] * spec.p.values[cs[c]];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) grad(i, j) += u.at(cs[c], i) * gp.shape_grad[c][j];
      }
      MatN F = MatN::identity(n) + eps * grad;
      double wval = 0;
      MatN stress = density_stress(spec.density, pval, F, &wval);
      acc += gp.weight * wval;
      double scale = gp.weight / eps;
      for (int c = 0; c < cq.corners; ++c)
        for (int i = 0; i < n; ++i) {
          double s = 0;
          for (int j = 0; j < n; ++j) s += stress(i, j) * gp.shape_grad[c][j];
          grad_out.at(cs[c], i) += scale * s;
        }
    }
  }
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx)
    if (d.dirichlet[idx] || !d.active[idx])
      for (int c = 0; c < n; ++c) grad_out.at(idx, c) = 0;
  return acc / (eps * eps);
}

double energy_linear(const TensorField& u, const EnergySpec& spec) {
  check_boundary_data(u, spec);
  const GridDomain& d = *spec.domain;
  const auto& cq = CellQuadrature::of(d);
  const int n = d.n;
  double acc = 0;
  for (size_t cell = 0; cell < cq.cell_corners.size(); ++cell) {
    const auto& cs = cq.cell_corners[cell];
    for (const auto& gp : cq.gauss) {
      MatN grad(n);
      for (int c = 0; c < cq.corners; ++c)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) grad(i, j) += u.at(cs[c], i) * gp.shape_grad[c][j];
      MatN e = grad.sym();
      acc += 0.5 * gp.weight * e.ddot(e);
    }
  }
  return acc;
}

double energy_linear_with_gradient(const TensorField& u, const EnergySpec& spec,
                                   TensorField& grad_out) {
  const GridDomain& d = *spec.domain;
  const auto& cq = CellQuadrature::of(d);
  const int n = d.n;
  grad_out = TensorField(spec.domain, 1);
  double acc = 0;
  for (size_t cell = 0; cell < cq.cell_corners.size(); ++cell) {
    const auto& cs = cq.cell_corners[cell];
    for (const auto& gp : cq.gauss) {
      MatN grad(n);
      for (int c = 0; c < cq.corners; ++c)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) grad(i, j) += u.at(cs[c], i) * gp.shape_grad[c][j];
      MatN e = grad.sym();
      acc += 0.5 * gp.weight * e.ddot(e);
      for (int c = 0; c < cq.corners; ++c)
        for (int i = 0; i < n; ++i) {
          double s = 0;
          for (int j = 0; j < n; ++j) s += e(i, j) * gp.shape_grad[c][j];
          grad_out.at(cs[c], i) += gp.weight * s;
        }
    }
  }
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx)
    if (d.dirichlet[idx] || !d.active[idx])
      for (int c = 0; c < n; ++c) grad_out.at(idx, c) = 0;
  return acc;
}

namespace {

struct DofMap {
  std::vector<int64_t> nodes;  // free active nodes
  int n = 2;

  explicit DofMap(const GridDomain& d) : n(d.n) {
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx)
      if (d.active[idx] && !d.dirichlet[idx]) nodes.push_back(idx);
  }
  size_t size() const { return nodes.size() * n; }
  void gather(const TensorField& f, std::vector<double>& x) const {
    x.resize(size());
    for (size_t r = 0; r < nodes.size(); ++r)
      for (int c = 0; c < n; ++c) x[r * n + c] = f.at(nodes[r], c);
  }
  void scatter(const std::vector<double>& x, TensorField& f) const {
    for (size_t r = 0; r < nodes.size(); ++r)
      for (int c = 0; c < n; ++c) f.at(nodes[r], c) = x[r * n + c];
  }
};

double inf_norm(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::pair<TensorField, MinimizeTrace> minimize_nonlinear(const EnergySpec& spec, double eps,
                                                         const TensorField& init) {
  check_boundary_data(init, spec);
  const GridDomain& d = *spec.domain;
  DofMap dofs(d);
  const size_t m = dofs.size();

  TensorField u = init;
  TensorField gfield(spec.domain, 1);
  std::vector<double> x(m), g(m), gnew(m);
  dofs.gather(u, x);

  auto eval = [&](const std::vector<double>& xv, std::vector<double>& gv) {
    dofs.scatter(xv, u);
    double e = energy_nonlinear_with_gradient(u, eps, spec, gfield);
    dofs.gather(gfield, gv);
    return e;
  };

  MinimizeTrace trace;
  double energy = eval(x, g);
  trace.energies.push_back(energy);

  const int hist = 10;
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> dir(m), xnew(m);

  const int max_iter = 2000;
  int it = 0;
  for (; it < max_iter; ++it) {
    trace.grad_inf = inf_norm(g);
    if (trace.grad_inf <= 1e-8) break;

    // two-loop recursion
    dir = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = int(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], dir);
      for (size_t k = 0; k < m; ++k) dir[k] -= alpha[i] * y_hist[i][k];
    }
    if (!s_hist.empty()) {
      double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (size_t k = 0; k < m; ++k) dir[k] *= gamma;
    }
    for (size_t i = 0; i < s_hist.size(); ++i) {
      double beta = rho_hist[i] * dot(y_hist[i], dir);
      for (size_t k = 0; k < m; ++k) dir[k] += s_hist[i][k] * (alpha[i] - beta);
    }
    for (size_t k = 0; k < m; ++k) dir[k] = -dir[k];

    double slope = dot(g, dir);
    if (slope >= 0) {  // fall back to steepest descent
      for (size_t k = 0; k < m; ++k) dir[k] = -g[k];
      slope = -dot(g, g);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Armijo backtracking
    double step = 1.0;
    bool accepted = false;
    double enew = energy;
    for (int ls = 0; ls < 40; ++ls) {
      for (size_t k = 0; k < m; ++k) xnew[k] = x[k] + step * dir[k];
      enew = eval(xnew, gnew);
      if (std::isfinite(enew) && enew <= energy + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      trace.line_search_failure = true;
      eval(x, g);  // restore the best iterate in u
      break;
    }

    std::vector<double> snew(m), ynew(m);
    for (size_t k = 0; k < m; ++k) {
      snew[k] = xnew[k] - x[k];
      ynew[k] = gnew[k] - g[k];
    }
    double sy = dot(snew, ynew);
    if (sy > 1e-14) {
      s_hist.push_back(std::move(snew));
      y_hist.push_back(std::move(ynew));
      rho_hist.push_back(1.0 / sy);
      if (int(s_hist.size()) > hist) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x.swap(xnew);
    g.swap(gnew);
    energy = enew;
    trace.energies.push_back(energy);
  }
  trace.iterations = it;
  dofs.scatter(x, u);
  return {u, trace};
}

TensorField minimize_linear(const EnergySpec& spec) {
  const GridDomain& d = *spec.domain;
  DofMap dofs(d);
  const size_t m = dofs.size();

  // Lift: Dirichlet values from h, zero elsewhere.
  TensorField lift(spec.domain, 1);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx)
    if (d.dirichlet[idx])
      for (int c = 0; c < d.n; ++c) lift.at(idx, c) = spec.boundary_data.at(idx, c);

  TensorField gfield(spec.domain, 1);
  TensorField work(spec.domain, 1);

  auto apply_K = [&](const std::vector<double>& xv, std::vector<double>& yv) {
    work = TensorField(spec.domain, 1);
    dofs.scatter(xv, work);
    energy_linear_with_gradient(work, spec, gfield);
    dofs.gather(gfield, yv);
  };

  std::vector<double> b(m);
  energy_linear_with_gradient(lift, spec, gfield);
  dofs.gather(gfield, b);
  for (double& v : b) v = -v;

  std::vector<double> x(m, 0.0), r = b, p = b, ap(m);
  double bnorm = std::sqrt(dot(b, b));
  TensorField out = lift;
  if (bnorm == 0) return out;
  double rr = bnorm * bnorm;
  const int maxit = 40000;
  bool converged = false;
  for (int it = 0; it < maxit; ++it) {
    apply_K(p, ap);
    double pap = dot(p, ap);
    if (pap <= 0) break;
    double alpha = rr / pap;
    for (size_t k = 0; k < m; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    double rr2 = dot(r, r);
    if (std::sqrt(rr2) <= 1e-10 * bnorm) {
      converged = true;
      break;
    }
    double beta = rr2 / rr;
    rr = rr2;
    for (size_t k = 0; k < m; ++k) p[k] = r[k] + beta * p[k];
  }
  if (!converged && std::sqrt(rr) > 1e-8 * bnorm)
    throw std::runtime_error("minimize_linear: CG stalled at relative residual " +
                             std::to_string(std::sqrt(rr) / bnorm));
  dofs.scatter(x, out);
  return out;
}

double boundary_integral_h(const EnergySpec& spec) {
  const GridDomain& d = *spec.domain;
  std::array<int64_t, 3> stride = {1, d.dims[0], int64_t(d.dims[0]) * d.dims[1]};
  double acc = 0;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.dirichlet[idx]) continue;
    int i, j, k;
    d.coords(idx, i, j, k);
    std::array<int, 3> c = {i, j, k};
    for (int a = 0; a < d.n; ++a) {
      if (c[a] + 1 >= d.dims[a]) continue;
      int64_t nb = idx + stride[a];
      if (!d.dirichlet[nb]) continue;
      double ha = spec.boundary_data.abs_at(idx);
      double hb = spec.boundary_data.abs_at(nb);
      acc += d.h * 0.5 * (ha + hb);
    }
  }
  return acc;
}

std::pair<double, double> compactness_check(const TensorField& u, double eps,
                                            const EnergySpec& spec) {
  double lhs = modular(gradient(u), spec.p);
  double bint = boundary_integral_h(spec);
  double rhs = 1.0 + energy_nonlinear(u, eps, spec) + bint * bint;
  return {lhs, rhs};
}

ConvergenceTable gamma_convergence_experiment(const EnergySpec& spec) {
  const GridDomain& d = *spec.domain;
  ConvergenceTable table;

  TensorField u_star = minimize_linear(spec);
  table.min_F = energy_linear(u_star, spec);
  TensorField grad_star = gradient(u_star);
  table.norm_grad_star = luxemburg_norm(grad_star, spec.p).value;
  TensorField eu_star = sym_gradient(u_star);
  double bint = boundary_integral_h(spec);

  TensorField warm = spec.boundary_data;  // h itself satisfies the data
  for (double eps : spec.epsilons) {
    ConvergenceRow row;
    row.eps = eps;
    auto [u_w, trace_w] = minimize_nonlinear(spec, eps, warm);
    auto [u_c, trace_c] = minimize_nonlinear(spec, eps, spec.boundary_data);
    double e_w = energy_nonlinear(u_w, eps, spec);
    double e_c = energy_nonlinear(u_c, eps, spec);
    TensorField u_eps = e_w <= e_c ? u_w : u_c;
    const MinimizeTrace& trace = e_w <= e_c ? trace_w : trace_c;
    double energy = std::min(e_w, e_c);
    if (std::abs(e_w - e_c) > 0.01 * std::max({std::abs(e_w), std::abs(e_c), 1e-30}))
      row.flag |= 2;
    if (trace.line_search_failure) row.flag |= 1;
    if (!std::isfinite(energy)) row.flag |= 4;

    row.F_eps = energy;
    row.gap = std::abs(energy - table.min_F);
    row.iters = trace.iterations;

    TensorField grad_eps = gradient(u_eps);
    TensorField diff(spec.domain, 2);
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      diff.set_mat(idx, grad_eps.mat_at(idx) - grad_star.mat_at(idx));
    }
    row.wp_dist = luxemburg_norm(diff, spec.p).value;
    row.modular = modular(grad_eps, spec.p);
    row.compactness_rhs = 1.0 + energy + bint * bint;

    TensorField rescaled_dist(spec.domain, 0);
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      MatN F = MatN::identity(d.n) + eps * grad_eps.mat_at(idx);
      rescaled_dist.at(idx) = dist_SO(F) / eps;
    }
    auto tails = equi_integrability_profile(rescaled_dist, spec.p, {1.0, 2.0, 5.0, 10.0});
    row.tail_1 = tails[0].second;
    row.tail_2 = tails[1].second;
    row.tail_5 = tails[2].second;
    row.tail_10 = tails[3].second;

    // Recovery-sequence diagnostics on B = {sqrt(eps)|grad u| <= 1}.
    double rec = 0, offwell = 0;
    MatN mean_F(d.n);
    double wsum = 0;
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      MatN gm = grad_eps.mat_at(idx);
      bool in_b = std::sqrt(eps) * gm.norm() <= 1.0;
      MatN eudiff = (in_b ? gm.sym() : MatN(d.n)) - eu_star.mat_at(idx);
      rec += d.weight[idx] * eudiff.ddot(eudiff);
      if (!in_b) {
        MatN F = MatN::identity(d.n) + eps * gm;
        offwell += d.weight[idx] * g_eval(spec.p.values[idx], dist_SO(F));
      }
      mean_F += d.weight[idx] * (MatN::identity(d.n) + eps * gm);
      wsum += d.weight[idx];
    }
    row.recovery_strain_l2 = std::sqrt(rec);
    row.offwell_energy = offwell / (eps * eps);

    MatN R_eps = nearest_rotation((1.0 / wsum) * mean_F).m;
    double l1 = 0;
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      MatN F = MatN::identity(d.n) + eps * grad_eps.mat_at(idx);
      l1 += d.weight[idx] * (F - R_eps).norm();
    }
    double denom = l1 + eps * bint;
    row.poincare2_const =
        denom > 1e-14 ? (MatN::identity(d.n) - R_eps).norm() / denom : 0.0;

    table.rows.push_back(row);
    warm = u_eps;
  }
  return table;
}

}  // namespace varexp
