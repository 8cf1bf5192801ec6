#include "varexp/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "varexp/quadrule.hpp"

namespace varexp {

namespace {

constexpr double kZeroTol = 1e-12;

TensorField dist_so_field(const TensorField& grad) {
  TensorField d(grad.dom, 0);
  for (int64_t idx = 0; idx < grad.dom->num_nodes(); ++idx) {
    if (!grad.dom->active[idx]) continue;
    d.at(idx) = dist_SO(grad.mat_at(idx));
  }
  return d;
}

TensorField shift_matrix_field(const TensorField& grad, const MatN& m) {
  TensorField out(grad.dom, 2);
  for (int64_t idx = 0; idx < grad.dom->num_nodes(); ++idx) {
    if (!grad.dom->active[idx]) continue;
    out.set_mat(idx, grad.mat_at(idx) - m);
  }
  return out;
}

void fill_report(RigidityReport& rep, const ExponentField& p, const GridDomain& d,
                 double c_log_hint) {
  rep.grid_h = d.h;
  rep.p_minus = p.p_minus;
  rep.p_plus = p.p_plus;
  rep.c_log = c_log_hint;
  if (rep.lhs_norm <= kZeroTol && rep.rhs_norm <= kZeroTol) {
    rep.exact_zero = true;
    rep.ratio = 0;
  } else if (rep.rhs_norm > kZeroTol) {
    rep.ratio = rep.lhs_norm / rep.rhs_norm;
  } else {
    rep.ratio = std::numeric_limits<double>::infinity();
  }
}

}  // namespace

RigidityReport rigidity_report(const TensorField& u, const ExponentField& p, double c_log_hint) {
  if (p.p_minus <= 1.0) throw std::invalid_argument("rigidity_report: requires p^- > 1");
  TensorField grad = gradient(u);
  MatN mean = mean_gradient(u);
  Rotation rot = nearest_rotation(mean);
  RigidityReport rep;
  rep.rotation_or_skew = rot.m;
  rep.lhs_norm = luxemburg_norm(shift_matrix_field(grad, rot.m), p).value;
  rep.rhs_norm = luxemburg_norm(dist_so_field(grad), p).value;
  fill_report(rep, p, *u.dom, c_log_hint);
  return rep;
}

RigidityReport korn_report(const TensorField& u, const ExponentField& p, double c_log_hint) {
  if (p.p_minus <= 1.0) throw std::invalid_argument("korn_report: requires p^- > 1");
  TensorField grad = gradient(u);
  MatN s = mean_gradient(u).skew();
  TensorField sym(u.dom, 2);
  for (int64_t idx = 0; idx < u.dom->num_nodes(); ++idx) {
    if (!u.dom->active[idx]) continue;
    sym.set_mat(idx, grad.mat_at(idx).sym());
  }
  RigidityReport rep;
  rep.rotation_or_skew = s;
  rep.lhs_norm = luxemburg_norm(shift_matrix_field(grad, s), p).value;
  rep.rhs_norm = luxemburg_norm(sym, p).value;
  fill_report(rep, p, *u.dom, c_log_hint);
  return rep;
}

RigidityReport weighted_poincare_report(const TensorField& f, const ExponentField& p) {
  const GridDomain& d = *f.dom;
  const int comps = f.comps;

  std::vector<double> shift(comps, 0.0), lo(comps, 0.0), hi(comps, 0.0);
  for (int c = 0; c < comps; ++c) {
    double vlo = std::numeric_limits<double>::infinity(), vhi = -vlo, mean = 0, wsum = 0;
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      double v = f.at(idx, c);
      vlo = std::min(vlo, v);
      vhi = std::max(vhi, v);
      mean += d.weight[idx] * v;
      wsum += d.weight[idx];
    }
    shift[c] = mean / wsum;
    double pad = 0.1 * (vhi - vlo) + 1e-12;
    lo[c] = vlo - pad;
    hi[c] = vhi + pad;
  }

  auto norm_at = [&](const std::vector<double>& a) {
    TensorField sh(f.dom, f.rank);
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      for (int c = 0; c < comps; ++c) sh.at(idx, c) = f.at(idx, c) - a[c];
    }
    return luxemburg_norm(sh, p).value;
  };

  // Coordinate-wise golden-section descent; the norm is convex in each shift.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int sweep = 0; sweep < (comps > 1 ? 3 : 1); ++sweep) {
    for (int c = 0; c < comps; ++c) {
      double a = lo[c], b = hi[c];
      auto probe = shift;
      auto eval = [&](double x) {
        probe[c] = x;
        return norm_at(probe);
      };
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      double f1 = eval(x1), f2 = eval(x2);
      for (int it = 0; it < 60 && (b - a) > 1e-11 * (1 + std::abs(b)); ++it) {
        if (f1 <= f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - gr * (b - a);
          f1 = eval(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + gr * (b - a);
          f2 = eval(x2);
        }
      }
      shift[c] = 0.5 * (a + b);
    }
  }

  TensorField grad = gradient(f);
  TensorField weighted(f.dom, grad.rank);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    for (int c = 0; c < grad.comps; ++c) weighted.at(idx, c) = d.bdist[idx] * grad.at(idx, c);
  }

  RigidityReport rep;
  rep.rotation_or_skew = MatN(d.n);
  for (int c = 0; c < std::min(comps, 9); ++c) rep.rotation_or_skew.a[c] = shift[c];
  rep.lhs_norm = norm_at(shift);
  rep.rhs_norm = luxemburg_norm(weighted, p).value;
  fill_report(rep, p, d, -1);
  return rep;
}

RigidityReport g_rigidity_report(const TensorField& u, const ExponentField& p) {
  if (!(p.p_minus > 1.0 && p.p_plus <= 2.0))
    throw std::invalid_argument("g_rigidity_report: requires 1 < p^- <= p^+ <= 2");
  TensorField grad = gradient(u);
  Rotation rot = nearest_rotation(mean_gradient(u));
  RigidityReport rep;
  rep.rotation_or_skew = rot.m;
  rep.lhs_norm = g_modular(shift_matrix_field(grad, rot.m), p);
  rep.rhs_norm = g_modular(dist_so_field(grad), p);
  fill_report(rep, p, *u.dom, -1);
  return rep;
}

LusinResult lusin_truncate(const TensorField& u, double lambda) {
  if (lambda <= 0) throw std::invalid_argument("lusin_truncate: lambda must be positive");
  const GridDomain& d = *u.dom;
  TensorField grad = gradient(u);
  TensorField absgrad(u.dom, 0);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx)
    if (d.active[idx]) absgrad.at(idx) = grad.abs_at(idx);
  TensorField mg = maximal_function(absgrad, MaximalMode::Local);

  std::vector<int64_t> good, bad;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    (mg.at(idx) <= lambda ? good : bad).push_back(idx);
  }

  LusinResult res;
  res.v = TensorField(u.dom, 1);
  res.changed.assign(d.num_nodes(), 0);

  if (good.empty()) {
    res.degenerate = true;
    for (int c = 0; c < d.n; ++c) {
      std::vector<double> vals;
      for (int64_t idx : bad) vals.push_back(u.at(idx, c));
      std::sort(vals.begin(), vals.end());
      double med = vals[vals.size() / 2];
      for (int64_t idx : bad) res.v.at(idx, c) = med;
    }
  } else {
    for (int64_t idx : good) res.v.set_vec(idx, u.vec_at(idx));
    for (int64_t idx : bad) {
      VecN x = d.point(idx);
      for (int c = 0; c < d.n; ++c) {
        double best = std::numeric_limits<double>::infinity();
        for (int64_t y : good) {
          double cand = u.at(y, c) + lambda * (d.point(y) - x).norm();
          best = std::min(best, cand);
        }
        res.v.at(idx, c) = best;
      }
    }
  }

  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    bool diff = false;
    for (int c = 0; c < d.n; ++c)
      if (res.v.at(idx, c) != u.at(idx, c)) diff = true;
    if (diff) {
      res.changed[idx] = 1;
      ++res.changed_count;
      res.changed_measure += d.weight[idx];
    }
  }

  TensorField gv = gradient(res.v);
  double ginf = 0;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx)
    if (d.active[idx]) ginf = std::max(ginf, gv.abs_at(idx));
  res.grad_inf_ratio = ginf / lambda;

  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    double a = absgrad.at(idx);
    if (a > lambda) res.rhs_iii += d.weight[idx] * a / lambda;
  }
  return res;
}

namespace {

// Matrix-free CG for the masked 5/7-point -Laplacian with zero exterior values.
std::vector<double> cg_neg_laplace(const GridDomain& d, const std::vector<int64_t>& nodes,
                                   const std::vector<int64_t>& slot,  // node -> row, -1 outside
                                   const std::vector<double>& b) {
  const int64_t m = int64_t(nodes.size());
  const double inv_h2 = 1.0 / (d.h * d.h);
  std::array<int64_t, 3> stride = {1, d.dims[0], int64_t(d.dims[0]) * d.dims[1]};

  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (int64_t r = 0; r < m; ++r) {
      int64_t idx = nodes[r];
      int i, j, k;
      d.coords(idx, i, j, k);
      std::array<int, 3> c = {i, j, k};
      double acc = 2.0 * d.n * x[r];
      for (int a = 0; a < d.n; ++a)
        for (int s : {-1, 1}) {
          if (c[a] + s < 0 || c[a] + s >= d.dims[a]) continue;
          int64_t nb = slot[idx + s * stride[a]];
          if (nb >= 0) acc -= x[nb];
        }
      y[r] = acc * inv_h2;
    }
  };

  double bnorm = 0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  std::vector<double> x(m, 0.0);
  if (bnorm == 0) return x;

  std::vector<double> r = b, pdir = b, ap(m);
  double rr = bnorm * bnorm;
  const int maxit = std::max<int>(2000, 30 * *std::max_element(d.dims.begin(), d.dims.end()));
  for (int it = 0; it < maxit; ++it) {
    apply(pdir, ap);
    double pap = 0;
    for (int64_t i = 0; i < m; ++i) pap += pdir[i] * ap[i];
    double alpha = rr / pap;
    for (int64_t i = 0; i < m; ++i) {
      x[i] += alpha * pdir[i];
      r[i] -= alpha * ap[i];
    }
    double rr2 = 0;
    for (int64_t i = 0; i < m; ++i) rr2 += r[i] * r[i];
    if (std::sqrt(rr2) <= 1e-10 * bnorm) return x;
    double beta = rr2 / rr;
    rr = rr2;
    for (int64_t i = 0; i < m; ++i) pdir[i] = r[i] + beta * pdir[i];
  }
  throw std::runtime_error("solve_poisson_dirichlet: CG stalled at relative residual " +
                           std::to_string(std::sqrt(rr) / bnorm));
}

}  // namespace

TensorField solve_poisson_dirichlet(const TensorField& f) {
  const GridDomain& d = *f.dom;
  std::vector<int64_t> nodes;
  std::vector<int64_t> slot(d.num_nodes(), -1);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx)
    if (d.inside[idx]) {
      slot[idx] = int64_t(nodes.size());
      nodes.push_back(idx);
    }
  TensorField out(f.dom, f.rank);
  std::vector<double> b(nodes.size());
  for (int c = 0; c < f.comps; ++c) {
    for (size_t r = 0; r < nodes.size(); ++r) b[r] = f.at(nodes[r], c);
    auto x = cg_neg_laplace(d, nodes, slot, b);
    for (size_t r = 0; r < nodes.size(); ++r) out.at(nodes[r], c) = x[r];
  }
  return out;
}

TensorField divergence_rows(const TensorField& F) {
  const GridDomain& d = *F.dom;
  if (F.rank != 2) throw std::invalid_argument("divergence_rows: rank-2 field required");
  TensorField out(F.dom, 1);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    for (int i = 0; i < d.n; ++i) {
      double acc = 0;
      for (int j = 0; j < d.n; ++j) {
        const auto& st = d.stencil(idx, j);
        for (int m = 0; m < st.m; ++m) acc += st.coef[m] * F.at(idx + st.off[m], i * d.n + j);
      }
      out.at(idx, i) = acc;
    }
  }
  return out;
}

namespace {

NodeMask half_ball_mask(const GridDomain& d) {
  if (d.shape.kind != ShapeKind::Disk)
    throw std::invalid_argument("mixed_korn_decompose: ball domain required");
  NodeMask mask(d.num_nodes(), 0);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    if ((d.point(idx) - d.shape.center).norm() <= 0.5 * d.shape.radius) mask[idx] = 1;
  }
  return mask;
}

MatN masked_mean_gradient(const TensorField& u, const NodeMask& mask) {
  TensorField g = gradient(u);
  const GridDomain& d = *u.dom;
  MatN acc(d.n);
  double wsum = 0;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx] || !mask[idx]) continue;
    acc += d.weight[idx] * g.mat_at(idx);
    wsum += d.weight[idx];
  }
  return (1.0 / wsum) * acc;
}

}  // namespace

MixedKornResult mixed_korn_decompose(const TensorField& u, const MixedSplit& split) {
  const GridDomain& d = *u.dom;
  const TensorField& f = split.f_part;
  const TensorField& g = split.g_part;
  if (f.rank != 2 || g.rank != 2)
    throw std::invalid_argument("mixed_korn_decompose: rank-2 split parts required");
  if (split.p.p_minus <= 1.0)
    throw std::invalid_argument("mixed_korn_decompose: requires p^- > 1");

  TensorField eu = sym_gradient(u);
  double defect = 0;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    defect = std::max(defect, (eu.mat_at(idx) - f.mat_at(idx) - g.mat_at(idx)).norm());
  }
  if (defect > 10 * d.h)
    throw std::invalid_argument("mixed_korn_decompose: eu != f + g beyond 10h");

  auto rhs_of = [&](const TensorField& part) {
    TensorField rhs(u.dom, 2);
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      MatN m = part.mat_at(idx);
      MatN r = m.trace() * MatN::identity(d.n) - 2.0 * m;
      rhs.set_mat(idx, r);
    }
    return rhs;
  };

  TensorField psi_f = solve_poisson_dirichlet(rhs_of(f));
  TensorField psi_g = solve_poisson_dirichlet(rhs_of(g));
  TensorField u_f = divergence_rows(psi_f);
  TensorField u_g = divergence_rows(psi_g);

  TensorField w(u.dom, 1);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    w.set_vec(idx, u.vec_at(idx) - u_f.vec_at(idx) - u_g.vec_at(idx));
  }

  MixedKornResult res;
  res.half_mask = half_ball_mask(d);
  res.S = masked_mean_gradient(w, res.half_mask).skew();

  TensorField grad_uf = gradient(u_f);
  TensorField grad_ug = gradient(u_g);
  TensorField grad_w = gradient(w);
  res.F = TensorField(u.dom, 2);
  res.G = TensorField(u.dom, 2);
  TensorField grad_u = gradient(u);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    res.F.set_mat(idx, grad_uf.mat_at(idx));
    res.G.set_mat(idx, grad_w.mat_at(idx) + grad_ug.mat_at(idx) - res.S);
    if (res.half_mask[idx]) {
      MatN resid = grad_u.mat_at(idx) - res.S - res.F.mat_at(idx) - res.G.mat_at(idx);
      res.residual_inf = std::max(res.residual_inf, resid.norm());
    }
  }

  double nf = luxemburg_norm(f, split.p).value;
  double ng = luxemburg_norm(g, split.q).value;
  double nF = luxemburg_norm(res.F, split.p, &res.half_mask).value;
  double nG = luxemburg_norm(res.G, split.q, &res.half_mask).value;
  res.ratio_F = nf > kZeroTol ? nF / nf : (nF <= kZeroTol ? 0 : std::numeric_limits<double>::infinity());
  res.ratio_G = nf + ng > kZeroTol ? nG / (nf + ng)
                                   : (nG <= kZeroTol ? 0 : std::numeric_limits<double>::infinity());
  return res;
}

namespace {

ExponentField scale_exponent(const ExponentField& p, double factor) {
  ExponentField q;
  q.dom = p.dom;
  q.values.resize(p.values.size());
  for (size_t i = 0; i < p.values.size(); ++i) q.values[i] = factor * p.values[i];
  q.p_minus = factor * p.p_minus;
  q.p_plus = factor * p.p_plus;
  return q;
}

struct BallEmbedding {
  DomainPtr ball;
  std::vector<int64_t> to_parent;  // ball node -> parent node
};

BallEmbedding inscribed_ball(const DomainPtr& parent) {
  const GridDomain& d = *parent;
  int64_t best = -1;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx)
    if (d.inside[idx] && (best < 0 || d.bdist[idx] > d.bdist[best])) best = idx;
  int k = int(std::floor(0.95 * d.bdist[best] / d.h));
  if (k < 3) throw std::invalid_argument("mixed rigidity: domain too thin for an inscribed ball");
  VecN center = d.point(best);
  BallEmbedding emb;
  emb.ball = make_disk(center, k * d.h, 2 * k + 1);
  const GridDomain& b = *emb.ball;
  emb.to_parent.assign(b.num_nodes(), -1);
  int ci, cj, ck;
  d.coords(best, ci, cj, ck);
  for (int64_t idx = 0; idx < b.num_nodes(); ++idx) {
    int i, j, kk;
    b.coords(idx, i, j, kk);
    int pi = ci - k + i, pj = cj - k + j, pk = d.n == 3 ? ck - k + kk : 0;
    if (pi < 0 || pi >= d.dims[0] || pj < 0 || pj >= d.dims[1] ||
        (d.n == 3 && (pk < 0 || pk >= d.dims[2])))
      continue;
    emb.to_parent[idx] = d.index(pi, pj, pk);
  }
  return emb;
}

TensorField restrict_field(const BallEmbedding& emb, const TensorField& f) {
  TensorField out(emb.ball, f.rank);
  for (int64_t idx = 0; idx < emb.ball->num_nodes(); ++idx) {
    int64_t p = emb.to_parent[idx];
    if (p < 0) continue;
    for (int c = 0; c < f.comps; ++c) out.at(idx, c) = f.at(p, c);
  }
  return out;
}

ExponentField restrict_exponent(const BallEmbedding& emb, const ExponentField& p) {
  ExponentField out;
  out.dom = emb.ball;
  out.values.assign(size_t(emb.ball->num_nodes()), p.p_minus);
  for (int64_t idx = 0; idx < emb.ball->num_nodes(); ++idx) {
    int64_t pp = emb.to_parent[idx];
    if (pp >= 0) out.values[idx] = p.values[pp];
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int64_t idx = 0; idx < emb.ball->num_nodes(); ++idx) {
    if (!emb.ball->active[idx]) continue;
    lo = std::min(lo, out.values[idx]);
    hi = std::max(hi, out.values[idx]);
  }
  out.p_minus = lo;
  out.p_plus = hi;
  return out;
}

// Proportional pointwise split of a matrix field against two nonnegative
// weights: target = A + B with |A| <= wa/(wa+wb) |target| etc. Exact
// reconstruction everywhere; the first part takes everything where both
// weights vanish.
void proportional_split(const TensorField& target, const TensorField& wa, const TensorField& wb,
                        TensorField& A, TensorField& B) {
  const GridDomain& d = *target.dom;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    double a = wa.at(idx), b = wb.at(idx);
    MatN t = target.mat_at(idx);
    double den = a + b;
    double ca = den > 0 ? a / den : 1.0;
    MatN ta = ca * t;
    A.set_mat(idx, A.mat_at(idx) + ta);
    B.set_mat(idx, B.mat_at(idx) + (t - ta));
  }
}

struct StageResult {
  MatN R;
  TensorField F, G;  // on the parent domain, grad v - R = F + G exactly
  bool g_dominant = false;
};

// Shared tail of the mu in (1,2] step and of the recursion step: given the
// Lipschitz iterate v, pointwise bounds tf/tg with |ez| <= tf + tg for
// z = O^T v - x, run mixed Korn on the inscribed ball and rebuild the
// rotation R = O P.
StageResult korn_stage(const TensorField& v, const TensorField& tf, const TensorField& tg,
                       const ExponentField& p, const ExponentField& q, const MatN& O) {
  const GridDomain& d = *v.dom;
  const int n = d.n;

  TensorField z(v.dom, 1);
  MatN Ot = O.transpose();
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    z.set_vec(idx, Ot.mul(v.vec_at(idx)) - d.point(idx));
  }

  // Split the strain on the ball grid itself so eu = f + g holds there
  // node-exactly before the Poisson stage.
  BallEmbedding emb = inscribed_ball(v.dom);
  TensorField z_ball = restrict_field(emb, z);
  TensorField ez_ball = sym_gradient(z_ball);
  TensorField ff(emb.ball, 2), gg(emb.ball, 2);
  proportional_split(ez_ball, restrict_field(emb, tf), restrict_field(emb, tg), ff, gg);

  MixedSplit ball_split;
  ball_split.f_part = std::move(ff);
  ball_split.g_part = std::move(gg);
  ball_split.p = restrict_exponent(emb, p);
  ball_split.q = restrict_exponent(emb, q);
  MixedKornResult korn = mixed_korn_decompose(z_ball, ball_split);

  MatN P = nearest_rotation(MatN::identity(n) + korn.S).m;
  StageResult out;
  out.R = O.mul(P);
  out.F = TensorField(v.dom, 2);
  out.G = TensorField(v.dom, 2);

  // Inside the half ball use the Korn fields; outside, split grad v - R
  // proportionally so the reconstruction stays exact on the whole domain.
  NodeMask on_ball(d.num_nodes(), 0);
  MatN IS_P = MatN::identity(n) + korn.S - P;
  double nf = luxemburg_norm(tf, p).value;
  double ng = luxemburg_norm(tg, q).value;
  bool residue_to_G = nf <= ng;
  for (int64_t bidx = 0; bidx < emb.ball->num_nodes(); ++bidx) {
    int64_t pidx = emb.to_parent[bidx];
    if (pidx < 0 || !korn.half_mask[bidx] || !d.active[pidx]) continue;
    on_ball[pidx] = 1;
    MatN Fk = korn.F.mat_at(bidx);
    MatN Gk = korn.G.mat_at(bidx);
    if (residue_to_G)
      Gk += IS_P;
    else
      Fk += IS_P;
    out.F.set_mat(pidx, O.mul(Fk));
    out.G.set_mat(pidx, O.mul(Gk));
  }
  TensorField grad_v = gradient(v);
  TensorField rest(v.dom, 2);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx] || on_ball[idx]) continue;
    rest.set_mat(idx, grad_v.mat_at(idx) - out.R);
  }
  TensorField tf_masked(v.dom, 0), tg_masked(v.dom, 0);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx] || on_ball[idx]) continue;
    tf_masked.at(idx) = tf.at(idx);
    tg_masked.at(idx) = tg.at(idx);
  }
  proportional_split(rest, tf_masked, tg_masked, out.F, out.G);
  return out;
}

TensorField abs_minus_shift(const TensorField& grad, const MatN& m) {
  TensorField out(grad.dom, 0);
  for (int64_t idx = 0; idx < grad.dom->num_nodes(); ++idx) {
    if (!grad.dom->active[idx]) continue;
    out.at(idx) = (grad.mat_at(idx) - m).norm();
  }
  return out;
}

// mu in (1,2]: single-exponent rigidity at q = mu p, Taylor correction,
// then the Korn stage.
StageResult bounded_gradient_stage(const TensorField& v, const TensorField& f,
                                   const TensorField& g, const ExponentField& p, double mu) {
  const GridDomain& d = *v.dom;
  ExponentField q = scale_exponent(p, mu);

  MatN O = nearest_rotation(mean_gradient(v)).m;
  double nf = luxemburg_norm(f, p).value;
  double ng = luxemburg_norm(g, q).value;

  StageResult out;
  if (std::pow(nf, 1.0 / mu) <= ng) {
    // g carries the estimate: F = 0, G = grad v - O.
    out.R = O;
    out.F = TensorField(v.dom, 2);
    out.G = TensorField(v.dom, 2);
    TensorField grad_v = gradient(v);
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      out.G.set_mat(idx, grad_v.mat_at(idx) - O);
    }
    out.g_dominant = true;
    return out;
  }

  TensorField grad_v = gradient(v);
  TensorField tf(v.dom, 0), tg(v.dom, 0);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    double dv = (grad_v.mat_at(idx) - O).norm();
    tf.at(idx) = f.at(idx) + dv * dv;  // Taylor remainder bound, C = 1
    tg.at(idx) = g.at(idx);
  }
  return korn_stage(v, tf, tg, p, q, O);
}

// mu in (2,4]: recurse through the doubled exponent, clamp the recursion's
// parts, then the Korn stage with the squared-part Taylor bound.
StageResult recursion_stage(const TensorField& v, const TensorField& f, const TensorField& g,
                            const ExponentField& p, double mu, double clamp_level) {
  const GridDomain& d = *v.dom;
  ExponentField p2 = scale_exponent(p, 2.0);
  ExponentField q = scale_exponent(p, mu);

  StageResult sub = bounded_gradient_stage(v, f, g, p2, mu / 2.0);
  MatN O = sub.R;

  TensorField grad_v = gradient(v);
  TensorField Fh(v.dom, 2), Gh(v.dom, 2);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    MatN dv = grad_v.mat_at(idx) - O;
    MatN fh = sub.F.mat_at(idx);
    MatN gh = sub.G.mat_at(idx);
    bool a = fh.norm() > clamp_level;
    bool b = gh.norm() > clamp_level;
    if (a) {
      fh = dv;
      gh = MatN(d.n);
    } else if (b) {
      gh = dv;
      fh = MatN(d.n);
    }
    Fh.set_mat(idx, fh);
    Gh.set_mat(idx, gh);
  }

  TensorField tf(v.dom, 0), tg(v.dom, 0);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    double fn = Fh.mat_at(idx).norm();
    double gn = Gh.mat_at(idx).norm();
    tf.at(idx) = f.at(idx) + 2.0 * fn * fn;
    tg.at(idx) = g.at(idx) + 2.0 * gn * gn;
  }
  return korn_stage(v, tf, tg, p, q, O);
}

}  // namespace

MixedRigidityResult mixed_rigidity_decompose(const TensorField& u, const MixedSplit& split,
                                             double mu) {
  const GridDomain& d = *u.dom;
  const int n = d.n;
  if (mu < 1.0 || mu > 4.0)
    throw std::invalid_argument("mixed_rigidity_decompose: mu outside the supported range [1,4]");
  if (split.f_part.rank != 0 || split.g_part.rank != 0)
    throw std::invalid_argument("mixed_rigidity_decompose: rank-0 dist-bound split required");
  if (split.p.p_minus <= 1.0)
    throw std::invalid_argument("mixed_rigidity_decompose: requires p^- > 1");

  TensorField grad_u = gradient(u);
  TensorField dist_field = dist_so_field(grad_u);
  double defect = 0;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    defect = std::max(defect,
                      dist_field.at(idx) - split.f_part.at(idx) - split.g_part.at(idx));
  }
  if (defect > 10 * d.h)
    throw std::invalid_argument("mixed_rigidity_decompose: dist bound violated beyond 10h");

  ExponentField q = scale_exponent(split.p, mu);
  MixedRigidityResult res;

  if (mu == 1.0) {
    RigidityReport rep = rigidity_report(u, split.p);
    res.R = rep.rotation_or_skew;
    res.F = shift_matrix_field(grad_u, res.R);
    res.G = TensorField(u.dom, 2);
  } else {
    const double lambda = 2.0 * std::sqrt(double(n));
    LusinResult lus = lusin_truncate(u, lambda);
    double M = lus.grad_inf_ratio * lambda;
    double cl = lus.grad_inf_ratio;  // measured Lusin constant

    TensorField mf = maximal_function(split.f_part, MaximalMode::Local);
    TensorField mg = maximal_function(split.g_part, MaximalMode::Local);
    double clamp_level = M + std::sqrt(double(n));
    TensorField tf(u.dom, 0), tg(u.dom, 0);
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      double a = split.f_part.at(idx) + (2 * cl + 1) * mf.at(idx);
      double b = split.g_part.at(idx) + (2 * cl + 1) * mg.at(idx);
      tf.at(idx) = std::min(a, clamp_level);
      tg.at(idx) = std::min(b, clamp_level);
    }

    StageResult stage;
    if (mu <= 2.0) {
      stage = bounded_gradient_stage(lus.v, tf, tg, split.p, mu);
      res.recursion_levels = 0;
    } else {
      stage = recursion_stage(lus.v, tf, tg, split.p, mu, clamp_level);
      res.recursion_levels = 1;
    }
    res.used_g_dominant_branch = stage.g_dominant;

    // Back from v to u: split grad u - grad v proportionally by the
    // enlarged bounds, then land on the canonical rotation.
    TensorField grad_v = gradient(lus.v);
    TensorField delta(u.dom, 2);
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      delta.set_mat(idx, grad_u.mat_at(idx) - grad_v.mat_at(idx));
    }
    res.F = stage.F;
    res.G = stage.G;
    proportional_split(delta, tf, tg, res.F, res.G);
    res.R = stage.R;
  }

  // Finalize the rotation as the polar factor of the mean gradient; the
  // constant difference lands on the side with the larger bound.
  MatN Rhat = nearest_rotation(mean_gradient(u)).m;
  if ((Rhat - res.R).norm() > 0) {
    MatN diff = res.R - Rhat;
    double nf = luxemburg_norm(split.f_part, split.p).value;
    double ng = luxemburg_norm(split.g_part, q).value;
    TensorField& target = nf <= ng ? res.G : res.F;
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      target.set_mat(idx, target.mat_at(idx) + diff);
    }
    res.R = Rhat;
  }

  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    MatN resid = grad_u.mat_at(idx) - res.R - res.F.mat_at(idx) - res.G.mat_at(idx);
    res.residual_inf = std::max(res.residual_inf, resid.norm());
  }
  res.failure = res.residual_inf > 100 * d.h;

  double nf = luxemburg_norm(split.f_part, split.p).value;
  double ng = luxemburg_norm(split.g_part, q).value;
  double nF = luxemburg_norm(res.F, split.p).value;
  double nG = luxemburg_norm(res.G, q).value;
  res.ratio_F = nf > kZeroTol ? nF / nf : (nF <= kZeroTol ? 0 : std::numeric_limits<double>::infinity());
  res.ratio_G = ng > kZeroTol ? nG / ng : (nG <= kZeroTol ? 0 : std::numeric_limits<double>::infinity());
  return res;
}

NitscheResult nitsche_extend(const TensorField& u, const TensorField& f, const TensorField& g,
                             const ExponentField& p, const ExponentField& q, double slope,
                             double R) {
  const GridDomain& d = *u.dom;
  if (d.shape.kind != ShapeKind::GraphHalfspace || d.n != 2)
    throw std::invalid_argument("nitsche_extend: 2D graph-halfspace domain required");
  if (std::abs(d.shape.slope[0] - slope) > 1e-12 || std::abs(d.shape.intercept) > 1e-12)
    throw std::invalid_argument("nitsche_extend: domain graph must be x2 = slope*x1 through 0");

  const double L = std::abs(slope);
  const double c1 = 2.0;
  const double h = d.h;
  double r = 0.9 * R / (2.0 * c1 * (1.0 + L));
  int k = int(std::floor(r / h));
  if (k < 4) throw std::invalid_argument("nitsche_extend: grid too coarse for the safe radius");
  double r_grid = k * h;

  NitscheResult res;
  res.r = r_grid;
  auto out_dom = make_rectangle(VecN(-r_grid, -r_grid), VecN(r_grid, r_grid), 2 * k + 1);
  res.out_dom = out_dom;

  auto [lam, wgt] = gauss_legendre_on(17, 1.0, 2.0);
  auto psi = [](double l) { return 28.0 - 18.0 * l; };
  for (int i = 0; i < 17; ++i) {
    res.moment0 += wgt[i] * psi(lam[i]);
    res.moment1 += wgt[i] * lam[i] * psi(lam[i]);
  }

  VecN grad_delta(-2.0 * slope, 2.0);
  VecN en(0.0, 1.0);

  TensorField u_ext(out_dom, 1), f_ext(out_dom, 2), g_ext(out_dom, 2);
  ExponentField p_ext, q_ext;
  p_ext.dom = out_dom;
  q_ext.dom = out_dom;
  p_ext.values.assign(size_t(out_dom->num_nodes()), 0.0);
  q_ext.values.assign(size_t(out_dom->num_nodes()), 0.0);

  auto parent_index = [&](const VecN& x) {
    int i = int(std::llround((x[0] - d.origin[0]) / h));
    int j = int(std::llround((x[1] - d.origin[1]) / h));
    return d.index(i, j);
  };

  auto extend_matrix = [&](const TensorField& src, const VecN& x, double delta) {
    MatN acc(2);
    for (int i = 0; i < 17; ++i) {
      VecN t(x[0], x[1] - lam[i] * delta);
      MatN m(2);
      for (int c = 0; c < 4; ++c) m.a[(c / 2) * 3 + (c % 2)] = interp_component(src, t, c);
      VecN me = m.mul(en);  // n-th column
      double w0 = wgt[i] * psi(lam[i]);
      double w1 = wgt[i] * lam[i] * psi(lam[i]);
      double w2 = wgt[i] * lam[i] * lam[i] * psi(lam[i]);
      acc += w0 * m;
      acc -= w1 * (outer(me, grad_delta) + outer(grad_delta, me));
      acc += (w2 * m(1, 1)) * outer(grad_delta, grad_delta);
    }
    return acc;
  };

  NodeMask above(out_dom->num_nodes(), 0);
  for (int64_t idx = 0; idx < out_dom->num_nodes(); ++idx) {
    VecN x = out_dom->point(idx);
    double phi = slope * x[0];
    if (x[1] <= phi + 1e-14) {
      int64_t pidx = parent_index(x);
      for (int c = 0; c < 2; ++c) u_ext.at(idx, c) = u.at(pidx, c);
      for (int c = 0; c < 4; ++c) {
        f_ext.at(idx, c) = f.at(pidx, c);
        g_ext.at(idx, c) = g.at(pidx, c);
      }
      p_ext.values[idx] = p.values[pidx];
      q_ext.values[idx] = q.values[pidx];
      continue;
    }
    above[idx] = 1;
    double delta = 2.0 * (x[1] - phi);
    double pmin = std::numeric_limits<double>::infinity();
    double qmin = pmin;
    VecN uacc(2);
    for (int i = 0; i < 17; ++i) {
      VecN t(x[0], x[1] - lam[i] * delta);
      if (t[0] < d.origin[0] - 1e-12 || t[1] < d.origin[1] - 1e-12 ||
          t[1] > slope * t[0] + 1e-12)
        throw std::invalid_argument("nitsche_extend: quadrature target left the sampled region");
      VecN ut(interp_component(u, t, 0), interp_component(u, t, 1));
      double w0 = wgt[i] * psi(lam[i]);
      uacc += w0 * (ut - (lam[i] * ut[1]) * grad_delta);
      pmin = std::min(pmin, interp_exponent(p, t));
      qmin = std::min(qmin, interp_exponent(q, t));
    }
    u_ext.set_vec(idx, uacc);
    f_ext.set_mat(idx, extend_matrix(f, x, delta));
    g_ext.set_mat(idx, extend_matrix(g, x, delta));
    p_ext.values[idx] = pmin;
    q_ext.values[idx] = qmin;
  }

  {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : p_ext.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    p_ext.p_minus = lo;
    p_ext.p_plus = hi;
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (double v : q_ext.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    q_ext.p_minus = lo;
    q_ext.p_plus = hi;
  }

  TensorField eu_ext = sym_gradient(u_ext);
  double band = 2.0 * h * std::sqrt(1.0 + slope * slope);
  for (int64_t idx = 0; idx < out_dom->num_nodes(); ++idx) {
    if (!out_dom->active[idx]) continue;
    VecN x = out_dom->point(idx);
    MatN resid = eu_ext.mat_at(idx) - f_ext.mat_at(idx) - g_ext.mat_at(idx);
    double rn = resid.norm();
    res.residual_inf = std::max(res.residual_inf, rn);
    double line_dist = std::abs(x[1] - slope * x[0]) / std::sqrt(1.0 + slope * slope);
    if (line_dist >= band) res.residual_inf_interior = std::max(res.residual_inf_interior, rn);
  }

  res.modular_f_outside = modular(f_ext, p_ext, &above);
  res.u_ext = std::move(u_ext);
  res.f_ext = std::move(f_ext);
  res.g_ext = std::move(g_ext);
  res.p_ext = std::move(p_ext);
  res.q_ext = std::move(q_ext);
  return res;
}

}  // namespace varexp
