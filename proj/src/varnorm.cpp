#include "varexp/varnorm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "varexp/rotgeo.hpp"

namespace varexp {

namespace {

void check_same_domain(const TensorField& f, const ExponentField& p) {
  if (f.dom.get() != p.dom.get())
    throw std::invalid_argument("field and exponent live on different domains");
}

}  // namespace

double modular(const TensorField& f, const ExponentField& p, const NodeMask* mask) {
  check_same_domain(f, p);
  const GridDomain& d = *f.dom;
  double acc = 0;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx] || (mask && !(*mask)[idx])) continue;
    double a = f.abs_at(idx);
    if (a == 0) continue;
    acc += d.weight[idx] * std::pow(a, p.at(idx));
  }
  return acc;
}

NormResult luxemburg_norm(const TensorField& f, const ExponentField& p, const NodeMask* mask) {
  check_same_domain(f, p);
  const GridDomain& d = *f.dom;

  // Flatten once; the bisection then only pays for exp().
  std::vector<double> w, la, pe;
  double fmax = 0, meas = 0;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx] || (mask && !(*mask)[idx])) continue;
    meas += d.weight[idx];
    double a = f.abs_at(idx);
    if (!std::isfinite(a)) throw std::invalid_argument("luxemburg_norm: non-finite sample");
    if (a == 0 || d.weight[idx] == 0) continue;
    fmax = std::max(fmax, a);
    w.push_back(d.weight[idx]);
    la.push_back(std::log(a));
    pe.push_back(p.at(idx));
  }
  NormResult res;
  if (fmax == 0) return res;  // zero field

  auto rho = [&](double lambda) {
    double ll = std::log(lambda);
    double acc = 0;
    for (size_t i = 0; i < w.size(); ++i) acc += w[i] * std::exp(pe[i] * (la[i] - ll));
    return acc;
  };

  double pminus = p.p_minus;
  double lo = 0.5 * fmax * std::pow(std::min(meas, 1.0), 1.0 / pminus);
  double hi = 2.0 * fmax * std::pow(std::max(meas, 1.0), 1.0 / pminus);
  int guard = 0;
  while (rho(lo) < 1.0 && guard++ < 200) lo *= 0.5;
  guard = 0;
  while (rho(hi) > 1.0 && guard++ < 200) hi *= 2.0;
  res.bracket_lo = lo;
  res.bracket_hi = hi;

  double mid = 0.5 * (lo + hi), rm = 0;
  int it = 0;
  for (; it < 300; ++it) {
    mid = 0.5 * (lo + hi);
    rm = rho(mid);
    if (std::abs(rm - 1.0) <= 1e-10) break;
    if (rm > 1.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * hi) break;
  }
  res.value = mid;
  res.modular_at_value = rm;
  res.iterations = it;
  return res;
}

std::pair<double, double> holder_product_check(const TensorField& f, const TensorField& g,
                                               const ExponentField& p, const ExponentField& q,
                                               const ExponentField& s) {
  const GridDomain& d = *f.dom;
  if (f.rank != g.rank && f.rank != 0 && g.rank != 0)
    throw std::invalid_argument("holder_product_check: incompatible ranks");
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    double defect = std::abs(1.0 / p.at(idx) + 1.0 / q.at(idx) - 1.0 / s.at(idx));
    if (defect > 1e-9)
      throw std::invalid_argument("holder_product_check: 1/p + 1/q != 1/s at a node");
  }
  TensorField prod(f.dom, 0);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    if (f.rank == g.rank) {
      double acc = 0;
      for (int c = 0; c < f.comps; ++c) acc += f.at(idx, c) * g.at(idx, c);
      prod.at(idx) = acc;
    } else {
      const TensorField& scal = f.rank == 0 ? f : g;
      const TensorField& tens = f.rank == 0 ? g : f;
      prod.at(idx) = scal.at(idx) * tens.abs_at(idx);
    }
  }
  double lhs = luxemburg_norm(prod, s).value;
  double rhs = 2.0 * luxemburg_norm(f, p).value * luxemburg_norm(g, q).value;
  return {lhs, rhs};
}

TensorField maximal_function(const TensorField& f, MaximalMode mode) {
  const GridDomain& d = *f.dom;
  if (f.rank != 0) throw std::invalid_argument("maximal_function: rank-0 field required");

  // Dyadic radii in units of h, up to one radius covering the diameter.
  std::vector<int> radii;
  for (int r = 1;; r *= 2) {
    radii.push_back(r);
    if (r * d.h >= d.diameter) break;
  }
  // Offset lists per radius (Euclidean balls on the lattice).
  struct Off {
    int di, dj, dk;
  };
  std::vector<std::vector<Off>> offsets(radii.size());
  for (size_t k = 0; k < radii.size(); ++k) {
    int r = radii[k];
    for (int dk = (d.n == 3 ? -r : 0); dk <= (d.n == 3 ? r : 0); ++dk)
      for (int dj = -r; dj <= r; ++dj)
        for (int di = -r; di <= r; ++di)
          if (di * di + dj * dj + dk * dk <= r * r) offsets[k].push_back({di, dj, dk});
  }

  TensorField out(f.dom, 0);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    int i0, j0, k0;
    d.coords(idx, i0, j0, k0);
    double best = 0;
    for (size_t k = 0; k < radii.size(); ++k) {
      double num = 0, den = 0;
      for (const auto& o : offsets[k]) {
        int i = i0 + o.di, j = j0 + o.dj, kk = k0 + o.dk;
        bool in = i >= 0 && i < d.dims[0] && j >= 0 && j < d.dims[1] &&
                  (d.n == 2 || (kk >= 0 && kk < d.dims[2]));
        if (mode == MaximalMode::Global) {
          den += 1.0;
          if (in) {
            int64_t nb = d.index(i, j, d.n == 3 ? kk : 0);
            if (d.active[nb]) num += std::abs(f.at(nb));
          }
        } else {
          if (!in) continue;
          int64_t nb = d.index(i, j, d.n == 3 ? kk : 0);
          if (!d.active[nb]) continue;
          num += d.weight[nb] * std::abs(f.at(nb));
          den += d.weight[nb];
        }
      }
      if (den > 0) best = std::max(best, num / den);
    }
    out.at(idx) = best;
  }
  return out;
}

LocalizationResult localization_check(const TensorField& f, const ExponentField& p,
                                      const std::vector<WhitneyCube>& cubes) {
  const GridDomain& d = *f.dom;
  NodeMask covered(d.num_nodes(), 0);
  TensorField middle_field(f.dom, 0);

  for (const auto& q : cubes) {
    NodeMask cube_mask(d.num_nodes(), 0);
    Box b = q.box();
    std::array<int, 3> ilo{0, 0, 0}, ihi{0, 0, 0};
    bool empty = false;
    for (int a = 0; a < d.n; ++a) {
      ilo[a] = std::max(0, int(std::ceil((b.lo[a] - d.origin[a]) / d.h - 1e-12)));
      ihi[a] = std::min(d.dims[a] - 1, int(std::floor((b.hi[a] - d.origin[a]) / d.h + 1e-12)));
      if (ilo[a] > ihi[a]) empty = true;
    }
    if (empty) continue;
    int64_t count = 0;
    for (int k = (d.n == 3 ? ilo[2] : 0); k <= (d.n == 3 ? ihi[2] : 0); ++k)
      for (int j = ilo[1]; j <= ihi[1]; ++j)
        for (int i = ilo[0]; i <= ihi[0]; ++i) {
          int64_t idx = d.index(i, j, k);
          if (!d.active[idx]) continue;
          if (!q.contains_halfopen(d.point(idx))) continue;
          cube_mask[idx] = 1;
          ++count;
        }
    if (count == 0) continue;
    double nf = luxemburg_norm(f, p, &cube_mask).value;
    TensorField one(f.dom, 0);
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) one.at(idx) = 1.0;
    double n1 = luxemburg_norm(one, p, &cube_mask).value;
    if (n1 == 0) continue;
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (cube_mask[idx]) {
        middle_field.at(idx) = nf / n1;
        covered[idx] = 1;
      }
    }
  }

  LocalizationResult res;
  res.norm_sum = luxemburg_norm(f, p, &covered).value;
  res.middle = luxemburg_norm(middle_field, p).value;
  res.ratio_up = res.norm_sum > 0 ? res.middle / res.norm_sum : 0;
  res.ratio_down = res.middle > 0 ? res.norm_sum / res.middle : 0;
  return res;
}

std::vector<std::pair<double, double>> equi_integrability_profile(
    const TensorField& f, const ExponentField& p, const std::vector<double>& thresholds) {
  check_same_domain(f, p);
  for (size_t i = 1; i < thresholds.size(); ++i)
    if (thresholds[i] <= thresholds[i - 1])
      throw std::invalid_argument("equi_integrability_profile: thresholds must increase");
  const GridDomain& d = *f.dom;
  std::vector<std::pair<double, double>> out;
  for (double m : thresholds) {
    double acc = 0;
    for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
      if (!d.active[idx]) continue;
      double a = f.abs_at(idx);
      if (a > m) acc += d.weight[idx] * std::pow(a, p.at(idx));
    }
    out.push_back({m, acc});
  }
  return out;
}

double g_modular(const TensorField& f, const ExponentField& p) {
  check_same_domain(f, p);
  const GridDomain& d = *f.dom;
  double acc = 0;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    acc += d.weight[idx] * g_eval(p.at(idx), f.abs_at(idx));
  }
  return acc;
}

}  // namespace varexp
