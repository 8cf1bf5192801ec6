#include "varexp/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace varexp {

namespace {

void finalize(ExponentField& p) {
  const GridDomain& d = *p.dom;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double global_lo = lo;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    global_lo = std::min(global_lo, p.values[idx]);
    if (!d.active[idx]) continue;
    lo = std::min(lo, p.values[idx]);
    hi = std::max(hi, p.values[idx]);
  }
  if (global_lo < 1.0)
    throw std::invalid_argument("exponent field: values below 1 (got " +
                                std::to_string(global_lo) + ")");
  p.p_minus = lo;
  p.p_plus = hi;
}

}  // namespace

ExponentField build_exponent_from(const DomainPtr& dom,
                                  const std::function<double(const VecN&)>& f) {
  ExponentField p;
  p.dom = dom;
  p.values.resize(size_t(dom->num_nodes()));
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) p.values[idx] = f(dom->point(idx));
  finalize(p);
  return p;
}

ExponentField build_constant(const DomainPtr& dom, double pval) {
  return build_exponent_from(dom, [pval](const VecN&) { return pval; });
}

ExponentField build_linear_ramp(const DomainPtr& dom, double p0, double p1, int axis) {
  double lo = dom->shape.bbox.lo[axis], hi = dom->shape.bbox.hi[axis];
  return build_exponent_from(dom, [=](const VecN& x) {
    double t = (x[axis] - lo) / (hi - lo);
    return p0 + (p1 - p0) * t;
  });
}

ExponentField build_smooth_bump(const DomainPtr& dom, double base, double amp,
                                const VecN& center, double width) {
  return build_exponent_from(dom, [=](const VecN& x) {
    double r2 = (x - center).dot(x - center);
    return base + amp * std::exp(-r2 / (width * width));
  });
}

ExponentField build_checkerboard(const DomainPtr& dom, double pa, double pb, int tiles) {
  const Box& bb = dom->shape.bbox;
  int n = dom->n;
  return build_exponent_from(dom, [=](const VecN& x) {
    int parity = 0;
    for (int a = 0; a < n; ++a) {
      double t = (x[a] - bb.lo[a]) / (bb.hi[a] - bb.lo[a]);
      int cellidx = std::min(int(t * tiles), tiles - 1);
      parity += cellidx;
    }
    return parity % 2 == 0 ? pa : pb;
  });
}

double log_holder_constant(const ExponentField& p) {
  const GridDomain& d = *p.dom;
  std::vector<int64_t> nodes;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx)
    if (d.inside[idx]) nodes.push_back(idx);
  if (nodes.size() < 2)
    throw std::invalid_argument("log_holder_constant: need at least 2 interior nodes");
  double best = 0;
  const double e = 2.718281828459045235360287;
  for (size_t a = 0; a < nodes.size(); ++a) {
    VecN xa = d.point(nodes[a]);
    double pa = p.values[nodes[a]];
    for (size_t b = a + 1; b < nodes.size(); ++b) {
      double dp = std::abs(pa - p.values[nodes[b]]);
      if (dp == 0) continue;
      double r = (xa - d.point(nodes[b])).norm();
      best = std::max(best, dp * std::log(e + 1.0 / r));
    }
  }
  return best;
}

ExponentField dual_exponent(const ExponentField& p) {
  double global_lo = *std::min_element(p.values.begin(), p.values.end());
  if (global_lo <= 1.0)
    throw std::invalid_argument("dual_exponent: requires p > 1 everywhere");
  ExponentField q;
  q.dom = p.dom;
  q.values.resize(p.values.size());
  for (size_t i = 0; i < p.values.size(); ++i) q.values[i] = p.values[i] / (p.values[i] - 1.0);
  finalize(q);
  return q;
}

double interp_exponent(const ExponentField& p, const VecN& x) {
  const GridDomain& d = *p.dom;
  std::array<int, 3> i0{0, 0, 0};
  std::array<double, 3> t{0, 0, 0};
  for (int a = 0; a < d.n; ++a) {
    double s = (x[a] - d.origin[a]) / d.h;
    int i = int(std::floor(s));
    i = std::clamp(i, 0, d.dims[a] - 2);
    i0[a] = i;
    t[a] = std::clamp(s - i, 0.0, 1.0);
  }
  double acc = 0;
  int corners = 1 << d.n;
  for (int cc = 0; cc < corners; ++cc) {
    double w = 1;
    std::array<int, 3> ii = i0;
    for (int a = 0; a < d.n; ++a) {
      if ((cc >> a) & 1) {
        w *= t[a];
        ii[a] += 1;
      } else {
        w *= 1 - t[a];
      }
    }
    acc += w * p.values[d.index(ii[0], ii[1], ii[2])];
  }
  return acc;
}

ExponentField rescale_exponent(const ExponentField& p, const VecN& x0, double lambda,
                               const DomainPtr& target) {
  if (lambda <= 0) throw std::invalid_argument("rescale_exponent: lambda must be positive");
  const Box& src = p.dom->shape.bbox;
  const double tol = 1e-9 * p.dom->h;
  ExponentField q;
  q.dom = target;
  q.values.resize(size_t(target->num_nodes()));
  for (int64_t idx = 0; idx < target->num_nodes(); ++idx) {
    VecN y = x0 + lambda * target->point(idx);
    for (int a = 0; a < p.dom->n; ++a) {
      if (y[a] < src.lo[a] - tol || y[a] > src.hi[a] + tol)
        throw std::invalid_argument("rescale_exponent: image leaves the exponent's domain");
    }
    q.values[idx] = interp_exponent(p, y);
  }
  finalize(q);
  return q;
}

double cube_oscillation_check(const ExponentField& p, const std::vector<WhitneyCube>& cubes) {
  const GridDomain& d = *p.dom;
  double worst = 0;
  for (const auto& q : cubes) {
    Box b = q.box();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    // Scan the node range covered by the cube.
    std::array<int, 3> ilo{0, 0, 0}, ihi{0, 0, 0};
    bool empty = false;
    for (int a = 0; a < d.n; ++a) {
      ilo[a] = std::max(0, int(std::ceil((b.lo[a] - d.origin[a]) / d.h - 1e-12)));
      ihi[a] = std::min(d.dims[a] - 1, int(std::floor((b.hi[a] - d.origin[a]) / d.h + 1e-12)));
      if (ilo[a] > ihi[a]) empty = true;
    }
    int found = 0;
    if (!empty) {
      for (int k = (d.n == 3 ? ilo[2] : 0); k <= (d.n == 3 ? ihi[2] : 0); ++k)
        for (int j = ilo[1]; j <= ihi[1]; ++j)
          for (int i = ilo[0]; i <= ihi[0]; ++i) {
            int64_t idx = d.index(i, j, k);
            if (!d.active[idx]) continue;
            lo = std::min(lo, p.values[idx]);
            hi = std::max(hi, p.values[idx]);
            ++found;
          }
    }
    if (found == 0) continue;  // cube below grid resolution: zero oscillation
    double vol = std::pow(q.side, d.n);
    worst = std::max(worst, std::pow(vol, lo - hi));
  }
  return std::max(worst, 1.0);
}

}  // namespace varexp
