#include "varexp/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>

namespace varexp {

namespace {
constexpr double kOnBoundaryTol = 1e-12;

uint64_t next_domain_serial() {
  static std::atomic<uint64_t> counter{1};
  return counter.fetch_add(1);
}
}

bool ShapeSpec::inside(const VecN& p) const {
  switch (kind) {
    case ShapeKind::Rectangle: {
      for (int i = 0; i < n; ++i)
        if (!(p[i] > bbox.lo[i] && p[i] < bbox.hi[i])) return false;
      return true;
    }
    case ShapeKind::LShape: {
      for (int i = 0; i < n; ++i)
        if (!(p[i] > bbox.lo[i] && p[i] < bbox.hi[i])) return false;
      bool in_cut = true;
      for (int i = 0; i < n; ++i)
        if (!(p[i] >= cut.lo[i] && p[i] <= cut.hi[i])) in_cut = false;
      return !in_cut;
    }
    case ShapeKind::Disk:
      return (p - center).norm() < radius;
    case ShapeKind::GraphHalfspace: {
      for (int i = 0; i < n; ++i)
        if (!(p[i] > bbox.lo[i] && p[i] < bbox.hi[i])) return false;
      double phi = intercept;
      for (int i = 0; i < n - 1; ++i) phi += slope[i] * p[i];
      return p[n - 1] < phi;
    }
  }
  return false;
}

double ShapeSpec::boundary_distance(const VecN& p) const {
  if (kind == ShapeKind::Disk) return std::abs((p - center).norm() - radius);
  double d = std::numeric_limits<double>::infinity();
  for (const auto& patch : patches) d = std::min(d, dist_point_patch(p, patch));
  return d;
}

double ShapeSpec::boundary_distance(const Box& b) const {
  if (kind == ShapeKind::Disk) {
    double dmin = dist_point_box(center, b);
    double dmax = 0;
    int corners = 1 << n;
    for (int c = 0; c < corners; ++c) {
      VecN q(n);
      for (int i = 0; i < n; ++i) q[i] = (c >> i) & 1 ? b.hi[i] : b.lo[i];
      dmax = std::max(dmax, (q - center).norm());
    }
    if (radius < dmin) return dmin - radius;
    if (radius > dmax) return radius - dmax;
    return 0.0;
  }
  double d = std::numeric_limits<double>::infinity();
  for (const auto& patch : patches) d = std::min(d, dist_box_patch(b, patch));
  return d;
}

bool ShapeSpec::box_intersects(const Box& b) const {
  switch (kind) {
    case ShapeKind::Rectangle:
      return box_overlap_volume(b, bbox) > 0;
    case ShapeKind::LShape:
      return box_overlap_volume(b, bbox) - box_overlap_volume(b, cut) > 0;
    case ShapeKind::Disk:
      return dist_point_box(center, b) < radius;
    case ShapeKind::GraphHalfspace: {
      if (box_overlap_volume(b, bbox) <= 0) return false;
      Box c(b);
      for (int i = 0; i < n; ++i) {
        c.lo[i] = std::max(b.lo[i], bbox.lo[i]);
        c.hi[i] = std::min(b.hi[i], bbox.hi[i]);
      }
      // phi - x_n is affine, so its max over the clipped box is at a corner.
      double best = -std::numeric_limits<double>::infinity();
      int corners = 1 << n;
      for (int cc = 0; cc < corners; ++cc) {
        VecN q(n);
        for (int i = 0; i < n; ++i) q[i] = (cc >> i) & 1 ? c.hi[i] : c.lo[i];
        double phi = intercept;
        for (int i = 0; i < n - 1; ++i) phi += slope[i] * q[i];
        best = std::max(best, phi - q[n - 1]);
      }
      return best > 0;
    }
  }
  return false;
}

double ShapeSpec::cell_volume(const Box& cell) const {
  switch (kind) {
    case ShapeKind::Rectangle:
      return box_overlap_volume(cell, bbox);
    case ShapeKind::LShape:
      return box_overlap_volume(cell, bbox) - box_overlap_volume(cell, cut);
    case ShapeKind::Disk: {
      double dmin = dist_point_box(center, cell);
      if (dmin >= radius) return 0.0;
      double dmax = 0;
      int corners = 1 << n;
      for (int c = 0; c < corners; ++c) {
        VecN q(n);
        for (int i = 0; i < n; ++i) q[i] = (c >> i) & 1 ? cell.hi[i] : cell.lo[i];
        dmax = std::max(dmax, (q - center).norm());
      }
      if (dmax <= radius) return cell.volume();
      // Straddling cell: deterministic midpoint subsampling, O(h) overall.
      const int s = n == 2 ? 16 : 8;
      int64_t count = 0, total = 1;
      for (int i = 0; i < n; ++i) total *= s;
      for (int64_t t = 0; t < total; ++t) {
        int64_t r = t;
        VecN q(n);
        for (int i = 0; i < n; ++i) {
          int idx = int(r % s);
          r /= s;
          q[i] = cell.lo[i] + (idx + 0.5) / s * (cell.hi[i] - cell.lo[i]);
        }
        if ((q - center).norm() < radius) ++count;
      }
      return cell.volume() * double(count) / double(total);
    }
    case ShapeKind::GraphHalfspace: {
      Box c(cell);
      for (int i = 0; i < n; ++i) {
        c.lo[i] = std::max(cell.lo[i], bbox.lo[i]);
        c.hi[i] = std::min(cell.hi[i], bbox.hi[i]);
        if (c.hi[i] <= c.lo[i]) return 0.0;
      }
      return area_below_line(c, slope[0], intercept);
    }
  }
  return 0;
}

namespace {

void add_box_patches(ShapeSpec& s, const Box& b) {
  int n = s.n;
  if (n == 2) {
    VecN c00(b.lo[0], b.lo[1]), c10(b.hi[0], b.lo[1]);
    VecN c01(b.lo[0], b.hi[1]), c11(b.hi[0], b.hi[1]);
    for (auto [a, bb] : {std::pair{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}}) {
      BoundaryPatch p;
      p.n = 2;
      p.a = a;
      p.b = bb;
      s.patches.push_back(p);
    }
  } else {
    for (int axis = 0; axis < 3; ++axis)
      for (double val : {b.lo[axis], b.hi[axis]}) {
        BoundaryPatch p;
        p.n = 3;
        p.is_rect = true;
        p.a = b.lo;
        p.b = b.hi;
        p.a[axis] = p.b[axis] = val;
        s.patches.push_back(p);
      }
  }
}

DomainPtr finish_domain(ShapeSpec shape, int resolution) {
  if (resolution < 8) throw std::invalid_argument("make_domain: resolution must be >= 8");
  auto dptr = std::make_shared<GridDomain>();
  GridDomain& d = *dptr;
  d.serial = next_domain_serial();
  d.n = shape.n;
  d.shape = std::move(shape);
  const Box& bb = d.shape.bbox;
  double ext0 = bb.hi[0] - bb.lo[0];
  d.h = ext0 / (resolution - 1);
  d.origin = bb.lo;
  d.dims = {resolution, 1, 1};
  for (int a = 1; a < d.n; ++a) {
    double ext = bb.hi[a] - bb.lo[a];
    d.dims[a] = int(std::llround(ext / d.h)) + 1;
    if (std::abs((d.dims[a] - 1) * d.h - ext) > 1e-9 * ext)
      throw std::invalid_argument("make_domain: bounding box not commensurate with spacing");
  }
  int64_t nn = d.num_nodes();
  d.inside.assign(nn, 0);
  d.active.assign(nn, 0);
  d.dirichlet.assign(nn, 0);
  d.bdist.assign(nn, 0.0);
  d.weight.assign(nn, 0.0);

  double diag = 0;
  for (int a = 0; a < d.n; ++a) diag += (bb.hi[a] - bb.lo[a]) * (bb.hi[a] - bb.lo[a]);
  d.diameter = std::sqrt(diag);

  for (int64_t idx = 0; idx < nn; ++idx) {
    VecN p = d.point(idx);
    double bd = d.shape.boundary_distance(p);
    d.bdist[idx] = bd;
    bool ins = d.shape.inside(p) && bd > kOnBoundaryTol;
    bool on_boundary = bd <= kOnBoundaryTol;
    d.inside[idx] = ins;
    d.active[idx] = ins || on_boundary;
    d.dirichlet[idx] = on_boundary;  // default: the whole boundary
    if (d.active[idx]) {
      VecN half(d.n);
      for (int a = 0; a < d.n; ++a) half[a] = d.h / 2;
      d.weight[idx] = d.shape.cell_volume(Box(p - half, p + half));
      ++d.active_count;
      if (ins) ++d.inside_count;
    }
  }
  // Demote active nodes that have no active neighbor along some axis: they
  // cannot carry a difference stencil (circle tips and similar slivers).
  {
    std::array<int64_t, 3> stride = {1, d.dims[0], int64_t(d.dims[0]) * d.dims[1]};
    bool again = true;
    while (again) {
      again = false;
      for (int64_t idx = 0; idx < nn; ++idx) {
        if (!d.active[idx]) continue;
        int i, j, k;
        d.coords(idx, i, j, k);
        std::array<int, 3> c = {i, j, k};
        for (int a = 0; a < d.n; ++a) {
          bool ok = false;
          for (int s : {-1, 1}) {
            if (c[a] + s < 0 || c[a] + s >= d.dims[a]) continue;
            if (d.active[idx + s * stride[a]]) ok = true;
          }
          if (!ok) {
            if (d.inside[idx]) --d.inside_count;
            --d.active_count;
            d.active[idx] = 0;
            d.inside[idx] = 0;
            d.dirichlet[idx] = 0;
            d.weight[idx] = 0;
            again = true;
            break;
          }
        }
      }
    }
  }

  for (int64_t idx = 0; idx < nn; ++idx) d.measure += d.weight[idx];
  if (d.inside_count == 0) throw std::invalid_argument("make_domain: empty interior");

  // Interior connectivity (axis adjacency).
  {
    std::vector<uint8_t> seen(nn, 0);
    std::deque<int64_t> q;
    for (int64_t idx = 0; idx < nn; ++idx)
      if (d.inside[idx]) {
        q.push_back(idx);
        seen[idx] = 1;
        break;
      }
    int64_t reached = 0;
    std::array<int64_t, 3> stride = {1, d.dims[0], int64_t(d.dims[0]) * d.dims[1]};
    while (!q.empty()) {
      int64_t idx = q.front();
      q.pop_front();
      ++reached;
      int i, j, k;
      d.coords(idx, i, j, k);
      std::array<int, 3> c = {i, j, k};
      for (int a = 0; a < d.n; ++a)
        for (int s : {-1, 1}) {
          if (c[a] + s < 0 || c[a] + s >= d.dims[a]) continue;
          int64_t nb = idx + s * stride[a];
          if (d.inside[nb] && !seen[nb]) {
            seen[nb] = 1;
            q.push_back(nb);
          }
        }
    }
    if (reached != d.inside_count)
      throw std::invalid_argument("make_domain: interior nodes are not connected");
  }

  // Difference stencils.
  d.stencils.assign(size_t(nn) * d.n, GridDomain::Stencil{});
  std::array<int64_t, 3> stride = {1, d.dims[0], int64_t(d.dims[0]) * d.dims[1]};
  for (int64_t idx = 0; idx < nn; ++idx) {
    if (!d.active[idx]) continue;
    int i, j, k;
    d.coords(idx, i, j, k);
    std::array<int, 3> c = {i, j, k};
    for (int a = 0; a < d.n; ++a) {
      auto ok = [&](int s) {
        if (c[a] + s < 0 || c[a] + s >= d.dims[a]) return false;
        return d.active[idx + s * stride[a]] != 0;
      };
      GridDomain::Stencil st;
      double inv = 1.0 / d.h;
      if (ok(1) && ok(-1)) {
        st.m = 2;
        st.off = {int32_t(stride[a]), int32_t(-stride[a]), 0, 0};
        st.coef = {0.5 * inv, -0.5 * inv, 0, 0};
      } else if (ok(1)) {
        if (ok(2)) {
          st.m = 3;
          st.off = {0, int32_t(stride[a]), int32_t(2 * stride[a]), 0};
          st.coef = {-1.5 * inv, 2.0 * inv, -0.5 * inv, 0};
        } else {
          st.m = 2;
          st.off = {0, int32_t(stride[a]), 0, 0};
          st.coef = {-inv, inv, 0, 0};
        }
      } else if (ok(-1)) {
        if (ok(-2)) {
          st.m = 3;
          st.off = {0, int32_t(-stride[a]), int32_t(-2 * stride[a]), 0};
          st.coef = {1.5 * inv, -2.0 * inv, 0.5 * inv, 0};
        } else {
          st.m = 2;
          st.off = {0, int32_t(-stride[a]), 0, 0};
          st.coef = {inv, -inv, 0, 0};
        }
      }
      d.stencils[idx * d.n + a] = st;
    }
  }
  return dptr;
}

}  // namespace

DomainPtr make_rectangle(const VecN& lo, const VecN& hi, int resolution) {
  ShapeSpec s;
  s.kind = ShapeKind::Rectangle;
  s.n = lo.n;
  s.bbox = Box(lo, hi);
  add_box_patches(s, s.bbox);
  return finish_domain(std::move(s), resolution);
}

DomainPtr make_lshape(int resolution, int dim) {
  ShapeSpec s;
  s.kind = ShapeKind::LShape;
  s.n = dim;
  if (dim == 2) {
    s.bbox = Box(VecN(0.0, 0.0), VecN(1.0, 1.0));
    s.cut = Box(VecN(0.5, 0.5), VecN(1.0, 1.0));
  } else {
    s.bbox = Box(VecN(0.0, 0.0, 0.0), VecN(1.0, 1.0, 1.0));
    s.cut = Box(VecN(0.5, 0.5, 0.0), VecN(1.0, 1.0, 1.0));
  }
  add_box_patches(s, s.bbox);
  if (dim == 2) {
    BoundaryPatch p1, p2;
    p1.n = p2.n = 2;
    p1.a = VecN(0.5, 0.5);
    p1.b = VecN(0.5, 1.0);
    p2.a = VecN(0.5, 0.5);
    p2.b = VecN(1.0, 0.5);
    s.patches.push_back(p1);
    s.patches.push_back(p2);
  } else {
    BoundaryPatch p1, p2;
    p1.n = p2.n = 3;
    p1.is_rect = p2.is_rect = true;
    p1.a = VecN(0.5, 0.5, 0.0);
    p1.b = VecN(0.5, 1.0, 1.0);
    p2.a = VecN(0.5, 0.5, 0.0);
    p2.b = VecN(1.0, 0.5, 1.0);
    s.patches.push_back(p1);
    s.patches.push_back(p2);
  }
  return finish_domain(std::move(s), resolution);
}

DomainPtr make_disk(const VecN& center, double radius, int resolution) {
  ShapeSpec s;
  s.kind = ShapeKind::Disk;
  s.n = center.n;
  s.center = center;
  s.radius = radius;
  VecN half(center.n);
  for (int i = 0; i < center.n; ++i) half[i] = radius;
  s.bbox = Box(center - half, center + half);
  return finish_domain(std::move(s), resolution);
}

DomainPtr make_graph_halfspace(double slope0, double intercept, const Box& clip_box,
                               int resolution) {
  ShapeSpec s;
  s.kind = ShapeKind::GraphHalfspace;
  s.n = clip_box.n;
  if (s.n != 2)
    throw std::invalid_argument("make_graph_halfspace: only 2D graph domains are supported");
  s.bbox = clip_box;
  s.slope = VecN(2);
  s.slope[0] = slope0;
  s.intercept = intercept;
  add_box_patches(s, clip_box);
  // Clipped graph segment.
  {
    double x0 = clip_box.lo[0], x1 = clip_box.hi[0];
    auto phi = [&](double x) { return slope0 * x + intercept; };
    std::vector<std::pair<double, double>> pts;
    for (double x : {x0, x1}) {
      double y = phi(x);
      if (y >= clip_box.lo[1] && y <= clip_box.hi[1]) pts.push_back({x, y});
    }
    if (slope0 != 0) {
      for (double y : {clip_box.lo[1], clip_box.hi[1]}) {
        double x = (y - intercept) / slope0;
        if (x > x0 && x < x1) pts.push_back({x, y});
      }
    }
    std::sort(pts.begin(), pts.end());
    if (pts.size() >= 2) {
      BoundaryPatch p;
      p.n = 2;
      p.a = VecN(pts.front().first, pts.front().second);
      p.b = VecN(pts.back().first, pts.back().second);
      s.patches.push_back(p);
    }
  }
  return finish_domain(std::move(s), resolution);
}

DomainPtr with_dirichlet(const DomainPtr& dom, const std::function<bool(const VecN&)>& on) {
  auto copy = std::make_shared<GridDomain>(*dom);
  copy->serial = next_domain_serial();
  for (int64_t idx = 0; idx < copy->num_nodes(); ++idx) {
    bool is_boundary = copy->active[idx] && !copy->inside[idx];
    copy->dirichlet[idx] = is_boundary && on(copy->point(idx));
  }
  return copy;
}

TensorField sample_scalar(const DomainPtr& dom, const std::function<double(const VecN&)>& f) {
  TensorField out(dom, 0);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) out.at(idx) = f(dom->point(idx));
  return out;
}

TensorField sample_vector(const DomainPtr& dom, const std::function<VecN(const VecN&)>& f) {
  TensorField out(dom, 1);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) out.set_vec(idx, f(dom->point(idx)));
  return out;
}

TensorField sample_matrix(const DomainPtr& dom, const std::function<MatN(const VecN&)>& f) {
  TensorField out(dom, 2);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) out.set_mat(idx, f(dom->point(idx)));
  return out;
}

double interp_component(const TensorField& f, const VecN& p, int c) {
  const GridDomain& d = *f.dom;
  std::array<int, 3> i0{0, 0, 0};
  std::array<double, 3> t{0, 0, 0};
  for (int a = 0; a < d.n; ++a) {
    double s = (p[a] - d.origin[a]) / d.h;
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
    acc += w * f.at(d.index(ii[0], ii[1], ii[2]), c);
  }
  return acc;
}

TensorField gradient(const TensorField& u) {
  const GridDomain& d = *u.dom;
  if (u.rank != 0 && u.rank != 1)
    throw std::invalid_argument("gradient: rank must be 0 or 1");
  TensorField g(u.dom, u.rank + 1);
  int rows = u.comps;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    for (int a = 0; a < d.n; ++a) {
      const auto& st = d.stencil(idx, a);
      for (int i = 0; i < rows; ++i) {
        double s = 0;
        for (int m = 0; m < st.m; ++m) s += st.coef[m] * u.at(idx + st.off[m], i);
        g.at(idx, i * d.n + a) = s;
      }
    }
  }
  return g;
}

TensorField sym_gradient(const TensorField& u) {
  TensorField g = gradient(u);
  const GridDomain& d = *u.dom;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    g.set_mat(idx, g.mat_at(idx).sym());
  }
  return g;
}

MatN mean_gradient(const TensorField& u) {
  TensorField g = gradient(u);
  const GridDomain& d = *u.dom;
  MatN acc(d.n);
  double wsum = 0;
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    acc += d.weight[idx] * g.mat_at(idx);
    wsum += d.weight[idx];
  }
  return (1.0 / wsum) * acc;
}

TensorField gradient_adjoint(const TensorField& P) {
  const GridDomain& d = *P.dom;
  if (P.rank != 2) throw std::invalid_argument("gradient_adjoint: rank-2 input required");
  TensorField g(P.dom, 1);
  for (int64_t idx = 0; idx < d.num_nodes(); ++idx) {
    if (!d.active[idx]) continue;
    for (int a = 0; a < d.n; ++a) {
      const auto& st = d.stencil(idx, a);
      for (int i = 0; i < d.n; ++i) {
        double p = P.at(idx, i * d.n + a);
        if (p == 0) continue;
        for (int m = 0; m < st.m; ++m) g.at(idx + st.off[m], i) += p * st.coef[m];
      }
    }
  }
  return g;
}

TensorField distance_weight(const DomainPtr& dom) {
  TensorField w(dom, 0);
  for (int64_t idx = 0; idx < dom->num_nodes(); ++idx) w.at(idx) = dom->bdist[idx];
  return w;
}

WhitneyNodeChecks whitney_node_checks(const GridDomain& dom,
                                      const std::vector<WhitneyCube>& cubes) {
  std::vector<int> cover(dom.num_nodes(), 0), overlap(dom.num_nodes(), 0);
  auto for_nodes_in = [&](const Box& b, auto&& fn) {
    std::array<int, 3> ilo{0, 0, 0}, ihi{0, 0, 0};
    for (int a = 0; a < dom.n; ++a) {
      ilo[a] = std::max(0, int(std::ceil((b.lo[a] - dom.origin[a]) / dom.h - 1e-12)));
      ihi[a] = std::min(dom.dims[a] - 1, int(std::floor((b.hi[a] - dom.origin[a]) / dom.h + 1e-12)));
      if (ilo[a] > ihi[a]) return;
    }
    for (int k = (dom.n == 3 ? ilo[2] : 0); k <= (dom.n == 3 ? ihi[2] : 0); ++k)
      for (int j = ilo[1]; j <= ihi[1]; ++j)
        for (int i = ilo[0]; i <= ihi[0]; ++i) fn(dom.index(i, j, k));
  };
  for (const auto& q : cubes) {
    for_nodes_in(q.box(), [&](int64_t idx) {
      if (q.contains_halfopen(dom.point(idx))) ++cover[idx];
    });
    for_nodes_in(q.doubled(), [&](int64_t idx) {
      if (q.doubled().contains(dom.point(idx))) ++overlap[idx];
    });
  }
  WhitneyNodeChecks out;
  for (int64_t idx = 0; idx < dom.num_nodes(); ++idx) {
    out.max_overlap = std::max(out.max_overlap, overlap[idx]);
    if (dom.inside[idx] && cover[idx] == 0) ++out.uncovered_interior;
    if (cover[idx] > 1) ++out.multi_covered;
  }
  return out;
}

std::vector<WhitneyCube> whitney_decomposition(const GridDomain& dom) {
  const ShapeSpec& shape = dom.shape;
  int n = dom.n;
  double root_side = 0;
  for (int a = 0; a < n; ++a) root_side = std::max(root_side, shape.bbox.hi[a] - shape.bbox.lo[a]);
  VecN root_center(n);
  for (int a = 0; a < n; ++a) root_center[a] = 0.5 * (shape.bbox.lo[a] + shape.bbox.hi[a]);
  // Depth that guarantees coverage of interior nodes at distance >= h from
  // the boundary: side/2^L < h/(2 sqrt(n)), plus one level of slack.
  int max_level = std::clamp(int(std::ceil(std::log2(root_side / dom.h))) + 3, 6, 26);
  double sqn = std::sqrt(double(n));

  std::vector<WhitneyCube> out;
  std::deque<WhitneyCube> work;
  work.push_back({root_center, root_side, 0});
  while (!work.empty()) {
    WhitneyCube q = work.front();
    work.pop_front();
    if (!shape.box_intersects(q.box())) continue;
    double dist = shape.boundary_distance(q.box());
    if (dist > sqn * q.side) {
      out.push_back(q);  // keep; d <= 4*sqrt(n)*side is inherited from the parent
      continue;
    }
    if (q.level >= max_level) continue;
    double half = q.side / 4;
    int corners = 1 << n;
    for (int c = 0; c < corners; ++c) {
      VecN cc = q.center;
      for (int a = 0; a < n; ++a) cc[a] += ((c >> a) & 1) ? half : -half;
      work.push_back({cc, q.side / 2, q.level + 1});
    }
  }
  return out;
}

}  // namespace varexp
