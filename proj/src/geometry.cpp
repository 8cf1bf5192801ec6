#include "varexp/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace varexp {

double dist_point_box(const VecN& p, const Box& box) {
  double s = 0;
  for (int i = 0; i < box.n; ++i) {
    double g = std::max({box.lo[i] - p[i], p[i] - box.hi[i], 0.0});
    s += g * g;
  }
  return std::sqrt(s);
}

double dist_point_segment(const VecN& p, const VecN& a, const VecN& b) {
  VecN ab = b - a;
  double len2 = ab.dot(ab);
  double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  VecN q = a + t * ab;
  return (p - q).norm();
}

double dist_point_patch(const VecN& p, const BoundaryPatch& patch) {
  if (!patch.is_rect) return dist_point_segment(p, patch.a, patch.b);
  // Axis-aligned rectangle: clamp into its (possibly degenerate) box.
  double s = 0;
  for (int i = 0; i < patch.n; ++i) {
    double g = std::max({patch.a[i] - p[i], p[i] - patch.b[i], 0.0});
    s += g * g;
  }
  return std::sqrt(s);
}

double dist_box_box(const Box& x, const Box& y) {
  double s = 0;
  for (int i = 0; i < x.n; ++i) {
    double g = std::max({y.lo[i] - x.hi[i], x.lo[i] - y.hi[i], 0.0});
    s += g * g;
  }
  return std::sqrt(s);
}

namespace {

bool segments_intersect_2d(const VecN& p1, const VecN& p2, const VecN& q1, const VecN& q2) {
  auto cross = [](const VecN& o, const VecN& a, const VecN& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on = [&](const VecN& a, const VecN& b, const VecN& c, double d) {
    return d == 0 && std::min(a[0], b[0]) <= c[0] && c[0] <= std::max(a[0], b[0]) &&
           std::min(a[1], b[1]) <= c[1] && c[1] <= std::max(a[1], b[1]);
  };
  return on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4);
}

double dist_segment_segment_2d(const VecN& p1, const VecN& p2, const VecN& q1, const VecN& q2) {
  if (segments_intersect_2d(p1, p2, q1, q2)) return 0.0;
  return std::min({dist_point_segment(p1, q1, q2), dist_point_segment(p2, q1, q2),
                   dist_point_segment(q1, p1, p2), dist_point_segment(q2, p1, p2)});
}

}  // namespace

double dist_box_segment(const Box& box, const VecN& a, const VecN& b) {
  // Convex-convex distance in 2D: zero if they touch, otherwise attained at
  // a vertex of one against an edge/vertex of the other.
  if (box.contains(a) || box.contains(b)) return 0.0;
  VecN c00(box.lo[0], box.lo[1]), c10(box.hi[0], box.lo[1]);
  VecN c01(box.lo[0], box.hi[1]), c11(box.hi[0], box.hi[1]);
  double d = std::min({dist_segment_segment_2d(a, b, c00, c10), dist_segment_segment_2d(a, b, c10, c11),
                       dist_segment_segment_2d(a, b, c11, c01), dist_segment_segment_2d(a, b, c01, c00)});
  return d;
}

double dist_box_patch(const Box& box, const BoundaryPatch& patch) {
  if (!patch.is_rect) return dist_box_segment(box, patch.a, patch.b);
  // Both axis-aligned: componentwise interval gaps.
  double s = 0;
  for (int i = 0; i < box.n; ++i) {
    double g = std::max({patch.a[i] - box.hi[i], box.lo[i] - patch.b[i], 0.0});
    s += g * g;
  }
  return std::sqrt(s);
}

double box_overlap_volume(const Box& x, const Box& y) {
  double v = 1;
  for (int i = 0; i < x.n; ++i) {
    double lo = std::max(x.lo[i], y.lo[i]);
    double hi = std::min(x.hi[i], y.hi[i]);
    if (hi <= lo) return 0.0;
    v *= hi - lo;
  }
  return v;
}

double area_below_line(const Box& box, double slope, double intercept) {
  // Integrate clamp(s*x + t - ylo, 0, dy) over [xlo, xhi]. The integrand is
  // piecewise linear with breakpoints where the line crosses ylo and yhi.
  double xlo = box.lo[0], xhi = box.hi[0];
  double ylo = box.lo[1], yhi = box.hi[1];
  double dy = yhi - ylo;
  auto f = [&](double x) { return std::clamp(slope * x + intercept - ylo, 0.0, dy); };
  std::vector<double> xs = {xlo, xhi};
  if (slope != 0) {
    for (double yc : {ylo, yhi}) {
      double xb = (yc - intercept) / slope;
      if (xb > xlo && xb < xhi) xs.push_back(xb);
    }
  }
  std::sort(xs.begin(), xs.end());
  double area = 0;
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    double x0 = xs[i], x1 = xs[i + 1];
    area += 0.5 * (f(x0) + f(x1)) * (x1 - x0);  // exact: f linear between breakpoints
  }
  return area;
}

}  // namespace varexp
