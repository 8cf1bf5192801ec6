#pragma once

#include <vector>

#include "varexp/smallmat.hpp"

namespace varexp {

struct Box {
  int n = 2;
  VecN lo, hi;
  Box() = default;
  Box(VecN l, VecN h) : n(l.n), lo(l), hi(h) {}
  double volume() const {
    double v = 1;
    for (int i = 0; i < n; ++i) v *= (hi[i] - lo[i]);
    return v;
  }
  bool contains(const VecN& p) const {
    for (int i = 0; i < n; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
};

// A flat boundary piece: a segment in 2D, an axis-aligned rectangle in 3D.
// Rectangles are stored as a box with one degenerate axis.
struct BoundaryPatch {
  int n = 2;
  VecN a, b;  // 2D segment endpoints; in 3D a/b are the rect's lo/hi corners
  bool is_rect = false;
};

double dist_point_box(const VecN& p, const Box& box);
double dist_point_segment(const VecN& p, const VecN& a, const VecN& b);
double dist_point_patch(const VecN& p, const BoundaryPatch& patch);
double dist_box_box(const Box& x, const Box& y);
double dist_box_segment(const Box& box, const VecN& a, const VecN& b);
double dist_box_patch(const Box& box, const BoundaryPatch& patch);

// Volume of box1 and box2 overlap (0 if disjoint).
double box_overlap_volume(const Box& x, const Box& y);

// Area of the part of a 2D box lying below the line y = s*x + t.
double area_below_line(const Box& box, double slope, double intercept);

}  // namespace varexp
