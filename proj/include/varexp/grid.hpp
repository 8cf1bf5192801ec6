#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "varexp/geometry.hpp"
#include "varexp/smallmat.hpp"

namespace varexp {

enum class ShapeKind { Rectangle, LShape, Disk, GraphHalfspace };

// Analytic description of the domain: strict-interior test, exact distance
// to the boundary (pointwise and for boxes), and exact-or-subsampled cell
// volume fractions for the quadrature weights.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Rectangle;
  int n = 2;
  Box bbox;                           // grid bounding box
  Box cut;                            // LShape: removed box
  VecN center;                        // Disk
  double radius = 0;                  // Disk
  VecN slope;                         // GraphHalfspace: x_n < slope . x' + intercept
  double intercept = 0;               // GraphHalfspace
  std::vector<BoundaryPatch> patches; // flat boundary pieces (empty for Disk)

  bool inside(const VecN& p) const;                // strict interior of Omega
  double boundary_distance(const VecN& p) const;   // exact d(p, dOmega)
  double boundary_distance(const Box& b) const;    // exact d(box, dOmega)
  bool box_intersects(const Box& b) const;         // box meets int(Omega)
  double cell_volume(const Box& cell) const;       // vol(cell ∩ Omega)
};

struct GridDomain {
  int n = 2;
  std::array<int, 3> dims{1, 1, 1};
  double h = 0;
  VecN origin;
  ShapeSpec shape;
  uint64_t serial = 0;  // unique per constructed domain; cache key

  std::vector<uint8_t> inside;     // strict interior nodes
  std::vector<uint8_t> active;     // inside or boundary nodes (field support)
  std::vector<uint8_t> dirichlet;  // subset of boundary nodes
  std::vector<double> bdist;       // distance to dOmega, all nodes
  std::vector<double> weight;      // quadrature weight, nonzero on active only

  int64_t inside_count = 0;
  int64_t active_count = 0;
  double measure = 0;   // sum of weights
  double diameter = 0;  // bounding box diagonal

  // One-dimensional difference stencil per (active node, axis); exact for
  // affine fields in every branch.
  struct Stencil {
    int m = 0;
    std::array<int32_t, 4> off{};  // index offsets
    std::array<double, 4> coef{};
  };
  std::vector<Stencil> stencils;  // size num_nodes()*n, empty entries for inactive

  int64_t num_nodes() const {
    return int64_t(dims[0]) * dims[1] * dims[2];
  }
  int64_t index(int i, int j, int k = 0) const {
    return i + int64_t(dims[0]) * (j + int64_t(dims[1]) * k);
  }
  void coords(int64_t idx, int& i, int& j, int& k) const {
    i = int(idx % dims[0]);
    j = int((idx / dims[0]) % dims[1]);
    k = int(idx / (int64_t(dims[0]) * dims[1]));
  }
  VecN point(int64_t idx) const {
    int i, j, k;
    coords(idx, i, j, k);
    VecN p(n);
    p[0] = origin[0] + i * h;
    p[1] = origin[1] + j * h;
    if (n == 3) p[2] = origin[2] + k * h;
    return p;
  }
  const Stencil& stencil(int64_t idx, int axis) const { return stencils[idx * n + axis]; }
};

using DomainPtr = std::shared_ptr<const GridDomain>;

DomainPtr make_rectangle(const VecN& lo, const VecN& hi, int resolution);
DomainPtr make_lshape(int resolution, int dim = 2);
DomainPtr make_disk(const VecN& center, double radius, int resolution);
// Omega = {x_n < slope . x' + intercept} clipped to clip_box; 2D only.
DomainPtr make_graph_halfspace(double slope0, double intercept, const Box& clip_box,
                               int resolution);

// Restrict the Dirichlet part of the boundary with a predicate (default
// construction marks every boundary node).
DomainPtr with_dirichlet(const DomainPtr& dom, const std::function<bool(const VecN&)>& on);

struct TensorField {
  DomainPtr dom;
  int rank = 0;
  int comps = 1;
  std::vector<double> v;

  TensorField() = default;
  TensorField(DomainPtr d, int r)
      : dom(std::move(d)), rank(r), comps(r == 0 ? 1 : (r == 1 ? dom->n : dom->n * dom->n)) {
    v.assign(size_t(dom->num_nodes()) * comps, 0.0);
  }

  double& at(int64_t idx, int c = 0) { return v[size_t(idx) * comps + c]; }
  double at(int64_t idx, int c = 0) const { return v[size_t(idx) * comps + c]; }

  VecN vec_at(int64_t idx) const {
    VecN r(dom->n);
    for (int i = 0; i < dom->n; ++i) r[i] = at(idx, i);
    return r;
  }
  void set_vec(int64_t idx, const VecN& u) {
    for (int i = 0; i < dom->n; ++i) at(idx, i) = u[i];
  }
  MatN mat_at(int64_t idx) const {
    MatN m(dom->n);
    for (int i = 0; i < dom->n; ++i)
      for (int j = 0; j < dom->n; ++j) m(i, j) = at(idx, i * dom->n + j);
    return m;
  }
  void set_mat(int64_t idx, const MatN& m) {
    for (int i = 0; i < dom->n; ++i)
      for (int j = 0; j < dom->n; ++j) at(idx, i * dom->n + j) = m(i, j);
  }

  // Pointwise magnitude: |f|, Euclidean, or Frobenius depending on rank.
  double abs_at(int64_t idx) const {
    double s = 0;
    for (int c = 0; c < comps; ++c) s += at(idx, c) * at(idx, c);
    return std::sqrt(s);
  }
};

TensorField sample_scalar(const DomainPtr& dom, const std::function<double(const VecN&)>& f);
TensorField sample_vector(const DomainPtr& dom, const std::function<VecN(const VecN&)>& f);
TensorField sample_matrix(const DomainPtr& dom, const std::function<MatN(const VecN&)>& f);

// Componentwise multilinear interpolation at an arbitrary point of the
// bounding box (values taken from the full node lattice).
double interp_component(const TensorField& f, const VecN& p, int c);

TensorField gradient(const TensorField& u);      // rank 0 -> 1, rank 1 -> 2
TensorField sym_gradient(const TensorField& u);  // rank 1 -> 2
MatN mean_gradient(const TensorField& u);

// Exact adjoint of the rank-1 gradient operator: given P (rank 2, already
// carrying any quadrature weights), returns g (rank 1) with
// sum_x P(x) : grad(u)(x) == sum_y g(y) . u(y) for all u.
TensorField gradient_adjoint(const TensorField& P);

TensorField distance_weight(const DomainPtr& dom);

struct WhitneyCube {
  VecN center;
  double side = 0;  // cube is center + (-side/2, side/2)^n
  int level = 0;
  Box box() const {
    VecN half(center.n);
    for (int i = 0; i < center.n; ++i) half[i] = side / 2;
    return Box(center - half, center + half);
  }
  Box doubled() const {
    VecN half(center.n);
    for (int i = 0; i < center.n; ++i) half[i] = side;
    return Box(center - half, center + half);
  }
  // Half-open membership in [lo, hi): same-level cubes tile disjointly.
  bool contains_halfopen(const VecN& p) const {
    for (int i = 0; i < center.n; ++i) {
      if (p[i] < center[i] - side / 2 || p[i] >= center[i] + side / 2) return false;
    }
    return true;
  }
};

std::vector<WhitneyCube> whitney_decomposition(const GridDomain& dom);

struct WhitneyNodeChecks {
  int max_overlap = 0;            // node-wise count of doubled cubes
  int64_t uncovered_interior = 0; // interior nodes missed by the half-open cover
  int64_t multi_covered = 0;      // nodes claimed by more than one cube
};
WhitneyNodeChecks whitney_node_checks(const GridDomain& dom,
                                      const std::vector<WhitneyCube>& cubes);

}  // namespace varexp
