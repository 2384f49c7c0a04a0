#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <string>

namespace homog {

using cd = std::complex<double>;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Uniform periodic grid with M nodes per dimension. Used both for the macro
// torus [0,L)^d (nodes x_i = i*h, h = L/M) and for the unit cell (L = 1); cell
// nodes are offset to [-1/2,1/2)^d, which only matters when sampling
// coefficients, never in the difference calculus.
struct Grid {
  int d = 1;
  double L = 1.0;
  int M = 8;

  double h() const { return L / M; }
  Index nodes() const {
    Index s = 1;
    for (int k = 0; k < d; ++k) s *= M;
    return s;
  }
  // weight of one node in the L2 inner product
  double w() const {
    double p = 1.0;
    for (int k = 0; k < d; ++k) p *= h();
    return p;
  }
  int wrap(int i) const {
    i %= M;
    return i < 0 ? i + M : i;
  }
  Index flatten(const std::array<int, 2>& I) const {
    return d == 1 ? Index(wrap(I[0])) : Index(wrap(I[0])) * M + wrap(I[1]);
  }
  std::array<int, 2> unflatten(Index node) const {
    if (d == 1) return {int(node), 0};
    return {int(node / M), int(node % M)};
  }
  // node shifted by `step` cells along dimension k
  Index nbr(Index node, int k, int step) const {
    if (d == 1) return wrap(int(node) + step);
    int i0 = int(node / M), i1 = int(node % M);
    if (k == 0) return Index(wrap(i0 + step)) * M + i1;
    return Index(i0) * M + wrap(i1 + step);
  }
  double coord(Index node, int k) const {
    auto I = unflatten(node);
    return I[k] * h();
  }
  bool operator==(const Grid& o) const { return d == o.d && L == o.L && M == o.M; }
};

inline Grid make_cell_grid(int d, int Mc) { return Grid{d, 1.0, Mc}; }

// Cell node / face positions in Q = [-1/2,1/2)^d.
inline double cell_node_coord(const Grid& c, int idx) { return -0.5 + double(idx) / c.M; }
inline double cell_face_coord(const Grid& c, int idx) { return -0.5 + (idx + 0.5) / c.M; }

// C^n-valued function on grid nodes; layout v[node*n + comp].
struct GridFunction {
  Grid grid;
  int n = 1;
  VectorXcd v;

  GridFunction() = default;
  GridFunction(const Grid& g, int n_) : grid(g), n(n_), v(VectorXcd::Zero(g.nodes() * n_)) {}
  cd& at(Index node, int comp) { return v[node * n + comp]; }
  cd at(Index node, int comp) const { return v[node * n + comp]; }
};

// C^n-valued field on half-integer nodes, one set per dimension; layout
// v[(k*nodes + node)*n + comp], where (k, node) is the face at x_node + h/2 e_k.
struct FaceField {
  Grid grid;
  int n = 1;
  VectorXcd v;

  FaceField() = default;
  FaceField(const Grid& g, int n_) : grid(g), n(n_), v(VectorXcd::Zero(g.d * g.nodes() * n_)) {}
  Index idx(int k, Index node, int comp) const { return (Index(k) * grid.nodes() + node) * n + comp; }
  cd& at(int k, Index node, int comp) { return v[idx(k, node, comp)]; }
  cd at(int k, Index node, int comp) const { return v[idx(k, node, comp)]; }
};

// C^{d x n}-valued function on nodes (e.g. node-centered gradients); layout
// v[(node*d + k)*n + comp].
struct NodeField {
  Grid grid;
  int n = 1;
  VectorXcd v;

  NodeField() = default;
  NodeField(const Grid& g, int n_) : grid(g), n(n_), v(VectorXcd::Zero(g.d * g.nodes() * n_)) {}
  Index idx(Index node, int k, int comp) const { return (node * grid.d + k) * n + comp; }
  cd& at(Index node, int k, int comp) { return v[idx(node, k, comp)]; }
  cd at(Index node, int k, int comp) const { return v[idx(node, k, comp)]; }
};

// Function on macro nodes x cell nodes; layout v[(node*cellNodes + cnode)*n + comp].
struct TwoScaleFunction {
  Grid macro;
  Grid cell;
  int n = 1;
  VectorXcd v;

  TwoScaleFunction() = default;
  TwoScaleFunction(const Grid& m, const Grid& c, int n_)
      : macro(m), cell(c), n(n_), v(VectorXcd::Zero(m.nodes() * c.nodes() * n_)) {}
  Index idx(Index node, Index cnode, int comp) const {
    return (node * cell.nodes() + cnode) * n + comp;
  }
  cd& at(Index node, Index cnode, int comp) { return v[idx(node, cnode, comp)]; }
  cd at(Index node, Index cnode, int comp) const { return v[idx(node, cnode, comp)]; }
};

// Forward difference onto half-integer nodes, periodic wrap.
FaceField grad(const GridFunction& u);
// Exact discrete adjoint of grad: <grad u, F>_faces = <u, div_adj F>_nodes.
GridFunction div_adj(const FaceField& F);
// Face -> node averaging of each gradient component (and its exact adjoint).
NodeField avg_face_to_node(const FaceField& F);
FaceField avg_node_to_face(const NodeField& G);

// Inner products / norms (first slot linear, second conjugated).
cd l2_inner(const GridFunction& u, const GridFunction& v);
double l2_norm(const GridFunction& u);
cd face_inner(const FaceField& F, const FaceField& G);
double face_norm(const FaceField& F);
double h1_norm(const GridFunction& u);
cd ts_inner(const TwoScaleFunction& U, const TwoScaleFunction& V);
double ts_norm(const TwoScaleFunction& U);

GridFunction cell_zero_mean(const GridFunction& u);

// Arithmetic helpers.
GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(cd s, const GridFunction& a);
FaceField operator-(const FaceField& a, const FaceField& b);
FaceField operator*(cd s, const FaceField& a);

// CSV: one node per row, index column(s) then Re/Im per component; 17
// significant digits, byte-deterministic.
void write_grid_csv(const std::string& path, const GridFunction& u);
std::string format_g17(double x);

// Deterministic standard-normal complex vector (testing / probing).
VectorXcd randn_cvec(Index size, std::uint64_t seed);

}  // namespace homog
