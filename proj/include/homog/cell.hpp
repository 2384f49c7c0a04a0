#pragma once

#include "homog/coeff.hpp"
#include "homog/linop.hpp"

#include <vector>

namespace homog {

// Coefficient sampled at face centers: for each face dimension k and node i,
// the n x (d*n) block-row of A at the center of face (k,i). Applying it to a
// FaceField uses the 4-point transverse average to collocate cross components
// (exact adjoint pair by construction).
struct FaceCoefficient {
  Grid grid;
  int n = 1;
  VectorXcd v;  // [((k*nodes + node)*n + row)*dn + col]

  FaceCoefficient() = default;
  FaceCoefficient(const Grid& g, int n_)
      : grid(g), n(n_), v(VectorXcd::Zero(Index(g.d) * g.nodes() * n_ * (Index(g.d) * n_))) {}
  Index base(int k, Index node) const {
    Index dn = Index(grid.d) * n;
    return (Index(k) * grid.nodes() + node) * n * dn;
  }
};

FaceField apply_face_coeff(const FaceCoefficient& A, const FaceField& G);
FaceField apply_face_coeff_adjoint(const FaceCoefficient& A, const FaceField& H);
// Mean of Re(diagonal entries) over all faces; Laplacian preconditioner scale.
double face_coeff_mean_re(const FaceCoefficient& A);

// A(x, .) sampled on the faces of the unit cell grid.
FaceCoefficient sample_cell_faces(const CoefficientField& f, const Vec2& x, const Grid& cell);
// Blockwise Hermitian transpose A*(x,y) (the "+"-family coefficient).
CoefficientField adjoint_field(const CoefficientField& f);

// N -> div_adj(A grad N) on cell grid functions.
LinearMap cell_operator(const FaceCoefficient& A);

struct CellSolve {
  GridFunction N;  // zero-mean cell solution, C^n
  FaceField Gy;    // its face gradient
};

// Weak cell problem at macro point x, unit direction xi = e_k (x) e_j:
// <A(x,.)(grad N + xi), grad v> = 0 for all v, N zero-mean. d=1 solves the
// staggered system in closed form (flux constancy); d=2 uses preconditioned
// GMRES on the zero-mean subspace.
CellSolve solve_cell(const CoefficientField& f, const Vec2& x, int k, int j, const Grid& cell,
                     double tol = 1e-12, SolveReport* rep = nullptr);
CellSolve solve_cell_adjoint(const CoefficientField& f, const Vec2& x, int k, int j,
                             const Grid& cell, double tol = 1e-12, SolveReport* rep = nullptr);

// Residual of the discrete weak form, relative to sup_norm (diagnostic).
double cell_weak_residual(const FaceCoefficient& A, const CellSolve& s, int k, int j);

struct CellEntry {
  std::vector<GridFunction> N;   // per direction r = k*n + j
  std::vector<FaceField> Gy;
  std::vector<GridFunction> Np;  // adjoint twins
  std::vector<FaceField> Gyp;
};

// Cell solutions tabulated over macro nodes x gradient directions. For
// x-uniform or scalar-factor slow dependence a single shared entry is stored
// (the cell solution is invariant under A -> c(x) A).
struct CellSolutionTable {
  Grid macro;
  Grid cell;
  bool shared = false;
  std::vector<CellEntry> entries;

  const CellEntry& at(Index node) const { return entries[shared ? 0 : size_t(node)]; }
};

CellSolutionTable build_table(const CoefficientField& f, const Grid& macro, const Grid& cell,
                              double tol = 1e-12);

// Continuum 1D oracle by quadrature: A0(x) = (integral of A(x,y)^{-1} dy)^{-1},
// grad profile A0/A(x,y) - 1. Requires d = n = 1.
struct ClosedForm1D {
  cd A0;
  std::function<cd(double)> grad_profile;
};
ClosedForm1D closed_form_1d(const CoefficientField& f, double x, int quad_points = 4096);

// Debug export: N and N+ of one macro node, one CSV per direction.
void export_cell_csv(const CellSolutionTable& t, Index macro_node, const std::string& dir);

int default_cell_points(int d);  // 256 (d=1), 64 (d=2)

}  // namespace homog
