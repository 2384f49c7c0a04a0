#pragma once

#include "homog/effective.hpp"
#include "homog/fine.hpp"
#include "homog/smoothing.hpp"

#include <vector>

namespace homog {

// eps-independent corrector machinery: the cell solution table (with adjoint
// twins), the effective resolvent, and cached node-centered cell multipliers
// Ghat(x, y_j) = I + P_y grad_y N(x, y_j) per table entry (Ghatp for N+).
// Blocks are stored column-major, (cnode*dn + col)*dn + row.
struct CorrectorBundle {
  CoefficientField field;
  Grid macro;
  Grid cell;
  cd mu = -1.0;
  double tol = 1e-10;
  CellSolutionTable table;
  EffectiveField eff;
  ResolventSolver solver;
  std::vector<VectorXcd> ghat, ghatp;  // per table entry
  Eigen::VectorXd slow;                // c(x_i) for scalar-factor fields

  int n() const { return eff.n; }
  int bn() const { return macro.d * eff.n; }
  VSpace space() const { return {macro.nodes() * eff.n, macro.w()}; }
  const VectorXcd& ghat_at(Index node, bool plus) const {
    const auto& g = plus ? ghatp : ghat;
    return g[table.shared ? 0 : size_t(node)];
  }
};

CorrectorBundle make_corrector_bundle(const CoefficientField& f, const Grid& macro, cd mu,
                                      int cell_points = 0, double tol = 1e-10);

// eps-dependent part: alignment/window ops plus the cached commutator tensor
// Mhat(x_i) = -eps^{-1} sum_t w_t Ghat+(x_i, j(i-s_t))^* [A(x_i, .) - A(x_{i-s_t}, .)] Ghat(x_i, j(i-s_t)),
// the aligned trapezoid-window realization of the function-form coefficient
// (all slow arguments on the macro lattice, all fast arguments on the cell
// lattice). Layout mirrors ghat: (node*dn + col)*dn + row.
struct CorrectorEpsOps {
  const CorrectorBundle* base = nullptr;
  FineScale fs;
  SmoothingOps sm;
  VectorXcd mhat;
};

CorrectorEpsOps make_eps_ops(const CorrectorBundle& b, double eps);

// First corrector as a two-scale function: U(x_i, y_j) = N(x_i, y_j) w(x_i)
// with w = face-to-node averaged gradient of u0 = (A0 - mu)^{-1} f.
TwoScaleFunction corrector_K(const CorrectorBundle& b, const GridFunction& f);

// LinearMaps with exact adjoints; plus = true builds the "+"-family twin
// (blockwise adjoint coefficient, N+ table, adjoint resolvent).
LinearMap map_K(const CorrectorBundle& b);  // codomain = two-scale functions
LinearMap map_K_eps(const CorrectorEpsOps& ops, bool plus = false);
LinearMap map_L(const CorrectorBundle& b, bool plus = false);
LinearMap map_M_eps(const CorrectorEpsOps& ops);
LinearMap map_C_eps(const CorrectorEpsOps& ops);

// Convenience applications of the maps above.
GridFunction corrector_K_eps(const CorrectorEpsOps& ops, const GridFunction& f);
GridFunction corrector_L(const CorrectorBundle& b, const GridFunction& f);
GridFunction corrector_M_eps(const CorrectorEpsOps& ops, const GridFunction& f);
GridFunction corrector_C_eps(const CorrectorEpsOps& ops, const GridFunction& f);

// Sesquilinear forms evaluated by independent quadrature paths (used to
// cross-check the operator realizations):
//   form_L(f,g) = <A (grad u0 + grad_y U), grad_x U+>  over macro x cell,
//   form_M(f,g) = -eps^{-1} sum_{i,t} w_t <dA(x_i; s_t) E_i(t), E+_i(t)>,
// where E_i(t) = Ghat(x_{i+s_t}, j(i)) w(x_{i+s_t}) and dA is the slow
// increment of A across the window at the frozen fast residue of x_i.
cd form_L(const CorrectorBundle& b, const GridFunction& f, const GridFunction& g);
cd form_M(const CorrectorEpsOps& ops, const GridFunction& f, const GridFunction& g);

}  // namespace homog
