#pragma once

#include "homog/grid.hpp"

#include <vector>

namespace homog {

// Alignment data tying a macro grid, a cell grid and eps = L/m together:
// p = M/m fine nodes per fast period, q = Mc/p cell nodes per fine step.
// Macro node i has fast residue j_n(i) = (i*q + Mc/2) mod Mc per dimension.
struct SmoothingOps {
  Grid macro;
  Grid cell;
  double eps = 1.0;
  int p = 1;
  int q = 1;

  int fast_node(int i) const { return ((i % p) * q + cell.M / 2) % cell.M; }
  Index fast_node_flat(Index node) const {
    auto I = macro.unflatten(node);
    if (macro.d == 1) return fast_node(I[0]);
    return Index(fast_node(I[0])) * cell.M + fast_node(I[1]);
  }
};

SmoothingOps make_smoothing(const Grid& macro, const Grid& cell, double eps);

// Symmetric trapezoid window over z in Q: nodes z_t = (t - p/2)/p (t = 0..p),
// weights w_t = (1/p)(1/2, 1, ..., 1, 1/2); eps*z_t is exactly s_t = t - p/2
// fine steps. Tensorized per dimension in 2D.
struct ZWindow {
  int p = 1;
  std::vector<double> w;
  std::vector<int> s;
};
ZWindow z_window(int p);

// (tau U)(x_i) = U(x_i, fast residue of x_i); adjoint scatters with the
// cell-measure factor Mc^d.
GridFunction two_scale_substitute(const SmoothingOps& S, const TwoScaleFunction& U);
TwoScaleFunction two_scale_substitute_adjoint(const SmoothingOps& S, const GridFunction& v);

// Steklov mean over x + eps*Q (window above, per dimension); exactly
// self-adjoint. Also available on face fields (S commutes with grad).
GridFunction steklov(const SmoothingOps& S, const GridFunction& u);
FaceField steklov_face(const SmoothingOps& S, const FaceField& F);

// U_eps = tau S U collapsed to the macro grid, and its exact adjoint.
GridFunction tau_S_two_scale(const SmoothingOps& S, const TwoScaleFunction& U);
TwoScaleFunction tau_S_two_scale_adjoint(const SmoothingOps& S, const GridFunction& v);

// z-quadrature pairings of (tau T V)(i, t) = V(i + s_t, j_n(i)):
cd tau_T_inner(const SmoothingOps& S, const TwoScaleFunction& V, const TwoScaleFunction& W);
double tau_T_norm(const SmoothingOps& S, const TwoScaleFunction& V);
// || tau T U - (tau S U) (x) 1_z || in the same quadrature: how far the
// windowed substitution sits from its z-average.
double tau_T_minus_tau_S_norm(const SmoothingOps& S, const TwoScaleFunction& U);
// sqrt(sum_t w_t ||u(. + eps z_t) - u||^2), the z-averaged translation error.
double translate_minus_id_znorm(const SmoothingOps& S, const GridFunction& u);

}  // namespace homog
