#pragma once

#include "homog/cell.hpp"

namespace homog {

// Effective tensor tabulated at macro nodes, with the ellipticity metadata of
// the generating field carried along for sector checks and defaults.
struct EffectiveField {
  Grid macro;
  int n = 1;
  std::vector<MatrixXcd> A0;  // per node, (d*n) x (d*n)
  double lip_bound = 0.0;
  double c_A = 1.0, C_A = 0.0, sup_norm = 1.0;
  bool self_adjoint = false;

  int d() const { return macro.d; }
  int bn() const { return macro.d * n; }
};

// A0(x) eta = cell mean of A(x,.)(eta + grad_y N_eta(x,.)) per unit direction;
// parallel over macro nodes, single solve reused for x-uniform / scalar-factor
// fields.
EffectiveField assemble_effective(const CoefficientField& f, const CellSolutionTable& table);

// Half-integer-node tensor: average of the two adjacent nodal tensors.
FaceCoefficient effective_faces(const EffectiveField& eff);

cd default_mu(const CoefficientField& f);  // -(1 + C_A)

// Frozen realization of u -> (D* A0 D - mu) u with preconditioned solves for
// the resolvent and its adjoint.
struct ResolventSolver {
  Grid grid;
  int n = 1;
  cd mu = -1.0;
  double tol = 1e-10;
  LinearMap op;  // A0_mu
  Precond P;

  GridFunction solve(const GridFunction& f, SolveReport* rep = nullptr) const;
  GridFunction solve_adjoint(const GridFunction& g, SolveReport* rep = nullptr) const;
};

// Refuses mu inside the coefficient sector.
ResolventSolver make_effective_solver(const EffectiveField& eff, cd mu, double tol = 1e-10);

GridFunction effective_resolvent(const EffectiveField& eff, cd mu, const GridFunction& f,
                                 double tol = 1e-10, SolveReport* rep = nullptr);

// Legendre-Hadamard sampler on the assembled tensor (min over nodes and
// random normalized (xi, eta) pairs).
double effective_lh_min(const EffectiveField& eff, int samples, std::uint64_t seed);

// CSV: node index(es), then Re/Im of every block entry in row-major order.
void write_effective_csv(const std::string& path, const EffectiveField& eff);

}  // namespace homog
