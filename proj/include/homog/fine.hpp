#pragma once

#include "homog/effective.hpp"

namespace homog {

// eps values commensurate with a macro grid: eps = L/m, m | M, with at least
// p_min points per fast period (32 in 1D, 16 in 2D) and eps <= 1.
struct FineScale {
  double eps = 1.0;
  int m = 1;  // periods per torus
  int p = 1;  // grid points per period, p = M/m
};

int min_points_per_period(int d);
FineScale validate_eps(const Grid& macro, double eps);

struct EpsilonSchedule {
  Grid macro;
  std::vector<FineScale> scales;
};
EpsilonSchedule make_schedule(const Grid& macro, const std::vector<double>& eps_values);

// A(x_{i+1/2}, x_{i+1/2}/eps mod 1) sampled at face centers.
FaceCoefficient sample_fine_faces(const CoefficientField& f, const Grid& macro, double eps);

// u -> D* A(x, x/eps) D u (no shift); adjoint uses blockwise A* at the same faces.
LinearMap assemble_fine(const CoefficientField& f, const Grid& macro, double eps);

// Frozen (A^eps - mu) with preconditioned direct and adjoint solves.
struct FineSolver {
  Grid grid;
  int n = 1;
  cd mu = -1.0;
  double tol = 1e-10;
  LinearMap op;
  Precond P;

  GridFunction solve(const GridFunction& f, SolveReport* rep = nullptr) const;
  GridFunction solve_adjoint(const GridFunction& g, SolveReport* rep = nullptr) const;
};

// Refuses mu inside the coefficient sector and misaligned eps.
FineSolver make_fine_solver(const CoefficientField& f, const Grid& macro, double eps, cd mu,
                            double tol = 1e-10);

GridFunction fine_resolvent(const CoefficientField& f, const Grid& macro, double eps, cd mu,
                            const GridFunction& rhs, double tol = 1e-10,
                            SolveReport* rep = nullptr);

// min over random u of (Re<A^eps grad u, grad u> + C_A ||u||^2) / ||grad u||^2.
double fine_coercivity_margin(const CoefficientField& f, const Grid& macro, double eps, int trials,
                              std::uint64_t seed);

}  // namespace homog
