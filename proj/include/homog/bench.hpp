#pragma once

#include "homog/correctors.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace homog {

// Deterministic smooth right-hand sides for convergence studies. Profiles:
// "smooth" (default, mixed low modes) and "mode" (single lowest mode).
GridFunction rhs_profile(const std::string& name, const Grid& g, int n);

// Least-squares slope of log(y) against log(x); requires positive data.
double fit_rate(const std::vector<double>& xs, const std::vector<double>& ys);

struct StudyRow {
  double eps = 0.0;
  double err0 = 0.0;  // ||u_eps - u0|| / ||f||
  double err1 = 0.0;  // ||grad u_eps - grad u0 - eps grad(K^eps f)|| / ||f||
  double err2 = 0.0;  // ||u_eps - u0 - eps C^eps f|| / ||f||  (nan if skipped)
  int iters_fine = 0;
  int iters_eff = 0;
};

struct ConvergenceReport {
  std::vector<StudyRow> rows;
  double rate0 = 0.0, rate1 = 0.0, rate2 = 0.0;
  std::string csv() const;  // header eps,err0,err1,err2,iters_fine,iters_eff
};

struct StudyParams {
  int p = 0;            // grid points per fast period (0 = dimension minimum)
  int cell_points = 0;  // 0 = dimension default
  cd mu = -1.0;
  bool mu_auto = true;  // mu = -(1 + C_A)
  double tol = 1e-10;
  std::vector<int> k_list;  // eps_k = L / 2^k
  std::string rhs = "smooth";
  bool with_err2 = true;
};

ConvergenceReport run_study(const CoefficientField& f, double L, const StudyParams& sp,
                            std::ostream* log = nullptr);

// Exact discrete pairing behind the first-corrector error bound (1D scalar,
// cell grid pinned to p points so fine faces and cell faces coincide):
//   (u_eps - u0 - eps tauS K f, g) = t1 + t2 + t3 + t4 + t5
// t1: translated flux table against (T - I) grad u_eps+ in z-quadrature;
// t2: flux table minus a^eps W, W = shifted grad u0 + averaged grad_y K f;
// t3: -eps a^eps grad_x K f against grad u_eps+;
// t4: -a^eps grad (I - S^eps) u0 against grad u_eps+;
// t5: eps mu (tauS K f, u_eps+).
// residual = |lhs - sum| / (||f|| ||g||).
struct IdentityReport {
  cd lhs = 0.0;
  std::array<cd, 5> terms{};
  double residual = 0.0;
};
IdentityReport identity_terms(const CoefficientField& f, const Grid& macro, double eps, cd mu,
                              const GridFunction& ff, const GridFunction& gg, double tol = 1e-12);

// (M f, f) along eps_k = 2^-k for the lacunary 1D coefficient: the value
// decays like a fixed negative power of k, not like eps, so no eps-uniform
// first-order bound can absorb it. f = (A0 - mu) u0 for a fixed C^1 profile
// with unit slope across the oscillatory part of the period.
struct CounterexampleRow {
  int k = 0;
  double eps = 0.0;
  double value = 0.0;     // Re (M f, f)
  double k2_value = 0.0;  // k^2 * value
};

struct CounterexampleReport {
  std::vector<CounterexampleRow> rows;
  double slope = 0.0;  // fitted log(value) vs log(k)
  std::string csv() const;  // header k,eps,value,k2_value
};

GridFunction counterexample_profile(const Grid& g);  // the fixed u0 above
CounterexampleReport counterexample_study(int K_terms, const std::vector<int>& k_list, int p,
                                          double tol = 1e-10, std::ostream* log = nullptr);

}  // namespace homog
