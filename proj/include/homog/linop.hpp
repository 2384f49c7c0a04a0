#pragma once

#include "homog/grid.hpp"

#include <functional>
#include <stdexcept>
#include <string>

namespace homog {

// Finite-dimensional coefficient space C^dim with inner product
// <u,v> = weight * sum_i u_i conj(v_i).
struct VSpace {
  Index dim = 0;
  double weight = 1.0;
  bool operator==(const VSpace& o) const { return dim == o.dim && weight == o.weight; }
};

// Matrix-free linear map with an exact adjoint w.r.t. the weighted inner
// products of its domain and codomain.
struct LinearMap {
  VSpace dom, cod;
  std::function<VectorXcd(const VectorXcd&)> apply;
  std::function<VectorXcd(const VectorXcd&)> applyAdj;
};

LinearMap identity_map(const VSpace& s);
LinearMap adjoint_map(const LinearMap& A);
LinearMap compose(const LinearMap& A, const LinearMap& B);  // x -> A(B(x))
LinearMap add(const LinearMap& A, const LinearMap& B);
LinearMap scale(cd s, const LinearMap& A);

// max over `trials` seeded random pairs of
// |<Ax,y>_cod - <x,A*y>_dom| / (|<Ax,y>| + |<x,A*y>| + eps_floor)
double adjoint_error(const LinearMap& A, int trials = 10, std::uint64_t seed = 1234);

// Dense matrix of a small map (tests, cross-checks).
MatrixXcd materialize(const LinearMap& A);

struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

struct KrylovOptions {
  double tol = 1e-10;
  int restart = 50;
  Index max_iters = 0;  // 0: 10 * dimension
};

struct SolveFailure : std::runtime_error {
  SolveReport report;
  SolveFailure(const std::string& msg, const SolveReport& r) : std::runtime_error(msg), report(r) {}
};

using Precond = std::function<VectorXcd(const VectorXcd&)>;

// Restarted GMRES (modified Gram-Schmidt + Givens), optional left
// preconditioner. Convergence is decided on the true relative residual
// ||b - A x|| / ||b||; non-convergence throws SolveFailure carrying the
// report. Deterministic: fixed-order reductions, no threading.
VectorXcd krylov_solve(const LinearMap& A, const VectorXcd& b, const KrylovOptions& opt,
                       SolveReport* report = nullptr, const Precond& M = nullptr,
                       const VectorXcd* x0 = nullptr);

// (cbar * (-Delta_h) + sigma)^{-1} applied componentwise to C^n node data.
Precond make_shifted_laplacian_precond(const Grid& g, int n, double cbar, double sigma);
// Pseudo-inverse of cbar * (-Delta_h) on zero-mean data (k = 0 mode dropped).
Precond make_zero_mean_laplacian_precond(const Grid& g, int n, double cbar);

}  // namespace homog
