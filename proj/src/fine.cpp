#include "homog/fine.hpp"

#include <cmath>
#include <stdexcept>

namespace homog {

int min_points_per_period(int d) { return d == 1 ? 32 : 16; }

FineScale validate_eps(const Grid& macro, double eps) {
  if (!(eps > 0) || eps > 1.0)
    throw std::runtime_error("epsilon schedule: eps = " + format_g17(eps) +
                             " outside (0, 1]");
  double mr = macro.L / eps;
  int m = int(std::lround(mr));
  if (m < 1 || std::abs(mr - m) > 1e-9 * m)
    throw std::runtime_error("epsilon schedule: eps = " + format_g17(eps) +
                             " is not L/m for integer m (L = " + format_g17(macro.L) + ")");
  if (macro.M % m != 0)
    throw std::runtime_error("epsilon schedule: m = " + std::to_string(m) +
                             " does not divide M = " + std::to_string(macro.M));
  int p = macro.M / m;
  if (p < min_points_per_period(macro.d))
    throw std::runtime_error("epsilon schedule: only " + std::to_string(p) +
                             " grid points per fast period, need >= " +
                             std::to_string(min_points_per_period(macro.d)));
  return FineScale{eps, m, p};
}

EpsilonSchedule make_schedule(const Grid& macro, const std::vector<double>& eps_values) {
  EpsilonSchedule s;
  s.macro = macro;
  s.scales.reserve(eps_values.size());
  for (double e : eps_values) s.scales.push_back(validate_eps(macro, e));
  return s;
}

FaceCoefficient sample_fine_faces(const CoefficientField& f, const Grid& macro, double eps) {
  validate_eps(macro, eps);
  FaceCoefficient A(macro, f.n);
  const Index dn = Index(f.d) * f.n, Nn = macro.nodes();
  MatrixXcd full(dn, dn);
  const double h = macro.h();
  for (int k = 0; k < macro.d; ++k)
    for (Index i = 0; i < Nn; ++i) {
      auto I = macro.unflatten(i);
      Vec2 x{0.0, 0.0}, y{0.0, 0.0};
      for (int mdim = 0; mdim < macro.d; ++mdim) {
        x[mdim] = (I[mdim] + (mdim == k ? 0.5 : 0.0)) * h;
        y[mdim] = wrap_cell(x[mdim] / eps);
      }
      f.eval(x, y, full);
      cd* blk = A.v.data() + A.base(k, i);
      for (int a = 0; a < f.n; ++a)
        for (Index c = 0; c < dn; ++c) blk[a * dn + c] = full(k * f.n + a, c);
    }
  return A;
}

namespace {

LinearMap operator_from_faces(const FaceCoefficient& A, cd mu) {
  const Grid g = A.grid;
  const int n = A.n;
  VSpace sp{g.nodes() * n, g.w()};
  LinearMap op;
  op.dom = op.cod = sp;
  op.apply = [A, g, n, mu](const VectorXcd& xv) {
    GridFunction u(g, n);
    u.v = xv;
    VectorXcd r = div_adj(apply_face_coeff(A, grad(u))).v;
    if (mu != cd(0.0)) r -= mu * xv;
    return r;
  };
  op.applyAdj = [A, g, n, mu](const VectorXcd& yv) {
    GridFunction u(g, n);
    u.v = yv;
    VectorXcd r = div_adj(apply_face_coeff_adjoint(A, grad(u))).v;
    if (mu != cd(0.0)) r -= std::conj(mu) * yv;
    return r;
  };
  return op;
}

}  // namespace

LinearMap assemble_fine(const CoefficientField& f, const Grid& macro, double eps) {
  return operator_from_faces(sample_fine_faces(f, macro, eps), 0.0);
}

GridFunction FineSolver::solve(const GridFunction& f, SolveReport* rep) const {
  KrylovOptions opt;
  opt.tol = tol;
  GridFunction u(grid, n);
  u.v = krylov_solve(op, f.v, opt, rep, P);
  return u;
}

GridFunction FineSolver::solve_adjoint(const GridFunction& g, SolveReport* rep) const {
  KrylovOptions opt;
  opt.tol = tol;
  GridFunction u(grid, n);
  u.v = krylov_solve(adjoint_map(op), g.v, opt, rep, P);
  return u;
}

FineSolver make_fine_solver(const CoefficientField& f, const Grid& macro, double eps, cd mu,
                            double tol) {
  Sector s = sector_of(f);
  if (sector_contains(s, mu))
    throw std::runtime_error("fine solver: mu = (" + format_g17(mu.real()) + "," +
                             format_g17(mu.imag()) + ") lies inside the coefficient sector");
  FineSolver fs;
  fs.grid = macro;
  fs.n = f.n;
  fs.mu = mu;
  fs.tol = tol;
  FaceCoefficient A = sample_fine_faces(f, macro, eps);
  fs.op = operator_from_faces(A, mu);
  double cbar = face_coeff_mean_re(A);
  double sigma = std::max(-mu.real(), 0.0) + std::abs(mu.imag());
  if (cbar <= 0 || sigma <= 0)
    throw std::runtime_error("fine solver: preconditioner symbol not positive");
  fs.P = make_shifted_laplacian_precond(macro, f.n, cbar, sigma);
  return fs;
}

GridFunction fine_resolvent(const CoefficientField& f, const Grid& macro, double eps, cd mu,
                            const GridFunction& rhs, double tol, SolveReport* rep) {
  return make_fine_solver(f, macro, eps, mu, tol).solve(rhs, rep);
}

double fine_coercivity_margin(const CoefficientField& f, const Grid& macro, double eps, int trials,
                              std::uint64_t seed) {
  FaceCoefficient A = sample_fine_faces(f, macro, eps);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    GridFunction u(macro, f.n);
    u.v = randn_cvec(macro.nodes() * f.n, seed + t);
    FaceField G = grad(u);
    double num = (face_inner(apply_face_coeff(A, G), G)).real() + f.C_A * l2_norm(u) * l2_norm(u);
    double den = face_norm(G);
    worst = std::min(worst, num / (den * den));
  }
  return worst;
}

}  // namespace homog
