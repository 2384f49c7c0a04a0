#include "homog/effective.hpp"

#include "homog/runtime.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <stdexcept>

namespace homog {

namespace {

// One column of A0 at macro point x from the cell solution of direction r.
void a0_columns(const CoefficientField& f, const Vec2& x, const Grid& cell, const CellEntry& ent,
                MatrixXcd& out) {
  const int dn = f.d * f.n;
  FaceCoefficient A = sample_cell_faces(f, x, cell);
  for (int r = 0; r < dn; ++r) {
    int k = r / f.n, j = r % f.n;
    FaceField tot = ent.Gy[r];
    for (Index i = 0; i < cell.nodes(); ++i) tot.at(k, i, j) += 1.0;
    FaceField flux = apply_face_coeff(A, tot);
    for (int kk = 0; kk < f.d; ++kk)
      for (int a = 0; a < f.n; ++a) {
        cd acc = 0.0;
        for (Index i = 0; i < cell.nodes(); ++i) acc += flux.at(kk, i, a);
        out(kk * f.n + a, r) = acc / double(cell.nodes());
      }
  }
}

}  // namespace

EffectiveField assemble_effective(const CoefficientField& f, const CellSolutionTable& table) {
  const Grid& macro = table.macro;
  const Grid& cell = table.cell;
  const int dn = f.d * f.n;
  EffectiveField eff;
  eff.macro = macro;
  eff.n = f.n;
  eff.c_A = f.c_A;
  eff.C_A = f.C_A;
  eff.sup_norm = f.sup_norm;
  eff.self_adjoint = f.self_adjoint;
  // Lipschitz bound of A0 via the cell-solution bounds: |A0|_{C^0,1} <=
  // sup|A| * lip(grad N) + lip(A) * sup(1 + |grad N|).
  double gsup = 1.0 + f.sup_norm / f.c_A;
  double glip = (1.0 + f.sup_norm / f.c_A) * f.lipschitz_x / f.c_A;
  eff.lip_bound = f.sup_norm * glip + f.lipschitz_x * gsup;
  eff.A0.resize(size_t(macro.nodes()));

  if (f.slow != SlowKind::General) {
    // Single reference tensor; scalar-factor fields scale it by c(x).
    CoefficientField ref;
    ref.d = f.d;
    ref.n = f.n;
    auto evr = f.eval_ref;
    ref.eval = [evr](const Vec2&, const Vec2& y, MatrixXcd& out) { evr(y, out); };
    MatrixXcd A0ref(dn, dn);
    a0_columns(ref, Vec2{0.0, 0.0}, cell, table.entries[0], A0ref);
    for (Index i = 0; i < macro.nodes(); ++i) {
      double c = 1.0;
      if (f.slow == SlowKind::ScalarFactor) {
        Vec2 x{macro.coord(i, 0), macro.d == 2 ? macro.coord(i, 1) : 0.0};
        c = f.slow_scalar(x);
      }
      eff.A0[size_t(i)] = c * A0ref;
    }
    return eff;
  }

  std::mutex err_mtx;
  std::string first_error;
  runtime::parallel_for(macro.nodes(), [&](std::int64_t lo, std::int64_t hi) {
    MatrixXcd out(dn, dn);
    for (std::int64_t i = lo; i < hi; ++i) {
      try {
        Vec2 x{macro.coord(i, 0), macro.d == 2 ? macro.coord(i, 1) : 0.0};
        a0_columns(f, x, cell, table.at(i), out);
        eff.A0[size_t(i)] = out;
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lk(err_mtx);
        if (first_error.empty())
          first_error = "effective assembly failed at node " + std::to_string(i) + ": " + ex.what();
      }
    }
  });
  if (!first_error.empty()) throw std::runtime_error(first_error);
  return eff;
}

FaceCoefficient effective_faces(const EffectiveField& eff) {
  const Grid& g = eff.macro;
  const int n = eff.n;
  const Index dn = Index(g.d) * n;
  FaceCoefficient A(g, n);
  for (int k = 0; k < g.d; ++k)
    for (Index i = 0; i < g.nodes(); ++i) {
      Index ip = g.nbr(i, k, +1);
      cd* blk = A.v.data() + A.base(k, i);
      for (int a = 0; a < n; ++a)
        for (Index c = 0; c < dn; ++c)
          blk[a * dn + c] = 0.5 * (eff.A0[size_t(i)](k * n + a, c) + eff.A0[size_t(ip)](k * n + a, c));
    }
  return A;
}

cd default_mu(const CoefficientField& f) { return cd(-(1.0 + f.C_A), 0.0); }

GridFunction ResolventSolver::solve(const GridFunction& f, SolveReport* rep) const {
  KrylovOptions opt;
  opt.tol = tol;
  GridFunction u(grid, n);
  u.v = krylov_solve(op, f.v, opt, rep, P);
  return u;
}

GridFunction ResolventSolver::solve_adjoint(const GridFunction& g, SolveReport* rep) const {
  KrylovOptions opt;
  opt.tol = tol;
  GridFunction u(grid, n);
  u.v = krylov_solve(adjoint_map(op), g.v, opt, rep, P);
  return u;
}

ResolventSolver make_effective_solver(const EffectiveField& eff, cd mu, double tol) {
  Sector s{eff.sup_norm / eff.c_A, eff.C_A};
  if (sector_contains(s, mu))
    throw std::runtime_error("effective solver: mu = (" + format_g17(mu.real()) + "," +
                             format_g17(mu.imag()) + ") lies inside the coefficient sector");
  ResolventSolver rs;
  rs.grid = eff.macro;
  rs.n = eff.n;
  rs.mu = mu;
  rs.tol = tol;
  FaceCoefficient A0f = effective_faces(eff);
  const Grid g = eff.macro;
  const int n = eff.n;
  VSpace sp{g.nodes() * n, g.w()};
  rs.op.dom = rs.op.cod = sp;
  rs.op.apply = [A0f, g, n, mu](const VectorXcd& xv) {
    GridFunction u(g, n);
    u.v = xv;
    VectorXcd r = div_adj(apply_face_coeff(A0f, grad(u))).v;
    r -= mu * xv;
    return r;
  };
  rs.op.applyAdj = [A0f, g, n, mu](const VectorXcd& yv) {
    GridFunction u(g, n);
    u.v = yv;
    VectorXcd r = div_adj(apply_face_coeff_adjoint(A0f, grad(u))).v;
    r -= std::conj(mu) * yv;
    return r;
  };
  double cbar = face_coeff_mean_re(A0f);
  double sigma = std::max(-mu.real(), 0.0) + std::abs(mu.imag());
  if (cbar <= 0 || sigma <= 0)
    throw std::runtime_error("effective solver: preconditioner symbol not positive");
  rs.P = make_shifted_laplacian_precond(g, n, cbar, sigma);
  return rs;
}

GridFunction effective_resolvent(const EffectiveField& eff, cd mu, const GridFunction& f,
                                 double tol, SolveReport* rep) {
  return make_effective_solver(eff, mu, tol).solve(f, rep);
}

double effective_lh_min(const EffectiveField& eff, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int d = eff.d(), n = eff.n;
  VectorXcd w(eff.bn());
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Vec2 xi{0.0, 0.0};
    double nrm = 0.0;
    while (nrm < 1e-8) {
      nrm = 0.0;
      for (int k = 0; k < d; ++k) {
        xi[k] = nd(rng);
        nrm += xi[k] * xi[k];
      }
      nrm = std::sqrt(nrm);
    }
    for (int k = 0; k < d; ++k) xi[k] /= nrm;
    VectorXcd eta = randn_cvec(n, rng());
    eta /= eta.norm();
    for (int k = 0; k < d; ++k)
      for (int a = 0; a < n; ++a) w[k * n + a] = xi[k] * eta[a];
    for (const auto& A : eff.A0) worst = std::min(worst, (w.dot(A * w)).real());
  }
  return worst;
}

void write_effective_csv(const std::string& path, const EffectiveField& eff) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const Grid& g = eff.macro;
  const int bn = eff.bn();
  out << (g.d == 1 ? "i" : "i,j");
  for (int r = 0; r < bn; ++r)
    for (int c = 0; c < bn; ++c) out << ",re" << r << c << ",im" << r << c;
  out << "\n";
  for (Index i = 0; i < g.nodes(); ++i) {
    auto I = g.unflatten(i);
    out << I[0];
    if (g.d == 2) out << "," << I[1];
    const MatrixXcd& A = eff.A0[size_t(i)];
    for (int r = 0; r < bn; ++r)
      for (int c = 0; c < bn; ++c)
        out << "," << format_g17(A(r, c).real()) << "," << format_g17(A(r, c).imag());
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace homog
