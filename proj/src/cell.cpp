#include "homog/cell.hpp"

#include "homog/runtime.hpp"

#include <Eigen/LU>

#include <cmath>
#include <filesystem>
#include <mutex>
#include <stdexcept>

namespace homog {

FaceField apply_face_coeff(const FaceCoefficient& A, const FaceField& G) {
  const Grid& g = A.grid;
  const int n = A.n, d = g.d;
  const Index dn = Index(d) * n, Nn = g.nodes();
  FaceField F(g, n);
  if (d == 1) {
    for (Index i = 0; i < Nn; ++i) {
      const cd* blk = A.v.data() + A.base(0, i);
      for (int a = 0; a < n; ++a) {
        cd acc = 0.0;
        for (int b = 0; b < n; ++b) acc += blk[a * dn + b] * G.at(0, i, b);
        F.at(0, i, a) = acc;
      }
    }
    return F;
  }
  VectorXcd w(dn);
  for (int k = 0; k < 2; ++k) {
    const int l = 1 - k;
    for (Index i = 0; i < Nn; ++i) {
      Index ikp = g.nbr(i, k, +1), ilm = g.nbr(i, l, -1), ikplm = g.nbr(ikp, l, -1);
      for (int b = 0; b < n; ++b) {
        w[k * n + b] = G.at(k, i, b);
        w[l * n + b] = 0.25 * (G.at(l, i, b) + G.at(l, ikp, b) + G.at(l, ilm, b) + G.at(l, ikplm, b));
      }
      const cd* blk = A.v.data() + A.base(k, i);
      for (int a = 0; a < n; ++a) {
        cd acc = 0.0;
        for (Index c = 0; c < dn; ++c) acc += blk[a * dn + c] * w[c];
        F.at(k, i, a) = acc;
      }
    }
  }
  return F;
}

FaceField apply_face_coeff_adjoint(const FaceCoefficient& A, const FaceField& H) {
  const Grid& g = A.grid;
  const int n = A.n, d = g.d;
  const Index dn = Index(d) * n, Nn = g.nodes();
  FaceField R(g, n);
  VectorXcd u(dn);
  for (int k = 0; k < d; ++k) {
    const int l = 1 - k;
    for (Index i = 0; i < Nn; ++i) {
      const cd* blk = A.v.data() + A.base(k, i);
      for (Index c = 0; c < dn; ++c) {
        cd acc = 0.0;
        for (int a = 0; a < n; ++a) acc += std::conj(blk[a * dn + c]) * H.at(k, i, a);
        u[c] = acc;
      }
      for (int b = 0; b < n; ++b) R.at(k, i, b) += u[k * n + b];
      if (d == 2) {
        Index ikp = g.nbr(i, k, +1), ilm = g.nbr(i, l, -1), ikplm = g.nbr(ikp, l, -1);
        for (int b = 0; b < n; ++b) {
          cd q = 0.25 * u[l * n + b];
          R.at(l, i, b) += q;
          R.at(l, ikp, b) += q;
          R.at(l, ilm, b) += q;
          R.at(l, ikplm, b) += q;
        }
      }
    }
  }
  return R;
}

double face_coeff_mean_re(const FaceCoefficient& A) {
  const Grid& g = A.grid;
  const int n = A.n;
  const Index dn = Index(g.d) * n, Nn = g.nodes();
  double acc = 0.0;
  for (int k = 0; k < g.d; ++k)
    for (Index i = 0; i < Nn; ++i) {
      const cd* blk = A.v.data() + A.base(k, i);
      for (int a = 0; a < n; ++a) acc += blk[a * dn + (k * n + a)].real();
    }
  return acc / double(g.d * Nn * n);
}

FaceCoefficient sample_cell_faces(const CoefficientField& f, const Vec2& x, const Grid& cell) {
  FaceCoefficient A(cell, f.n);
  const Index dn = Index(f.d) * f.n, Nn = cell.nodes();
  MatrixXcd full(dn, dn);
  for (int k = 0; k < cell.d; ++k)
    for (Index i = 0; i < Nn; ++i) {
      auto I = cell.unflatten(i);
      Vec2 y{0.0, 0.0};
      for (int m = 0; m < cell.d; ++m)
        y[m] = (m == k) ? cell_face_coord(cell, I[m]) : cell_node_coord(cell, I[m]);
      f.eval(x, y, full);
      cd* blk = A.v.data() + A.base(k, i);
      for (int a = 0; a < f.n; ++a)
        for (Index c = 0; c < dn; ++c) blk[a * dn + c] = full(k * f.n + a, c);
    }
  return A;
}

CoefficientField adjoint_field(const CoefficientField& f) {
  CoefficientField g = f;
  auto ev = f.eval;
  g.eval = [ev](const Vec2& x, const Vec2& y, MatrixXcd& out) {
    ev(x, y, out);
    out.adjointInPlace();
  };
  if (f.eval_ref) {
    auto evr = f.eval_ref;
    g.eval_ref = [evr](const Vec2& y, MatrixXcd& out) {
      evr(y, out);
      out.adjointInPlace();
    };
  }
  return g;
}

LinearMap cell_operator(const FaceCoefficient& A) {
  const Grid g = A.grid;
  const int n = A.n;
  VSpace s{g.nodes() * n, g.w()};
  LinearMap op;
  op.dom = op.cod = s;
  FaceCoefficient Ac = A;
  op.apply = [Ac, g, n](const VectorXcd& xv) {
    GridFunction u(g, n);
    u.v = xv;
    return div_adj(apply_face_coeff(Ac, grad(u))).v;
  };
  op.applyAdj = [Ac, g, n](const VectorXcd& yv) {
    GridFunction u(g, n);
    u.v = yv;
    return div_adj(apply_face_coeff_adjoint(Ac, grad(u))).v;
  };
  return op;
}

namespace {

FaceField unit_direction_field(const Grid& g, int n, int k, int j) {
  FaceField xi(g, n);
  for (Index i = 0; i < g.nodes(); ++i) xi.at(k, i, j) = 1.0;
  return xi;
}

CellSolve solve_sampled(const FaceCoefficient& A, int k, int j, double tol, SolveReport* rep) {
  const Grid& cell = A.grid;
  const int n = A.n;
  CellSolve out;
  if (cell.d == 1) {
    // Flux constancy: a_f (dN/h + e_j) = phi with phi fixed by periodicity.
    const Index Mc = cell.nodes();
    const double hy = cell.h();
    MatrixXcd minv = MatrixXcd::Zero(n, n), blk(n, n);
    std::vector<MatrixXcd> inv;
    inv.resize(size_t(Mc));
    for (Index i = 0; i < Mc; ++i) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) blk(a, b) = A.v[A.base(0, i) + a * n + b];
      inv[size_t(i)] = blk.partialPivLu().inverse();
      minv += inv[size_t(i)];
    }
    minv /= double(Mc);
    VectorXcd ej = VectorXcd::Zero(n);
    ej[j] = 1.0;
    VectorXcd phi = minv.partialPivLu().solve(ej);
    out.N = GridFunction(cell, n);
    out.Gy = FaceField(cell, n);
    VectorXcd cur = VectorXcd::Zero(n);
    for (Index i = 0; i < Mc; ++i) {
      for (int a = 0; a < n; ++a) out.N.at(i, a) = cur[a];
      VectorXcd gy = inv[size_t(i)] * phi - ej;
      for (int a = 0; a < n; ++a) out.Gy.at(0, i, a) = gy[a];
      cur += hy * gy;
    }
    out.N = cell_zero_mean(out.N);
    if (rep) *rep = SolveReport{0, 0.0, true};
    return out;
  }
  LinearMap op = cell_operator(A);
  FaceField xi = unit_direction_field(cell, n, k, j);
  VectorXcd rhs = (-1.0) * div_adj(apply_face_coeff(A, xi)).v;
  double cbar = face_coeff_mean_re(A);
  if (cbar <= 0) throw std::runtime_error("cell solve: nonpositive mean coefficient");
  Precond P = make_zero_mean_laplacian_precond(cell, n, cbar);
  KrylovOptions opt;
  opt.tol = tol;
  VectorXcd Nv = krylov_solve(op, rhs, opt, rep, P);
  out.N = GridFunction(cell, n);
  out.N.v = Nv;
  out.N = cell_zero_mean(out.N);
  out.Gy = grad(out.N);
  return out;
}

}  // namespace

CellSolve solve_cell(const CoefficientField& f, const Vec2& x, int k, int j, const Grid& cell,
                     double tol, SolveReport* rep) {
  return solve_sampled(sample_cell_faces(f, x, cell), k, j, tol, rep);
}

CellSolve solve_cell_adjoint(const CoefficientField& f, const Vec2& x, int k, int j,
                             const Grid& cell, double tol, SolveReport* rep) {
  return solve_cell(adjoint_field(f), x, k, j, cell, tol, rep);
}

double cell_weak_residual(const FaceCoefficient& A, const CellSolve& s, int k, int j) {
  FaceField tot = s.Gy;
  for (Index i = 0; i < A.grid.nodes(); ++i) tot.at(k, i, j) += 1.0;
  double num = l2_norm(div_adj(apply_face_coeff(A, tot)));
  FaceField xi = unit_direction_field(A.grid, A.n, k, j);
  double den = l2_norm(div_adj(apply_face_coeff(A, xi)));
  return den > 0 ? num / den : num;
}

CellSolutionTable build_table(const CoefficientField& f, const Grid& macro, const Grid& cell,
                              double tol) {
  CellSolutionTable t;
  t.macro = macro;
  t.cell = cell;
  t.shared = f.slow != SlowKind::General;
  const Index E = t.shared ? 1 : macro.nodes();
  const int dn = f.d * f.n;
  t.entries.resize(size_t(E));
  for (auto& e : t.entries) {
    e.N.resize(dn);
    e.Gy.resize(dn);
    e.Np.resize(dn);
    e.Gyp.resize(dn);
  }
  CoefficientField fadj = adjoint_field(f);

  std::mutex err_mtx;
  std::string first_error;
  const std::int64_t total = std::int64_t(E) * 2 * dn;
  runtime::parallel_for(total, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t wk = lo; wk < hi; ++wk) {
      Index e = Index(wk / (2 * dn));
      int rem = int(wk % (2 * dn));
      int twin = rem / dn, r = rem % dn;
      int k = r / f.n, j = r % f.n;
      Vec2 x{macro.coord(e, 0), macro.d == 2 ? macro.coord(e, 1) : 0.0};
      try {
        CellSolve s = solve_cell(twin ? fadj : f, x, k, j, cell, tol);
        CellEntry& ent = t.entries[size_t(e)];
        if (twin) {
          ent.Np[r] = std::move(s.N);
          ent.Gyp[r] = std::move(s.Gy);
        } else {
          ent.N[r] = std::move(s.N);
          ent.Gy[r] = std::move(s.Gy);
        }
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lk(err_mtx);
        if (first_error.empty())
          first_error = "cell solve failed at macro node " + std::to_string(e) + ", direction " +
                        std::to_string(r) + (twin ? " (adjoint)" : "") + ": " + ex.what();
      }
    }
  });
  if (!first_error.empty()) throw std::runtime_error(first_error);
  return t;
}

ClosedForm1D closed_form_1d(const CoefficientField& f, double x, int quad_points) {
  if (f.d != 1 || f.n != 1) throw std::runtime_error("closed_form_1d: requires d = n = 1");
  MatrixXcd a(1, 1);
  cd acc = 0.0;
  for (int q = 0; q < quad_points; ++q) {
    Vec2 y{-0.5 + (q + 0.5) / double(quad_points), 0.0};
    f.eval(Vec2{x, 0.0}, y, a);
    acc += 1.0 / a(0, 0);
  }
  ClosedForm1D out;
  out.A0 = double(quad_points) / acc;
  cd A0 = out.A0;
  auto ev = f.eval;
  out.grad_profile = [ev, x, A0](double y) {
    MatrixXcd a1(1, 1);
    ev(Vec2{x, 0.0}, Vec2{y, 0.0}, a1);
    return A0 / a1(0, 0) - 1.0;
  };
  return out;
}

void export_cell_csv(const CellSolutionTable& t, Index macro_node, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const CellEntry& e = t.at(macro_node);
  for (size_t r = 0; r < e.N.size(); ++r) {
    write_grid_csv(dir + "/cell_N_dir" + std::to_string(r) + ".csv", e.N[r]);
    write_grid_csv(dir + "/cell_Nplus_dir" + std::to_string(r) + ".csv", e.Np[r]);
  }
}

int default_cell_points(int d) { return d == 1 ? 256 : 64; }

}  // namespace homog
