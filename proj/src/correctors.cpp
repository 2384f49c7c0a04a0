#include "homog/correctors.hpp"

#include "homog/runtime.hpp"

#include <iostream>
#include <stdexcept>

namespace homog {

namespace {

using Eigen::Map;

// column-major dn x dn block j of a flat cache
inline Map<const MatrixXcd> blk(const VectorXcd& v, Index j, int dn) {
  return Map<const MatrixXcd>(v.data() + j * dn * dn, dn, dn);
}

inline Vec2 macro_x(const Grid& g, Index node) {
  auto I = g.unflatten(node);
  return {I[0] * g.h(), g.d == 2 ? I[1] * g.h() : 0.0};
}

inline Vec2 cell_y(const Grid& c, Index cnode) {
  auto J = c.unflatten(cnode);
  return {cell_node_coord(c, J[0]), c.d == 2 ? cell_node_coord(c, J[1]) : 0.0};
}

NodeField pgrad(const GridFunction& u) { return avg_face_to_node(grad(u)); }

GridFunction pgrad_adj(const NodeField& w) { return div_adj(avg_node_to_face(w)); }

// n x dn matrix of cell solutions N_r(y_j) (columns = directions).
MatrixXcd ntab_at(const CellEntry& e, bool plus, Index cnode, int n, int dn) {
  const auto& tab = plus ? e.Np : e.N;
  MatrixXcd Nm(n, dn);
  for (int r = 0; r < dn; ++r)
    for (int a = 0; a < n; ++a) Nm(a, r) = tab[r].at(cnode, a);
  return Nm;
}

// K^eps tail given the node gradient of the already-solved u0:
// out(i) = sum_t w_t N(x_{i+s}, j(i)) w(x_{i+s}); shared tables collapse the
// window onto a Steklov mean of w.
GridFunction window_multiply(const CorrectorBundle& b, const SmoothingOps& sm, const NodeField& w,
                             bool plus) {
  const Grid& g = b.macro;
  const int n = b.n(), dn = b.bn();
  const Index cn = b.cell.nodes();
  GridFunction out(g, n);
  if (b.table.shared) {
    GridFunction tmp(g, dn);
    tmp.v = w.v;
    tmp = steklov(sm, tmp);
    std::vector<MatrixXcd> Nj;
    Nj.resize(size_t(cn));
    for (Index j = 0; j < cn; ++j) Nj[size_t(j)] = ntab_at(b.table.entries[0], plus, j, n, dn);
    for (Index i = 0; i < g.nodes(); ++i) {
      const MatrixXcd& Nm = Nj[size_t(sm.fast_node_flat(i))];
      for (int a = 0; a < n; ++a) {
        cd acc = 0.0;
        for (int r = 0; r < dn; ++r) acc += Nm(a, r) * tmp.v[i * dn + r];
        out.at(i, a) = acc;
      }
    }
    return out;
  }
  ZWindow zw = z_window(sm.p);
  const int M = g.M, nw = int(zw.s.size());
  for (Index i = 0; i < g.nodes(); ++i) {
    auto I = g.unflatten(i);
    Index jn = sm.fast_node_flat(i);
    if (g.d == 1) {
      for (int t = 0; t < nw; ++t) {
        Index u = g.wrap(I[0] + zw.s[t]);
        MatrixXcd Nm = ntab_at(b.table.at(u), plus, jn, n, dn);
        for (int a = 0; a < n; ++a) {
          cd acc = 0.0;
          for (int r = 0; r < dn; ++r) acc += Nm(a, r) * w.v[u * dn + r];
          out.at(i, a) += zw.w[t] * acc;
        }
      }
    } else {
      for (int t0 = 0; t0 < nw; ++t0)
        for (int t1 = 0; t1 < nw; ++t1) {
          Index u = Index(g.wrap(I[0] + zw.s[t0])) * M + g.wrap(I[1] + zw.s[t1]);
          double wt = zw.w[t0] * zw.w[t1];
          MatrixXcd Nm = ntab_at(b.table.at(u), plus, jn, n, dn);
          for (int a = 0; a < n; ++a) {
            cd acc = 0.0;
            for (int r = 0; r < dn; ++r) acc += Nm(a, r) * w.v[u * dn + r];
            out.at(i, a) += wt * acc;
          }
        }
    }
  }
  return out;
}

// Exact adjoint of window_multiply as a map grid -> node field:
// wtil(l, r) = sum_t w_t conj(N_r(x_l, j(l - s))) g(l - s).
NodeField window_multiply_adj(const CorrectorBundle& b, const SmoothingOps& sm,
                              const GridFunction& gfun, bool plus) {
  const Grid& g = b.macro;
  const int n = b.n(), dn = b.bn();
  NodeField out(g, n);
  if (b.table.shared) {
    const CellEntry& e0 = b.table.entries[0];
    GridFunction psi(g, dn);
    for (Index u = 0; u < g.nodes(); ++u) {
      MatrixXcd Nm = ntab_at(e0, plus, sm.fast_node_flat(u), n, dn);
      for (int r = 0; r < dn; ++r) {
        cd acc = 0.0;
        for (int a = 0; a < n; ++a) acc += std::conj(Nm(a, r)) * gfun.at(u, a);
        psi.v[u * dn + r] = acc;
      }
    }
    psi = steklov(sm, psi);
    out.v = psi.v;
    return out;
  }
  ZWindow zw = z_window(sm.p);
  const int M = g.M, nw = int(zw.s.size());
  for (Index l = 0; l < g.nodes(); ++l) {
    auto I = g.unflatten(l);
    if (g.d == 1) {
      for (int t = 0; t < nw; ++t) {
        Index u = g.wrap(I[0] - zw.s[t]);
        MatrixXcd Nm = ntab_at(b.table.at(l), plus, sm.fast_node_flat(u), n, dn);
        for (int r = 0; r < dn; ++r) {
          cd acc = 0.0;
          for (int a = 0; a < n; ++a) acc += std::conj(Nm(a, r)) * gfun.at(u, a);
          out.v[l * dn + r] += zw.w[t] * acc;
        }
      }
    } else {
      for (int t0 = 0; t0 < nw; ++t0)
        for (int t1 = 0; t1 < nw; ++t1) {
          Index u = Index(g.wrap(I[0] - zw.s[t0])) * M + g.wrap(I[1] - zw.s[t1]);
          double wt = zw.w[t0] * zw.w[t1];
          MatrixXcd Nm = ntab_at(b.table.at(l), plus, sm.fast_node_flat(u), n, dn);
          for (int r = 0; r < dn; ++r) {
            cd acc = 0.0;
            for (int a = 0; a < n; ++a) acc += std::conj(Nm(a, r)) * gfun.at(u, a);
            out.v[l * dn + r] += wt * acc;
          }
        }
    }
  }
  return out;
}

// Slice contraction, forward route: Xi(i,r) = (1/cn) sum_j conj(N~_r(x_i,y_j))
// . (P grad_x)*[ A~ Ghat~ w ](i), the exact L2(x) adjoint image of the flux
// slices. Family selection: plus = false pairs (A, Ghat, N+), plus = true
// pairs (A*, Ghat+, N).
NodeField xi_forward(const CorrectorBundle& b, const NodeField& w, bool plus) {
  const Grid& g = b.macro;
  const int n = b.n(), dn = b.bn();
  const Index cn = b.cell.nodes();
  const bool scalar = b.field.slow == SlowKind::ScalarFactor;
  NodeField xi(g, n);
  MatrixXcd Aj(dn, dn), Am(dn, dn);
  NodeField phi(g, n);
  for (Index j = 0; j < cn; ++j) {
    Vec2 y = cell_y(b.cell, j);
    if (b.table.shared) {
      b.field.eval_ref(y, Aj);
      MatrixXcd P = plus ? MatrixXcd(Aj.adjoint() * blk(b.ghatp[0], j, dn))
                         : MatrixXcd(Aj * blk(b.ghat[0], j, dn));
      for (Index i = 0; i < g.nodes(); ++i) {
        double c = scalar ? b.slow[i] : 1.0;
        Map<Eigen::VectorXcd>(phi.v.data() + i * dn, dn) =
            c * (P * Map<const Eigen::VectorXcd>(w.v.data() + i * dn, dn));
      }
    } else {
      for (Index i = 0; i < g.nodes(); ++i) {
        b.field.eval(macro_x(g, i), y, Am);
        const auto G = blk(plus ? b.ghatp[size_t(i)] : b.ghat[size_t(i)], j, dn);
        Eigen::VectorXcd v = G * Map<const Eigen::VectorXcd>(w.v.data() + i * dn, dn);
        Map<Eigen::VectorXcd>(phi.v.data() + i * dn, dn) = plus ? (Am.adjoint() * v).eval() : (Am * v).eval();
      }
    }
    GridFunction Wj = pgrad_adj(phi);
    if (b.table.shared) {
      MatrixXcd Nm = ntab_at(b.table.entries[0], !plus, j, n, dn);
      for (Index i = 0; i < g.nodes(); ++i)
        for (int r = 0; r < dn; ++r) {
          cd acc = 0.0;
          for (int a = 0; a < n; ++a) acc += std::conj(Nm(a, r)) * Wj.at(i, a);
          xi.v[i * dn + r] += acc / double(cn);
        }
    } else {
      for (Index i = 0; i < g.nodes(); ++i) {
        MatrixXcd Nm = ntab_at(b.table.at(i), !plus, j, n, dn);
        for (int r = 0; r < dn; ++r) {
          cd acc = 0.0;
          for (int a = 0; a < n; ++a) acc += std::conj(Nm(a, r)) * Wj.at(i, a);
          xi.v[i * dn + r] += acc / double(cn);
        }
      }
    }
  }
  return xi;
}

// Slice contraction, reverse route (adjoint partner of xi_forward):
// Xi(i) = (1/cn) sum_j Ghat~(j)^* A~(x_i,y_j)^* P grad_x [ N~(.,y_j) v ](i).
NodeField xi_reverse(const CorrectorBundle& b, const NodeField& v, bool plus) {
  const Grid& g = b.macro;
  const int n = b.n(), dn = b.bn();
  const Index cn = b.cell.nodes();
  const bool scalar = b.field.slow == SlowKind::ScalarFactor;
  NodeField xi(g, n);
  MatrixXcd Aj(dn, dn), Am(dn, dn);
  GridFunction Wj(g, n);
  for (Index j = 0; j < cn; ++j) {
    Vec2 y = cell_y(b.cell, j);
    if (b.table.shared) {
      MatrixXcd Nm = ntab_at(b.table.entries[0], !plus, j, n, dn);
      for (Index i = 0; i < g.nodes(); ++i)
        for (int a = 0; a < n; ++a) {
          cd acc = 0.0;
          for (int r = 0; r < dn; ++r) acc += Nm(a, r) * v.v[i * dn + r];
          Wj.at(i, a) = acc;
        }
    } else {
      for (Index i = 0; i < g.nodes(); ++i) {
        MatrixXcd Nm = ntab_at(b.table.at(i), !plus, j, n, dn);
        for (int a = 0; a < n; ++a) {
          cd acc = 0.0;
          for (int r = 0; r < dn; ++r) acc += Nm(a, r) * v.v[i * dn + r];
          Wj.at(i, a) = acc;
        }
      }
    }
    NodeField psi = pgrad(Wj);
    if (b.table.shared) {
      b.field.eval_ref(y, Aj);
      MatrixXcd P = plus ? MatrixXcd(blk(b.ghatp[0], j, dn).adjoint() * Aj)
                         : MatrixXcd(blk(b.ghat[0], j, dn).adjoint() * Aj.adjoint());
      for (Index i = 0; i < g.nodes(); ++i) {
        double c = scalar ? b.slow[i] : 1.0;
        Map<Eigen::VectorXcd>(xi.v.data() + i * dn, dn) +=
            (c / double(cn)) * (P * Map<const Eigen::VectorXcd>(psi.v.data() + i * dn, dn));
      }
    } else {
      for (Index i = 0; i < g.nodes(); ++i) {
        b.field.eval(macro_x(g, i), y, Am);
        const auto G = blk(plus ? b.ghatp[size_t(i)] : b.ghat[size_t(i)], j, dn);
        Eigen::VectorXcd t =
            plus ? Eigen::VectorXcd(Am * Map<const Eigen::VectorXcd>(psi.v.data() + i * dn, dn))
                 : Eigen::VectorXcd(Am.adjoint() * Map<const Eigen::VectorXcd>(psi.v.data() + i * dn, dn));
        Map<Eigen::VectorXcd>(xi.v.data() + i * dn, dn) += (G.adjoint() * t) / double(cn);
      }
    }
  }
  return xi;
}

// Mhat w / Mhat^* w, node-pointwise.
NodeField mhat_multiply(const CorrectorEpsOps& ops, const NodeField& w, bool adjoint) {
  const CorrectorBundle& b = *ops.base;
  const int dn = b.bn();
  NodeField out(b.macro, b.n());
  for (Index i = 0; i < b.macro.nodes(); ++i) {
    auto Mi = blk(ops.mhat, i, dn);
    auto wi = Map<const Eigen::VectorXcd>(w.v.data() + i * dn, dn);
    Map<Eigen::VectorXcd>(out.v.data() + i * dn, dn) = adjoint ? (Mi.adjoint() * wi).eval() : (Mi * wi).eval();
  }
  return out;
}

GridFunction res_solve(const CorrectorBundle& b, const GridFunction& rhs, bool adjoint) {
  return adjoint ? b.solver.solve_adjoint(rhs) : b.solver.solve(rhs);
}

}  // namespace

CorrectorBundle make_corrector_bundle(const CoefficientField& f, const Grid& macro, cd mu,
                                      int cell_points, double tol) {
  CorrectorBundle b;
  b.field = f;
  b.macro = macro;
  int Mc = cell_points > 0 ? cell_points : default_cell_points(f.d);
  b.cell = make_cell_grid(f.d, Mc);
  b.mu = mu;
  b.tol = tol;
  std::cout << "corrector bundle: cell table " << (f.slow != SlowKind::General ? "(shared) " : "")
            << "at M_c = " << Mc << "\n";
  b.table = build_table(f, macro, b.cell, std::min(tol, 1e-12));
  b.eff = assemble_effective(f, b.table);
  b.solver = make_effective_solver(b.eff, mu, tol);
  const int n = f.n, dn = f.d * f.n;
  const Index cn = b.cell.nodes();
  auto build_ghat = [&](const CellEntry& e, bool plus) {
    const auto& Gy = plus ? e.Gyp : e.Gy;
    VectorXcd gh = VectorXcd::Zero(cn * dn * dn);
    for (Index j = 0; j < cn; ++j)
      for (int r = 0; r < dn; ++r)
        for (int l = 0; l < f.d; ++l)
          for (int a = 0; a < n; ++a) {
            int row = l * n + a;
            cd val = 0.5 * (Gy[r].at(l, b.cell.nbr(j, l, -1), a) + Gy[r].at(l, j, a));
            if (row == r) val += 1.0;
            gh[(j * dn + r) * dn + row] = val;
          }
    return gh;
  };
  size_t ne = b.table.entries.size();
  b.ghat.resize(ne);
  b.ghatp.resize(ne);
  for (size_t e = 0; e < ne; ++e) {
    b.ghat[e] = build_ghat(b.table.entries[e], false);
    b.ghatp[e] = build_ghat(b.table.entries[e], true);
  }
  if (f.slow == SlowKind::ScalarFactor) {
    b.slow.resize(macro.nodes());
    for (Index i = 0; i < macro.nodes(); ++i) b.slow[i] = f.slow_scalar(macro_x(macro, i));
  }
  return b;
}

CorrectorEpsOps make_eps_ops(const CorrectorBundle& b, double eps) {
  CorrectorEpsOps ops;
  ops.base = &b;
  ops.fs = validate_eps(b.macro, eps);
  ops.sm = make_smoothing(b.macro, b.cell, eps);
  const Grid& g = b.macro;
  const int dn = b.bn(), Mc = b.cell.M, nn = b.n();
  const Index nodes = g.nodes();
  ops.mhat = VectorXcd::Zero(nodes * dn * dn);
  if (b.field.slow == SlowKind::Uniform) return ops;  // no slow increment
  ZWindow zw = z_window(ops.sm.p);
  const int nw = int(zw.s.size());
  // reference samples at every cell node for the scalar-factor fast path
  std::vector<MatrixXcd> Aref;
  if (b.field.slow == SlowKind::ScalarFactor) {
    Aref.resize(size_t(b.cell.nodes()));
    for (Index j = 0; j < b.cell.nodes(); ++j) {
      Aref[size_t(j)].resize(dn, dn);
      b.field.eval_ref(cell_y(b.cell, j), Aref[size_t(j)]);
    }
  }
  (void)nn;
  runtime::parallel_for(nodes, [&](std::int64_t lo, std::int64_t hi) {
    MatrixXcd Al(dn, dn), Au(dn, dn), acc(dn, dn);
    for (Index i = lo; i < hi; ++i) {
      auto I = g.unflatten(i);
      acc.setZero();
      auto add_term = [&](double wt, int u0, int u1) {
        Index u = g.d == 1 ? Index(u0) : Index(u0) * g.M + u1;
        Index jf = g.d == 1 ? Index(ops.sm.fast_node(u0))
                            : Index(ops.sm.fast_node(u0)) * Mc + ops.sm.fast_node(u1);
        const auto G = blk(b.ghat_at(i, false), jf, dn);
        const auto Gp = blk(b.ghat_at(i, true), jf, dn);
        if (b.field.slow == SlowKind::ScalarFactor) {
          double dc = b.slow[i] - b.slow[u];
          acc.noalias() += (-wt / ops.fs.eps * dc) * (Gp.adjoint() * Aref[size_t(jf)] * G);
        } else {
          Vec2 y = cell_y(b.cell, jf);
          b.field.eval(macro_x(g, i), y, Al);
          b.field.eval(macro_x(g, u), y, Au);
          acc.noalias() += (-wt / ops.fs.eps) * (Gp.adjoint() * (Al - Au) * G);
        }
      };
      if (g.d == 1) {
        for (int t = 0; t < nw; ++t) add_term(zw.w[t], g.wrap(I[0] - zw.s[t]), 0);
      } else {
        for (int t0 = 0; t0 < nw; ++t0)
          for (int t1 = 0; t1 < nw; ++t1)
            add_term(zw.w[t0] * zw.w[t1], g.wrap(I[0] - zw.s[t0]), g.wrap(I[1] - zw.s[t1]));
      }
      for (int col = 0; col < dn; ++col)
        for (int row = 0; row < dn; ++row) ops.mhat[(i * dn + col) * dn + row] = acc(row, col);
    }
  });
  return ops;
}

TwoScaleFunction corrector_K(const CorrectorBundle& b, const GridFunction& f) {
  GridFunction u0 = b.solver.solve(f);
  NodeField w = pgrad(u0);
  const int n = b.n(), dn = b.bn();
  TwoScaleFunction U(b.macro, b.cell, n);
  for (Index i = 0; i < b.macro.nodes(); ++i) {
    const CellEntry& e = b.table.at(i);
    for (Index j = 0; j < b.cell.nodes(); ++j)
      for (int a = 0; a < n; ++a) {
        cd acc = 0.0;
        for (int r = 0; r < dn; ++r) acc += e.N[r].at(j, a) * w.v[i * dn + r];
        U.at(i, j, a) = acc;
      }
  }
  return U;
}

LinearMap map_K(const CorrectorBundle& b) {
  const CorrectorBundle* bp = &b;
  const Grid g = b.macro;
  const int n = b.n(), dn = b.bn();
  const Index cn = b.cell.nodes();
  LinearMap A;
  A.dom = b.space();
  A.cod = {g.nodes() * cn * n, g.w() / double(cn)};
  A.apply = [bp, g, n](const VectorXcd& x) {
    GridFunction f(g, n);
    f.v = x;
    return corrector_K(*bp, f).v;
  };
  A.applyAdj = [bp, g, n, dn, cn](const VectorXcd& V) {
    NodeField wt(g, n);
    for (Index i = 0; i < g.nodes(); ++i) {
      const CellEntry& e = bp->table.at(i);
      for (Index j = 0; j < cn; ++j)
        for (int r = 0; r < dn; ++r) {
          cd acc = 0.0;
          for (int a = 0; a < n; ++a)
            acc += std::conj(e.N[r].at(j, a)) * V[(i * cn + j) * n + a];
          wt.v[i * dn + r] += acc / double(cn);
        }
    }
    return bp->solver.solve_adjoint(pgrad_adj(wt)).v;
  };
  return A;
}

LinearMap map_K_eps(const CorrectorEpsOps& ops, bool plus) {
  const CorrectorBundle* bp = ops.base;
  SmoothingOps sm = ops.sm;
  const Grid g = bp->macro;
  const int n = bp->n();
  LinearMap A;
  A.dom = A.cod = bp->space();
  A.apply = [bp, sm, g, n, plus](const VectorXcd& x) {
    GridFunction f(g, n);
    f.v = x;
    NodeField w = pgrad(res_solve(*bp, f, plus));
    return window_multiply(*bp, sm, w, plus).v;
  };
  A.applyAdj = [bp, sm, g, n, plus](const VectorXcd& x) {
    GridFunction gf(g, n);
    gf.v = x;
    NodeField wt = window_multiply_adj(*bp, sm, gf, plus);
    return res_solve(*bp, pgrad_adj(wt), !plus).v;
  };
  return A;
}

LinearMap map_L(const CorrectorBundle& b, bool plus) {
  const CorrectorBundle* bp = &b;
  const Grid g = b.macro;
  const int n = b.n();
  LinearMap A;
  A.dom = A.cod = b.space();
  A.apply = [bp, g, n, plus](const VectorXcd& x) {
    GridFunction f(g, n);
    f.v = x;
    NodeField w = pgrad(res_solve(*bp, f, plus));
    NodeField xi = xi_forward(*bp, w, plus);
    return res_solve(*bp, pgrad_adj(xi), plus).v;
  };
  A.applyAdj = [bp, g, n, plus](const VectorXcd& x) {
    GridFunction gf(g, n);
    gf.v = x;
    NodeField w = pgrad(res_solve(*bp, gf, !plus));
    NodeField xi = xi_reverse(*bp, w, plus);
    return res_solve(*bp, pgrad_adj(xi), !plus).v;
  };
  return A;
}

LinearMap map_M_eps(const CorrectorEpsOps& ops) {
  const CorrectorBundle* bp = ops.base;
  CorrectorEpsOps o = ops;  // holds the tensor cache by value
  const Grid g = bp->macro;
  const int n = bp->n();
  LinearMap A;
  A.dom = A.cod = bp->space();
  A.apply = [bp, o, g, n](const VectorXcd& x) {
    GridFunction f(g, n);
    f.v = x;
    NodeField w = pgrad(bp->solver.solve(f));
    return bp->solver.solve(pgrad_adj(mhat_multiply(o, w, false))).v;
  };
  A.applyAdj = [bp, o, g, n](const VectorXcd& x) {
    GridFunction gf(g, n);
    gf.v = x;
    NodeField w = pgrad(bp->solver.solve_adjoint(gf));
    return bp->solver.solve_adjoint(pgrad_adj(mhat_multiply(o, w, true))).v;
  };
  return A;
}

LinearMap map_C_eps(const CorrectorEpsOps& ops) {
  const CorrectorBundle* bp = ops.base;
  CorrectorEpsOps o = ops;
  const Grid g = bp->macro;
  const int n = bp->n();
  LinearMap A;
  A.dom = A.cod = bp->space();
  // C = (K^eps - L) - M + adjoint(K^eps+ - L+); the four resolvent-tailed
  // pieces share one outer solve by linearity.
  A.apply = [bp, o, g, n](const VectorXcd& x) {
    GridFunction f(g, n);
    f.v = x;
    NodeField w = pgrad(bp->solver.solve(f));
    GridFunction outK = window_multiply(*bp, o.sm, w, false);
    NodeField acc(g, n);
    acc.v = -xi_forward(*bp, w, false).v;              // - L
    acc.v -= mhat_multiply(o, w, false).v;             // - M
    acc.v -= xi_reverse(*bp, w, true).v;               // - (L+)^*
    acc.v += window_multiply_adj(*bp, o.sm, f, true).v;  // + (K^eps+)^*
    return (outK + bp->solver.solve(pgrad_adj(acc))).v;
  };
  A.applyAdj = [bp, o, g, n](const VectorXcd& x) {
    GridFunction gf(g, n);
    gf.v = x;
    NodeField w = pgrad(bp->solver.solve_adjoint(gf));
    GridFunction outK = window_multiply(*bp, o.sm, w, true);  // + K^eps+
    NodeField acc(g, n);
    acc.v = window_multiply_adj(*bp, o.sm, gf, false).v;  // + (K^eps)^*
    acc.v -= xi_reverse(*bp, w, false).v;                 // - L^*
    acc.v -= mhat_multiply(o, w, true).v;                 // - M^*
    acc.v -= xi_forward(*bp, w, true).v;                  // - L+
    return (outK + bp->solver.solve_adjoint(pgrad_adj(acc))).v;
  };
  return A;
}

GridFunction corrector_K_eps(const CorrectorEpsOps& ops, const GridFunction& f) {
  GridFunction out(ops.base->macro, ops.base->n());
  out.v = map_K_eps(ops).apply(f.v);
  return out;
}

GridFunction corrector_L(const CorrectorBundle& b, const GridFunction& f) {
  GridFunction out(b.macro, b.n());
  out.v = map_L(b).apply(f.v);
  return out;
}

GridFunction corrector_M_eps(const CorrectorEpsOps& ops, const GridFunction& f) {
  GridFunction out(ops.base->macro, ops.base->n());
  out.v = map_M_eps(ops).apply(f.v);
  return out;
}

GridFunction corrector_C_eps(const CorrectorEpsOps& ops, const GridFunction& f) {
  GridFunction out(ops.base->macro, ops.base->n());
  out.v = map_C_eps(ops).apply(f.v);
  return out;
}

cd form_L(const CorrectorBundle& b, const GridFunction& f, const GridFunction& g) {
  const Grid& mg = b.macro;
  const int n = b.n(), dn = b.bn();
  const Index cn = b.cell.nodes();
  const bool scalar = b.field.slow == SlowKind::ScalarFactor;
  NodeField w = pgrad(b.solver.solve(f));
  NodeField wp = pgrad(b.solver.solve_adjoint(g));
  MatrixXcd Aj(dn, dn), Am(dn, dn);
  GridFunction Wj(mg, n);
  cd acc = 0.0;
  for (Index j = 0; j < cn; ++j) {
    Vec2 y = cell_y(b.cell, j);
    // U+ slice and its averaged x-gradient
    for (Index i = 0; i < mg.nodes(); ++i) {
      MatrixXcd Nm = ntab_at(b.table.at(i), true, j, n, dn);
      for (int a = 0; a < n; ++a) {
        cd s = 0.0;
        for (int r = 0; r < dn; ++r) s += Nm(a, r) * wp.v[i * dn + r];
        Wj.at(i, a) = s;
      }
    }
    NodeField psi = pgrad(Wj);
    // flux slice A (I + P grad_y N) w, paired against psi
    if (b.table.shared) {
      b.field.eval_ref(y, Aj);
      MatrixXcd P = Aj * blk(b.ghat[0], j, dn);
      for (Index i = 0; i < mg.nodes(); ++i) {
        double c = scalar ? b.slow[i] : 1.0;
        Eigen::VectorXcd phi = c * (P * Map<const Eigen::VectorXcd>(w.v.data() + i * dn, dn));
        for (int c2 = 0; c2 < dn; ++c2) acc += phi[c2] * std::conj(psi.v[i * dn + c2]);
      }
    } else {
      for (Index i = 0; i < mg.nodes(); ++i) {
        b.field.eval(macro_x(mg, i), y, Am);
        const auto G = blk(b.ghat[size_t(i)], j, dn);
        Eigen::VectorXcd phi = Am * (G * Map<const Eigen::VectorXcd>(w.v.data() + i * dn, dn));
        for (int c2 = 0; c2 < dn; ++c2) acc += phi[c2] * std::conj(psi.v[i * dn + c2]);
      }
    }
  }
  return acc * (mg.w() / double(cn));
}

cd form_M(const CorrectorEpsOps& ops, const GridFunction& f, const GridFunction& g) {
  const CorrectorBundle& b = *ops.base;
  const Grid& mg = b.macro;
  const int dn = b.bn(), Mc = b.cell.M;
  NodeField w = pgrad(b.solver.solve(f));
  NodeField wp = pgrad(b.solver.solve_adjoint(g));
  ZWindow zw = z_window(ops.sm.p);
  const int nw = int(zw.s.size());
  const bool scalar = b.field.slow == SlowKind::ScalarFactor;
  if (b.field.slow == SlowKind::Uniform) return 0.0;
  std::vector<MatrixXcd> Aref;
  if (scalar) {
    Aref.resize(size_t(b.cell.nodes()));
    for (Index j = 0; j < b.cell.nodes(); ++j) {
      Aref[size_t(j)].resize(dn, dn);
      b.field.eval_ref(cell_y(b.cell, j), Aref[size_t(j)]);
    }
  }
  MatrixXcd Ai(dn, dn), As(dn, dn);
  cd acc = 0.0;
  for (Index i = 0; i < mg.nodes(); ++i) {
    auto I = mg.unflatten(i);
    Index jn = ops.sm.fast_node_flat(i);
    Vec2 y = cell_y(b.cell, jn);
    auto add_term = [&](double wt, int u0, int u1) {
      Index u = mg.d == 1 ? Index(u0) : Index(u0) * mg.M + u1;
      const auto G = blk(b.ghat_at(u, false), jn, dn);
      const auto Gp = blk(b.ghat_at(u, true), jn, dn);
      Eigen::VectorXcd E = G * Map<const Eigen::VectorXcd>(w.v.data() + u * dn, dn);
      Eigen::VectorXcd Ep = Gp * Map<const Eigen::VectorXcd>(wp.v.data() + u * dn, dn);
      Eigen::VectorXcd dAE;
      if (scalar) {
        dAE = (b.slow[u] - b.slow[i]) * (Aref[size_t(jn)] * E);
      } else {
        b.field.eval(macro_x(mg, u), y, As);
        b.field.eval(macro_x(mg, i), y, Ai);
        dAE = (As - Ai) * E;
      }
      cd s = 0.0;
      for (int c2 = 0; c2 < dn; ++c2) s += dAE[c2] * std::conj(Ep[c2]);
      acc += wt * s;
    };
    if (mg.d == 1) {
      for (int t = 0; t < nw; ++t) add_term(zw.w[t], mg.wrap(I[0] + zw.s[t]), 0);
    } else {
      for (int t0 = 0; t0 < nw; ++t0)
        for (int t1 = 0; t1 < nw; ++t1)
          add_term(zw.w[t0] * zw.w[t1], mg.wrap(I[0] + zw.s[t0]), mg.wrap(I[1] + zw.s[t1]));
    }
  }
  (void)Mc;
  return acc * (-mg.w() / ops.fs.eps);
}

}  // namespace homog
