#include "homog/smoothing.hpp"

#include <cmath>
#include <stdexcept>

namespace homog {

SmoothingOps make_smoothing(const Grid& macro, const Grid& cell, double eps) {
  if (macro.d != cell.d) throw std::runtime_error("smoothing: macro/cell dimension mismatch");
  if (!(eps > 0) || eps > 1.0) throw std::runtime_error("smoothing: eps outside (0,1]");
  double mr = macro.L / eps;
  int m = int(std::lround(mr));
  if (m < 1 || std::abs(mr - m) > 1e-9 * m)
    throw std::runtime_error("smoothing: eps is not L/m for integer m");
  if (macro.M % m != 0) throw std::runtime_error("smoothing: m does not divide M");
  int p = macro.M / m;
  if (p < 2 || p % 2 != 0) throw std::runtime_error("smoothing: points per period must be even");
  if (cell.M % 2 != 0) throw std::runtime_error("smoothing: cell grid must be even");
  if (cell.M % p != 0)
    throw std::runtime_error("smoothing: p = " + std::to_string(p) +
                             " does not divide cell points Mc = " + std::to_string(cell.M));
  SmoothingOps S;
  S.macro = macro;
  S.cell = cell;
  S.eps = eps;
  S.p = p;
  S.q = cell.M / p;
  return S;
}

ZWindow z_window(int p) {
  ZWindow zw;
  zw.p = p;
  zw.w.resize(p + 1, 1.0 / p);
  zw.w[0] = zw.w[p] = 0.5 / p;
  zw.s.resize(p + 1);
  for (int t = 0; t <= p; ++t) zw.s[t] = t - p / 2;
  return zw;
}

GridFunction two_scale_substitute(const SmoothingOps& S, const TwoScaleFunction& U) {
  GridFunction out(S.macro, U.n);
  for (Index i = 0; i < S.macro.nodes(); ++i) {
    Index jf = S.fast_node_flat(i);
    for (int c = 0; c < U.n; ++c) out.at(i, c) = U.at(i, jf, c);
  }
  return out;
}

TwoScaleFunction two_scale_substitute_adjoint(const SmoothingOps& S, const GridFunction& v) {
  TwoScaleFunction out(S.macro, S.cell, v.n);
  const double f = double(S.cell.nodes());
  for (Index i = 0; i < S.macro.nodes(); ++i) {
    Index jf = S.fast_node_flat(i);
    for (int c = 0; c < v.n; ++c) out.at(i, jf, c) = f * v.at(i, c);
  }
  return out;
}

GridFunction steklov(const SmoothingOps& S, const GridFunction& u) {
  ZWindow zw = z_window(S.p);
  GridFunction cur = u;
  for (int k = 0; k < S.macro.d; ++k) {
    GridFunction next(S.macro, u.n);
    for (Index i = 0; i < S.macro.nodes(); ++i)
      for (int t = 0; t <= zw.p; ++t) {
        Index is = S.macro.nbr(i, k, zw.s[t]);
        for (int c = 0; c < u.n; ++c) next.at(i, c) += zw.w[t] * cur.at(is, c);
      }
    cur = std::move(next);
  }
  return cur;
}

FaceField steklov_face(const SmoothingOps& S, const FaceField& F) {
  ZWindow zw = z_window(S.p);
  FaceField cur = F;
  for (int k = 0; k < S.macro.d; ++k) {
    FaceField next(S.macro, F.n);
    for (int kf = 0; kf < S.macro.d; ++kf)
      for (Index i = 0; i < S.macro.nodes(); ++i)
        for (int t = 0; t <= zw.p; ++t) {
          Index is = S.macro.nbr(i, k, zw.s[t]);
          for (int c = 0; c < F.n; ++c) next.at(kf, i, c) += zw.w[t] * cur.at(kf, is, c);
        }
    cur = std::move(next);
  }
  return cur;
}

GridFunction tau_S_two_scale(const SmoothingOps& S, const TwoScaleFunction& U) {
  ZWindow zw = z_window(S.p);
  GridFunction out(S.macro, U.n);
  for (Index i = 0; i < S.macro.nodes(); ++i) {
    Index jf = S.fast_node_flat(i);
    if (S.macro.d == 1) {
      for (int t = 0; t <= zw.p; ++t) {
        Index is = S.macro.nbr(i, 0, zw.s[t]);
        for (int c = 0; c < U.n; ++c) out.at(i, c) += zw.w[t] * U.at(is, jf, c);
      }
    } else {
      for (int t0 = 0; t0 <= zw.p; ++t0) {
        Index i0 = S.macro.nbr(i, 0, zw.s[t0]);
        for (int t1 = 0; t1 <= zw.p; ++t1) {
          Index is = S.macro.nbr(i0, 1, zw.s[t1]);
          double w = zw.w[t0] * zw.w[t1];
          for (int c = 0; c < U.n; ++c) out.at(i, c) += w * U.at(is, jf, c);
        }
      }
    }
  }
  return out;
}

TwoScaleFunction tau_S_two_scale_adjoint(const SmoothingOps& S, const GridFunction& v) {
  ZWindow zw = z_window(S.p);
  TwoScaleFunction out(S.macro, S.cell, v.n);
  const double f = double(S.cell.nodes());
  for (Index i = 0; i < S.macro.nodes(); ++i) {
    Index jf = S.fast_node_flat(i);
    if (S.macro.d == 1) {
      for (int t = 0; t <= zw.p; ++t) {
        Index is = S.macro.nbr(i, 0, zw.s[t]);
        for (int c = 0; c < v.n; ++c) out.at(is, jf, c) += f * zw.w[t] * v.at(i, c);
      }
    } else {
      for (int t0 = 0; t0 <= zw.p; ++t0) {
        Index i0 = S.macro.nbr(i, 0, zw.s[t0]);
        for (int t1 = 0; t1 <= zw.p; ++t1) {
          Index is = S.macro.nbr(i0, 1, zw.s[t1]);
          double w = f * zw.w[t0] * zw.w[t1];
          for (int c = 0; c < v.n; ++c) out.at(is, jf, c) += w * v.at(i, c);
        }
      }
    }
  }
  return out;
}

cd tau_T_inner(const SmoothingOps& S, const TwoScaleFunction& V, const TwoScaleFunction& W) {
  ZWindow zw = z_window(S.p);
  cd acc = 0.0;
  for (Index i = 0; i < S.macro.nodes(); ++i) {
    Index jf = S.fast_node_flat(i);
    if (S.macro.d == 1) {
      for (int t = 0; t <= zw.p; ++t) {
        Index is = S.macro.nbr(i, 0, zw.s[t]);
        for (int c = 0; c < V.n; ++c) acc += zw.w[t] * V.at(is, jf, c) * std::conj(W.at(is, jf, c));
      }
    } else {
      for (int t0 = 0; t0 <= zw.p; ++t0) {
        Index i0 = S.macro.nbr(i, 0, zw.s[t0]);
        for (int t1 = 0; t1 <= zw.p; ++t1) {
          Index is = S.macro.nbr(i0, 1, zw.s[t1]);
          double w = zw.w[t0] * zw.w[t1];
          for (int c = 0; c < V.n; ++c) acc += w * V.at(is, jf, c) * std::conj(W.at(is, jf, c));
        }
      }
    }
  }
  return S.macro.w() * acc;
}

double tau_T_norm(const SmoothingOps& S, const TwoScaleFunction& V) {
  return std::sqrt(std::max(0.0, tau_T_inner(S, V, V).real()));
}

double tau_T_minus_tau_S_norm(const SmoothingOps& S, const TwoScaleFunction& U) {
  ZWindow zw = z_window(S.p);
  GridFunction tS = tau_S_two_scale(S, U);
  double acc = 0.0;
  for (Index i = 0; i < S.macro.nodes(); ++i) {
    Index jf = S.fast_node_flat(i);
    if (S.macro.d == 1) {
      for (int t = 0; t <= zw.p; ++t) {
        Index is = S.macro.nbr(i, 0, zw.s[t]);
        for (int c = 0; c < U.n; ++c) acc += zw.w[t] * std::norm(U.at(is, jf, c) - tS.at(i, c));
      }
    } else {
      for (int t0 = 0; t0 <= zw.p; ++t0) {
        Index i0 = S.macro.nbr(i, 0, zw.s[t0]);
        for (int t1 = 0; t1 <= zw.p; ++t1) {
          Index is = S.macro.nbr(i0, 1, zw.s[t1]);
          double w = zw.w[t0] * zw.w[t1];
          for (int c = 0; c < U.n; ++c) acc += w * std::norm(U.at(is, jf, c) - tS.at(i, c));
        }
      }
    }
  }
  return std::sqrt(S.macro.w() * acc);
}

double translate_minus_id_znorm(const SmoothingOps& S, const GridFunction& u) {
  ZWindow zw = z_window(S.p);
  double acc = 0.0;
  for (Index i = 0; i < S.macro.nodes(); ++i) {
    if (S.macro.d == 1) {
      for (int t = 0; t <= zw.p; ++t) {
        Index is = S.macro.nbr(i, 0, zw.s[t]);
        for (int c = 0; c < u.n; ++c) acc += zw.w[t] * std::norm(u.at(is, c) - u.at(i, c));
      }
    } else {
      for (int t0 = 0; t0 <= zw.p; ++t0) {
        Index i0 = S.macro.nbr(i, 0, zw.s[t0]);
        for (int t1 = 0; t1 <= zw.p; ++t1) {
          Index is = S.macro.nbr(i0, 1, zw.s[t1]);
          double w = zw.w[t0] * zw.w[t1];
          for (int c = 0; c < u.n; ++c) acc += w * std::norm(u.at(is, c) - u.at(i, c));
        }
      }
    }
  }
  return std::sqrt(S.macro.w() * acc);
}

}  // namespace homog
