#include "homog/linop.hpp"

#include "homog/fft.hpp"

#include <algorithm>
#include <cmath>

namespace homog {

LinearMap identity_map(const VSpace& s) {
  LinearMap I;
  I.dom = I.cod = s;
  I.apply = [](const VectorXcd& x) { return x; };
  I.applyAdj = I.apply;
  return I;
}

LinearMap adjoint_map(const LinearMap& A) {
  LinearMap B;
  B.dom = A.cod;
  B.cod = A.dom;
  B.apply = A.applyAdj;
  B.applyAdj = A.apply;
  return B;
}

LinearMap compose(const LinearMap& A, const LinearMap& B) {
  if (!(B.cod == A.dom)) throw std::runtime_error("compose: inner spaces differ");
  LinearMap C;
  C.dom = B.dom;
  C.cod = A.cod;
  auto a = A, b = B;
  C.apply = [a, b](const VectorXcd& x) { return a.apply(b.apply(x)); };
  C.applyAdj = [a, b](const VectorXcd& y) { return b.applyAdj(a.applyAdj(y)); };
  return C;
}

LinearMap add(const LinearMap& A, const LinearMap& B) {
  if (!(A.dom == B.dom) || !(A.cod == B.cod)) throw std::runtime_error("add: spaces differ");
  LinearMap C;
  C.dom = A.dom;
  C.cod = A.cod;
  auto a = A, b = B;
  C.apply = [a, b](const VectorXcd& x) { return (a.apply(x) + b.apply(x)).eval(); };
  C.applyAdj = [a, b](const VectorXcd& y) { return (a.applyAdj(y) + b.applyAdj(y)).eval(); };
  return C;
}

LinearMap scale(cd s, const LinearMap& A) {
  LinearMap C = A;
  auto a = A;
  C.apply = [a, s](const VectorXcd& x) { return (s * a.apply(x)).eval(); };
  C.applyAdj = [a, s](const VectorXcd& y) { return (std::conj(s) * a.applyAdj(y)).eval(); };
  return C;
}

double adjoint_error(const LinearMap& A, int trials, std::uint64_t seed) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    VectorXcd x = randn_cvec(A.dom.dim, seed + 2 * t);
    VectorXcd y = randn_cvec(A.cod.dim, seed + 2 * t + 1);
    cd lhs = A.cod.weight * y.dot(A.apply(x));
    cd rhs = A.dom.weight * A.applyAdj(y).dot(x);
    double err = std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1e-300);
    worst = std::max(worst, err);
  }
  return worst;
}

MatrixXcd materialize(const LinearMap& A) {
  MatrixXcd M(A.cod.dim, A.dom.dim);
  VectorXcd e = VectorXcd::Zero(A.dom.dim);
  for (Index j = 0; j < A.dom.dim; ++j) {
    e[j] = 1.0;
    M.col(j) = A.apply(e);
    e[j] = 0.0;
  }
  return M;
}

namespace {

// Unitary 2x2 eliminating g against f; cs is real.
void make_rotation(cd f, cd g, cd& cs, cd& sn) {
  if (g == cd(0.0)) {
    cs = 1.0;
    sn = 0.0;
  } else if (f == cd(0.0)) {
    cs = 0.0;
    sn = std::conj(g) / std::abs(g);
  } else {
    double r = std::sqrt(std::norm(f) + std::norm(g));
    cs = std::abs(f) / r;
    sn = (f / std::abs(f)) * std::conj(g) / r;
  }
}

}  // namespace

VectorXcd krylov_solve(const LinearMap& A, const VectorXcd& b, const KrylovOptions& opt,
                       SolveReport* report, const Precond& M, const VectorXcd* x0) {
  if (!(A.dom == A.cod)) throw std::runtime_error("krylov_solve: map must be square");
  const Index N = A.dom.dim;
  if (b.size() != N) throw std::runtime_error("krylov_solve: rhs size mismatch");
  const Index maxit = opt.max_iters > 0 ? opt.max_iters : 10 * N;
  const int m = std::max(1, opt.restart);

  SolveReport rep;
  auto finish = [&](const VectorXcd& x, double rel, bool ok) {
    rep.rel_residual = rel;
    rep.converged = ok;
    if (report) *report = rep;
    if (!ok)
      throw SolveFailure("krylov_solve: no convergence after " + std::to_string(rep.iterations) +
                             " iterations, rel residual " + format_g17(rel),
                         rep);
    return x;
  };

  const double bnorm = b.norm();
  VectorXcd x = x0 ? *x0 : VectorXcd::Zero(N);
  if (bnorm == 0.0) return finish(VectorXcd::Zero(N), 0.0, true);

  auto prec = [&](const VectorXcd& r) { return M ? M(r) : r; };
  const double bpre = prec(b).norm();
  double safety = 0.05;

  MatrixXcd V(N, m + 1);
  MatrixXcd H = MatrixXcd::Zero(m + 1, m);
  VectorXcd cs(m), sn(m), gvec(m + 1), y(m), w(N);

  double true_rel = 1.0;
  while (rep.iterations < maxit) {
    VectorXcd r = b - A.apply(x);
    true_rel = r.norm() / bnorm;
    if (true_rel <= opt.tol) return finish(x, true_rel, true);

    VectorXcd z = prec(r);
    double beta = z.norm();
    if (beta == 0.0) return finish(x, true_rel, false);
    V.col(0) = z / beta;
    gvec.setZero();
    gvec[0] = beta;
    const double inner_target = std::max(safety * opt.tol * bpre, 1e-300);

    int j = 0;
    bool breakdown = false;
    for (; j < m && rep.iterations < maxit; ++j) {
      w = prec(A.apply(V.col(j)));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      ++rep.iterations;
      if (std::abs(H(j + 1, j)) > 1e-290) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        cd a = H(i, j), c = H(i + 1, j);
        H(i, j) = cs[i] * a + sn[i] * c;
        H(i + 1, j) = -std::conj(sn[i]) * a + cs[i] * c;
      }
      make_rotation(H(j, j), H(j + 1, j), cs[j], sn[j]);
      H(j, j) = cs[j] * H(j, j) + sn[j] * H(j + 1, j);
      H(j + 1, j) = 0.0;
      cd a = gvec[j];
      gvec[j] = cs[j] * a;
      gvec[j + 1] = -std::conj(sn[j]) * a;
      if (std::abs(gvec[j + 1]) <= inner_target || std::abs(H(j, j)) < 1e-290) {
        if (std::abs(H(j, j)) < 1e-290) breakdown = true;
        ++j;
        break;
      }
    }
    int steps = breakdown ? j - 1 : j;
    for (int i = steps - 1; i >= 0; --i) {
      cd s = gvec[i];
      for (int k = i + 1; k < steps; ++k) s -= H(i, k) * y[k];
      y[i] = s / H(i, i);
    }
    if (steps > 0) x += V.leftCols(steps) * y.head(steps);
    // Verify the true residual after every cycle; tighten the inner target
    // if the preconditioned estimate proved optimistic.
    VectorXcd rr = b - A.apply(x);
    double rel = rr.norm() / bnorm;
    if (rel <= opt.tol) return finish(x, rel, true);
    if (std::abs(gvec[steps]) <= inner_target) safety *= 0.1;
    if (breakdown && steps == 0) return finish(x, rel, false);
  }
  {
    VectorXcd rr = b - A.apply(x);
    true_rel = rr.norm() / bnorm;
  }
  return finish(x, true_rel, true_rel <= opt.tol);
}

namespace {

Precond make_symbol_precond(const Grid& g, int n, const VectorXcd& factor) {
  return [g, n, factor](const VectorXcd& r) {
    const Index N = g.nodes();
    VectorXcd out(r.size()), tmp(N);
    for (int c = 0; c < n; ++c) {
      for (Index i = 0; i < N; ++i) tmp[i] = r[i * n + c];
      VectorXcd hat = fft_forward(g, tmp);
      hat = hat.cwiseProduct(factor);
      VectorXcd back = fft_inverse(g, hat);
      for (Index i = 0; i < N; ++i) out[i * n + c] = back[i];
    }
    return out;
  };
}

}  // namespace

Precond make_shifted_laplacian_precond(const Grid& g, int n, double cbar, double sigma) {
  Eigen::VectorXd lam = laplacian_symbol(g);
  VectorXcd factor(lam.size());
  for (Index i = 0; i < lam.size(); ++i) {
    double den = cbar * lam[i] + sigma;
    if (std::abs(den) < 1e-300) throw std::runtime_error("shifted laplacian precond: singular symbol");
    factor[i] = 1.0 / den;
  }
  return make_symbol_precond(g, n, factor);
}

Precond make_zero_mean_laplacian_precond(const Grid& g, int n, double cbar) {
  Eigen::VectorXd lam = laplacian_symbol(g);
  VectorXcd factor(lam.size());
  for (Index i = 0; i < lam.size(); ++i) factor[i] = lam[i] > 0.0 ? 1.0 / (cbar * lam[i]) : 0.0;
  return make_symbol_precond(g, n, factor);
}

}  // namespace homog
