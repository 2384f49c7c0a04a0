#include "homog/fft.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>

namespace homog {

namespace {

// One pass along each dimension; 2D data is node-major u[i0*M + i1].
VectorXcd transform(const Grid& g, const VectorXcd& u, bool forward) {
  Eigen::FFT<double> fft;
  const Index M = g.M;
  if (g.d == 1) {
    VectorXcd out(M);
    if (forward)
      fft.fwd(out, u);
    else
      fft.inv(out, u);
    return out;
  }
  if (g.d != 2) throw std::runtime_error("fft: only d = 1, 2 supported");
  // Column-major map: A(i1, i0) = u[i0*M + i1]; columns are the i1-lines.
  MatrixXcd A = Eigen::Map<const MatrixXcd>(u.data(), M, M);
  VectorXcd in(M), out(M);
  for (Index c = 0; c < M; ++c) {
    in = A.col(c);
    if (forward)
      fft.fwd(out, in);
    else
      fft.inv(out, in);
    A.col(c) = out;
  }
  for (Index r = 0; r < M; ++r) {
    in = A.row(r).transpose();
    if (forward)
      fft.fwd(out, in);
    else
      fft.inv(out, in);
    A.row(r) = out.transpose();
  }
  return Eigen::Map<VectorXcd>(A.data(), M * M);
}

}  // namespace

VectorXcd fft_forward(const Grid& g, const VectorXcd& u) { return transform(g, u, true); }
VectorXcd fft_inverse(const Grid& g, const VectorXcd& uhat) { return transform(g, uhat, false); }

Eigen::VectorXd laplacian_symbol(const Grid& g) {
  const double ih2 = 1.0 / (g.h() * g.h());
  Eigen::VectorXd lam(g.nodes());
  for (Index i = 0; i < g.nodes(); ++i) {
    auto I = g.unflatten(i);
    double s = 0.0;
    for (int k = 0; k < g.d; ++k) s += (2.0 - 2.0 * std::cos(2.0 * M_PI * I[k] / g.M)) * ih2;
    lam[i] = s;
  }
  return lam;
}

}  // namespace homog
