#pragma once

#include "homog/grid.hpp"

namespace homog {

// Forward / inverse DFT of scalar node data (d = 1 or 2, same layout as
// GridFunction with n = 1). Inverse includes the 1/M^d normalization, so
// fft_inverse(fft_forward(u)) == u up to roundoff. Frequency k lives at the
// node index with the same multi-index.
VectorXcd fft_forward(const Grid& g, const VectorXcd& u);
VectorXcd fft_inverse(const Grid& g, const VectorXcd& uhat);

// Fourier symbol of -div_adj(grad(.)): lambda[k] = sum_j (2 - 2 cos(2 pi k_j / M)) / h^2.
Eigen::VectorXd laplacian_symbol(const Grid& g);

}  // namespace homog
