#pragma once

#include "homog/grid.hpp"

#include <array>
#include <functional>
#include <vector>

namespace homog {

using Vec2 = std::array<double, 2>;

double wrap_period(double t, double L);  // into [0, L)
double wrap_cell(double t);              // into [-1/2, 1/2)

// Structure of the slow (x) dependence. ScalarFactor means
// A(x,y) = slow_scalar(x) * A_ref(y) with a real positive scalar factor, so
// cell solutions are shared across macro points; Uniform is the x-independent
// special case.
enum class SlowKind { General, Uniform, ScalarFactor };

// Coefficient field A(x,y): d x d array of complex n x n blocks, Lipschitz in
// x, 1-periodic in y. eval fills a (d*n) x (d*n) matrix with entry
// (k*n + a, l*n + b) = [A_kl]_{ab}; it maps vectorized gradients w[l*n+b].
struct CoefficientField {
  int d = 1;
  int n = 1;
  std::function<void(const Vec2& x, const Vec2& y, MatrixXcd& out)> eval;
  double lipschitz_x = 0.0;
  double sup_norm = 1.0;
  double c_A = 1.0;  // coercivity pair (c_A > 0, C_A >= 0)
  double C_A = 0.0;
  bool self_adjoint = false;
  SlowKind slow = SlowKind::General;
  std::function<double(const Vec2& x)> slow_scalar;               // ScalarFactor only
  std::function<void(const Vec2& y, MatrixXcd& out)> eval_ref;    // Uniform/ScalarFactor

  int bn() const { return d * n; }
};

MatrixXcd eval_blocks(const CoefficientField& f, const Vec2& x, const Vec2& y);

struct Sector {
  double slope = 1.0;
  double shift = 0.0;
};

Sector sector_of(const CoefficientField& f);
bool sector_contains(const Sector& s, cd mu);

// ---- builtin families ----

// A(x,y) = value * B (constant); declared constants derived from B.
CoefficientField field_constant(int d, int n, const MatrixXcd& B);
CoefficientField field_constant_scalar(int d, int n, cd value);

// 1D scalar A(x,y) = (cx0 + cx1 sin(2 pi x / L)) * (ay0 + ay1 sin(2 pi y) + i ayi cos(2 pi y)).
CoefficientField field_separable_1d(double L, double cx0, double cx1, double ay0, double ay1,
                                    double ayi);

// 2D scalar laminate A(x,y) = c(x) diag(2 + sin 2 pi y_1, 3 + cos 2 pi y_2),
// c(x) = 1 + 0.5 sin(2 pi x_1 / L) sin(2 pi x_2 / L). Exact effective tensor
// c(x) diag(sqrt(3), 2 sqrt(2)).
CoefficientField field_laminate_2d(double L);

// A_kl = b_k^* g(x,y) b_l with b_k constant m x n matrices and Re g uniformly
// positive definite (g_min = inf lambda_min(Re g), g_sup = sup |g|, g_lip =
// Lipschitz bound in x). Rejects b whose symbol b(xi) = sum xi_k b_k is
// singular on a sphere mesh.
CoefficientField field_bgb(int d, int n, const std::vector<MatrixXcd>& b,
                           const std::function<void(const Vec2&, const Vec2&, MatrixXcd&)>& g,
                           double g_min, double g_sup, double g_lip, bool g_self_adjoint);

// 1D scalar A(x,y) = A1(x) A2(y) on a macro torus of period L: A1' equals the
// truncated lacunary series sum_{k<=K} k^{-2} cos(2^k pi x) on (0,1) and is 0
// elsewhere in the period; A2(y) = 4 sqrt(pi) / (2 + sin 2 pi y).
CoefficientField field_counterexample(int K_terms, double L = 4.0);
double counterexample_a1(int K_terms, double x, double L = 4.0);
double counterexample_a2(double y);

// ---- audits ----

struct LHSample {
  Vec2 x{};
  Vec2 xi{};        // |xi| = 1, real direction
  VectorXcd eta;    // |eta| = 1
};

// min over samples of the y-averaged Re <A(x,.) xi (x) eta, xi (x) eta>
// (midpoint rule, My points per dimension).
double legendre_hadamard_min(const CoefficientField& f, const std::vector<LHSample>& samples,
                             int My = 64);
std::vector<LHSample> lh_random_samples(const CoefficientField& f, double L, int count,
                                        std::uint64_t seed);

double periodicity_error(const CoefficientField& f, double L, int trials, std::uint64_t seed);
double lipschitz_quotient_max(const CoefficientField& f, double L, int trials, std::uint64_t seed);
double sampled_sup(const CoefficientField& f, double L, int per_dim);

}  // namespace homog
