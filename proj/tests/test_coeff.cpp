#include "homog/coeff.hpp"

#include "homog/effective.hpp"

#include "doctest.h"

#include <cmath>

using namespace homog;

TEST_CASE("wrap helpers land in the canonical intervals") {
  CHECK(wrap_period(2.5, 2.0) == doctest::Approx(0.5));
  CHECK(wrap_period(-0.25, 2.0) == doctest::Approx(1.75));
  CHECK(wrap_period(4.0, 2.0) == doctest::Approx(0.0));
  CHECK(wrap_cell(0.5) == doctest::Approx(-0.5));
  CHECK(wrap_cell(-0.5) == doctest::Approx(-0.5));
  CHECK(wrap_cell(1.25) == doctest::Approx(0.25));
  CHECK(wrap_cell(-1.3) == doctest::Approx(-0.3));
}

TEST_CASE("sector excludes the default shift and contains the spectral half-line") {
  CoefficientField f = field_constant_scalar(1, 1, cd(2.0, 0.5));
  Sector s = sector_of(f);
  CHECK_FALSE(sector_contains(s, default_mu(f)));
  CHECK(sector_contains(s, cd(1.0, 0.0)));
  CHECK(sector_contains(s, cd(0.0, 0.0)));
  CHECK_FALSE(sector_contains(s, cd(-1.0 - f.C_A, 0.0)));
}

TEST_CASE("separable 1D field evaluates to its defining product") {
  double L = 2.0, cx0 = 2.0, cx1 = 0.5, ay0 = 2.0, ay1 = 1.0, ayi = 0.75;
  CoefficientField f = field_separable_1d(L, cx0, cx1, ay0, ay1, ayi);
  CHECK(f.d == 1);
  CHECK(f.n == 1);
  CHECK(f.slow == SlowKind::ScalarFactor);
  CHECK_FALSE(f.self_adjoint);
  for (double x : {0.0, 0.3, 1.7})
    for (double y : {-0.5, -0.1, 0.44}) {
      cd want = cd(cx0 + cx1 * std::sin(2 * M_PI * x / L), 0.0) *
                cd(ay0 + ay1 * std::sin(2 * M_PI * y), ayi * std::cos(2 * M_PI * y));
      MatrixXcd out(1, 1);
      f.eval({x, 0.0}, {y, 0.0}, out);
      CHECK(std::abs(out(0, 0) - want) < 1e-14);
      MatrixXcd ref(1, 1);
      f.eval_ref({y, 0.0}, ref);
      CHECK(std::abs(f.slow_scalar({x, 0.0}) * ref(0, 0) - want) < 1e-14);
    }
  CHECK(f.c_A == doctest::Approx((cx0 - cx1) * (ay0 - ay1)));

  CoefficientField u = field_separable_1d(L, 1.0, 0.0, 2.0, 1.0, 0.0);
  CHECK(u.slow == SlowKind::Uniform);
  CHECK(u.self_adjoint);
  CHECK_THROWS_AS((void)field_separable_1d(1.0, 1.0, 1.5, 2.0, 1.0, 0.0), std::runtime_error);
  CHECK_THROWS_AS((void)field_separable_1d(1.0, 2.0, 0.5, 1.0, 1.0, 0.0), std::runtime_error);
}

TEST_CASE("laminate field is the advertised diagonal product") {
  double L = 1.0;
  CoefficientField f = field_laminate_2d(L);
  CHECK(f.d == 2);
  CHECK(f.n == 1);
  CHECK(f.slow == SlowKind::ScalarFactor);
  double x0 = 0.15, x1 = 0.6, y0 = 0.2, y1 = -0.35;
  double c = 1.0 + 0.5 * std::sin(2 * M_PI * x0 / L) * std::sin(2 * M_PI * x1 / L);
  MatrixXcd out(2, 2);
  f.eval({x0, x1}, {y0, y1}, out);
  CHECK(std::abs(out(0, 0) - c * (2.0 + std::sin(2 * M_PI * y0))) < 1e-14);
  CHECK(std::abs(out(1, 1) - c * (3.0 + std::cos(2 * M_PI * y1))) < 1e-14);
  CHECK(std::abs(out(0, 1)) < 1e-15);
  CHECK(std::abs(out(1, 0)) < 1e-15);
  CHECK(f.self_adjoint);
  CHECK(f.slow_scalar({x0, x1}) == doctest::Approx(c));
}

TEST_CASE("constant field carries exact constants and trivial structure") {
  MatrixXcd B(2, 2);
  B << cd(3.0, 0.0), cd(0.5, 0.25), cd(0.5, -0.25), cd(2.0, 0.0);
  CoefficientField f = field_constant(2, 1, B);
  CHECK(f.slow == SlowKind::Uniform);
  CHECK(f.self_adjoint);  // B is Hermitian
  CHECK(f.lipschitz_x == 0.0);
  MatrixXcd out(2, 2);
  f.eval({0.4, 0.9}, {0.1, -0.2}, out);
  CHECK((out - B).norm() < 1e-15);

  CoefficientField s = field_constant_scalar(1, 2, cd(2.0, 0.5));
  CHECK_FALSE(s.self_adjoint);
  MatrixXcd o2(2, 2);
  s.eval({0.0, 0.0}, {0.0, 0.0}, o2);
  CHECK((o2 - cd(2.0, 0.5) * MatrixXcd::Identity(2, 2)).norm() < 1e-15);

  MatrixXcd bad = MatrixXcd::Zero(2, 2);
  CHECK_THROWS_AS((void)field_constant(2, 1, bad), std::runtime_error);
}

TEST_CASE("bgb family: evaluation and symbol screening") {
  // b(xi) = xi_0 + i xi_1 never vanishes on the unit circle
  std::vector<MatrixXcd> b(2, MatrixXcd(1, 1));
  b[0](0, 0) = cd(1.0, 0.0);
  b[1](0, 0) = cd(0.0, 1.0);
  auto g = [](const Vec2& x, const Vec2& y, MatrixXcd& out) {
    out(0, 0) = cd(2.0 + 0.5 * std::sin(2 * M_PI * x[0]) + 0.3 * std::cos(2 * M_PI * y[0]), 0.4);
  };
  CoefficientField f = field_bgb(2, 1, b, g, 1.2, 3.2, 0.5 * 2 * M_PI, false);
  CHECK(f.d == 2);
  CHECK(f.c_A > 0.0);
  MatrixXcd out(2, 2), gv(1, 1);
  Vec2 x{0.3, 0.1}, y{0.2, 0.4};
  g(x, y, gv);
  f.eval(x, y, out);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      CHECK(std::abs(out(k, l) - std::conj(b[k](0, 0)) * gv(0, 0) * b[l](0, 0)) < 1e-14);

  // b(xi) = xi_0 - xi_1 dies along the diagonal direction: rejected
  std::vector<MatrixXcd> bad(2, MatrixXcd(1, 1));
  bad[0](0, 0) = cd(1.0, 0.0);
  bad[1](0, 0) = cd(-1.0, 0.0);
  CHECK_THROWS_AS((void)field_bgb(2, 1, bad, g, 1.2, 3.2, 1.0, false), std::runtime_error);
}

TEST_CASE("lacunary 1D coefficient: factors and smoothness seams") {
  const int K = 12;
  // fast factor
  for (double y : {0.0, 0.13, -0.49})
    CHECK(counterexample_a2(y) == doctest::Approx(4.0 * std::sqrt(M_PI) / (2.0 + std::sin(2 * M_PI * y))));

  // slow factor equals 1 outside (0,1) and is continuous at the seams
  CHECK(counterexample_a1(K, 0.0) == 1.0);
  CHECK(counterexample_a1(K, 2.7) == 1.0);
  CHECK(counterexample_a1(K, -0.4) == 1.0);  // wraps to 3.6
  CHECK(std::abs(counterexample_a1(K, 1e-9) - 1.0) < 1e-6);
  CHECK(std::abs(counterexample_a1(K, 1.0 - 1e-9) - 1.0) < 1e-6);

  // derivative inside (0,1) matches the truncated series
  for (double x : {0.21, 0.5, 0.83}) {
    double hstep = 1e-6;
    double fd = (counterexample_a1(K, x + hstep) - counterexample_a1(K, x - hstep)) / (2 * hstep);
    double series = 0.0, p = M_PI;
    for (int k = 1; k <= K; ++k) {
      p *= 2.0;
      series += std::cos(p * x) / (double(k) * double(k));
    }
    // lacunary frequencies reach 2^12 pi, so allow h^2 * freq^3 curvature noise
    CHECK(std::abs(fd - series) < 1e-2);
  }

  CoefficientField f = field_counterexample(K, 4.0);
  CHECK(f.slow == SlowKind::ScalarFactor);
  CHECK(f.c_A > 0.0);
  MatrixXcd out(1, 1);
  f.eval({0.3, 0.0}, {0.2, 0.0}, out);
  CHECK(std::abs(out(0, 0) - counterexample_a1(K, 0.3, 4.0) * counterexample_a2(0.2)) < 1e-14);
}

TEST_CASE("declared constants survive the audits") {
  CoefficientField f = field_separable_1d(2.0, 2.0, 0.5, 2.0, 1.0, 0.75);
  CHECK(periodicity_error(f, 2.0, 50, 5) < 1e-12);
  CHECK(lipschitz_quotient_max(f, 2.0, 200, 6) <= f.lipschitz_x * (1.0 + 1e-9));
  CHECK(sampled_sup(f, 2.0, 48) <= f.sup_norm * (1.0 + 1e-9));

  CoefficientField lam = field_laminate_2d(1.0);
  CHECK(periodicity_error(lam, 1.0, 50, 7) < 1e-12);
  CHECK(sampled_sup(lam, 1.0, 24) <= lam.sup_norm * (1.0 + 1e-9));
  auto samples = lh_random_samples(lam, 1.0, 20, 8);
  CHECK(legendre_hadamard_min(lam, samples, 32) >= lam.c_A * (1.0 - 1e-9));
}

TEST_CASE("blockwise adjoint field transposes blocks and conjugates entries") {
  CoefficientField f = field_laminate_2d(1.0);
  // make it non-self-adjoint by twisting one off-diagonal block
  CoefficientField tw = f;
  tw.self_adjoint = false;
  tw.slow = SlowKind::General;
  tw.eval = [f](const Vec2& x, const Vec2& y, MatrixXcd& out) {
    f.eval(x, y, out);
    out(0, 1) += cd(0.2, 0.3);
  };
  CoefficientField adj = adjoint_field(tw);
  MatrixXcd a(2, 2), b(2, 2);
  Vec2 x{0.12, 0.77}, y{0.31, -0.18};
  tw.eval(x, y, a);
  adj.eval(x, y, b);
  CHECK((b - a.adjoint()).norm() < 1e-14);
  CoefficientField back = adjoint_field(adj);
  MatrixXcd c(2, 2);
  back.eval(x, y, c);
  CHECK((c - a).norm() < 1e-14);
}
