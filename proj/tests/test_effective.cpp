#include "homog/effective.hpp"

#include "homog/fft.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace homog;

TEST_CASE("x-independent 1D tensor is the harmonic mean") {
  CoefficientField f = field_separable_1d(1.0, 1.0, 0.0, 2.0, 1.0, 0.0);
  Grid macro{1, 1.0, 8};
  Grid cell = make_cell_grid(1, 256);
  EffectiveField eff = assemble_effective(f, build_table(f, macro, cell, 1e-13));
  for (Index i = 0; i < macro.nodes(); ++i)
    CHECK(std::abs(eff.A0[i](0, 0) - std::sqrt(3.0)) < 1e-6);
  CHECK(eff.self_adjoint);
  CHECK(eff.c_A == doctest::Approx(f.c_A));
}

TEST_CASE("laminate tensor: scalar slow factor times fixed diagonal") {
  CoefficientField f = field_laminate_2d(1.0);
  Grid macro{2, 1.0, 16};
  Grid cell = make_cell_grid(2, 64);
  EffectiveField eff = assemble_effective(f, build_table(f, macro, cell, 1e-12));
  for (Index i = 0; i < macro.nodes(); i += 7) {
    Vec2 x{macro.coord(i, 0), macro.coord(i, 1)};
    double c = f.slow_scalar(x);
    MatrixXcd want = MatrixXcd::Zero(2, 2);
    want(0, 0) = c * std::sqrt(3.0);
    want(1, 1) = c * 2.0 * std::sqrt(2.0);
    CHECK((eff.A0[i] - want).norm() < 1e-6);
  }
  CHECK(eff.lip_bound > 0.0);
  CHECK(effective_lh_min(eff, 40, 17) > 0.5);
}

TEST_CASE("constant field passes through unchanged") {
  MatrixXcd B(2, 2);
  B << cd(3.0, 0.2), cd(0.4, 0.1), cd(0.3, -0.1), cd(2.5, 0.0);
  // keep it coercive: add dominance on the diagonal
  B = B + 2.0 * MatrixXcd::Identity(2, 2);
  CoefficientField f = field_constant(2, 1, B);
  Grid macro{2, 1.0, 8};
  EffectiveField eff = assemble_effective(f, build_table(f, macro, make_cell_grid(2, 16), 1e-12));
  for (Index i = 0; i < macro.nodes(); i += 13) CHECK((eff.A0[i] - B).norm() < 1e-10);
}

TEST_CASE("face tensor averages the two adjacent nodes") {
  CoefficientField f = field_laminate_2d(1.0);
  Grid macro{2, 1.0, 8};
  EffectiveField eff = assemble_effective(f, build_table(f, macro, make_cell_grid(2, 32), 1e-12));
  FaceCoefficient F = effective_faces(eff);
  Index i = macro.flatten({3, 5});
  for (int k = 0; k < 2; ++k) {
    MatrixXcd want = 0.5 * (eff.A0[i] + eff.A0[macro.nbr(i, k, 1)]);
    // scalar case: the block for face family k is row k of the averaged tensor
    for (int c = 0; c < 2; ++c)
      CHECK(std::abs(F.v[F.base(k, i) + c] - want(k, c)) < 1e-13);
  }
}

TEST_CASE("default shift sits left of the sector") {
  CoefficientField f = field_separable_1d(1.0, 2.0, 0.5, 2.0, 1.0, 0.5);
  CHECK(default_mu(f) == cd(-(1.0 + f.C_A), 0.0));
}

TEST_CASE("resolvent solver: residuals, adjoint duality, sector refusal") {
  CoefficientField f = field_separable_1d(1.0, 2.0, 0.5, 2.0, 1.0, 0.5);
  Grid macro{1, 1.0, 64};
  EffectiveField eff = assemble_effective(f, build_table(f, macro, make_cell_grid(1, 128), 1e-13));
  ResolventSolver rs = make_effective_solver(eff, default_mu(f), 1e-12);

  GridFunction rhs(macro, 1);
  rhs.v = randn_cvec(macro.nodes(), 23);
  SolveReport rep;
  GridFunction u = rs.solve(rhs, &rep);
  CHECK(rep.converged);
  CHECK((rs.op.apply(u.v) - rhs.v).norm() < 5e-12 * rhs.v.norm());

  GridFunction g(macro, 1);
  g.v = randn_cvec(macro.nodes(), 24);
  cd a = l2_inner(rs.solve(rhs), g);
  cd b = l2_inner(rhs, rs.solve_adjoint(g));
  CHECK(std::abs(a - b) < 1e-10 * (std::abs(a) + std::abs(b)));

  CHECK_THROWS_AS((void)make_effective_solver(eff, cd(1.0, 0.0), 1e-10), std::runtime_error);
}

TEST_CASE("constant-coefficient resolvent agrees with the Fourier solution") {
  cd value(2.0, 0.5), mu(-1.5, 0.0);
  CoefficientField f = field_constant_scalar(1, 1, value);
  Grid macro{1, 1.0, 32};
  EffectiveField eff = assemble_effective(f, build_table(f, macro, make_cell_grid(1, 64), 1e-13));
  ResolventSolver rs = make_effective_solver(eff, mu, 1e-13);
  GridFunction rhs(macro, 1);
  rhs.v = randn_cvec(macro.nodes(), 31);
  GridFunction u = rs.solve(rhs);

  Eigen::VectorXd lam = laplacian_symbol(macro);
  VectorXcd hat = fft_forward(macro, rhs.v);
  for (Index i = 0; i < macro.nodes(); ++i) hat[i] /= (value * lam[i] - mu);
  VectorXcd want = fft_inverse(macro, hat);
  CHECK((u.v - want).norm() < 1e-9 * want.norm());
}

TEST_CASE("effective CSV export") {
  CoefficientField f = field_separable_1d(1.0, 2.0, 0.5, 2.0, 1.0, 0.0);
  Grid macro{1, 1.0, 4};
  EffectiveField eff = assemble_effective(f, build_table(f, macro, make_cell_grid(1, 32), 1e-12));
  const char* path = "effective_csv_test.csv";
  write_effective_csv(path, eff);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header.find("re") != std::string::npos);
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
  std::remove(path);
}
