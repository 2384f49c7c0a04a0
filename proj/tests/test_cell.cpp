#include "homog/cell.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>

using namespace homog;

namespace {

// discrete flux of a 1D solve at face j
cd face_flux(const FaceCoefficient& A, const CellSolve& s, int j) {
  return A.v[A.base(0, j)] * (cd(1.0, 0.0) + s.Gy.at(0, j, 0));
}

}  // namespace

TEST_CASE("1D cell solve reproduces the quadrature closed form") {
  CoefficientField f = field_separable_1d(2.0, 2.0, 0.5, 2.0, 1.0, 0.75);
  Grid cell = make_cell_grid(1, 256);
  Vec2 x{0.31, 0.0};
  CellSolve s = solve_cell(f, x, 0, 0, cell, 1e-13);
  ClosedForm1D cf = closed_form_1d(f, x[0]);

  // flux constancy: A (1 + Gy) is the same on every face, equal to A0
  FaceCoefficient A = sample_cell_faces(f, x, cell);
  cd phi = face_flux(A, s, 0);
  for (int j = 1; j < cell.M; ++j) CHECK(std::abs(face_flux(A, s, j) - phi) < 1e-12 * std::abs(phi));
  CHECK(std::abs(phi - cf.A0) < 1e-10 * std::abs(cf.A0));

  // gradient profile matches A0/A - 1 at face centers
  for (int j = 0; j < cell.M; j += 17) {
    cd want = cf.grad_profile(cell_face_coord(cell, j));
    CHECK(std::abs(s.Gy.at(0, j, 0) - want) < 1e-9);
  }

  // zero mean solution, consistent gradient
  cd mean = 0.0;
  for (int j = 0; j < cell.M; ++j) mean += s.N.at(j, 0);
  CHECK(std::abs(mean) / cell.M < 1e-13);
  FaceField g = grad(s.N);
  CHECK((g.v - s.Gy.v).norm() < 1e-12 * (1.0 + s.Gy.v.norm()));

  CHECK(cell_weak_residual(A, s, 0, 0) < 1e-12);
}

TEST_CASE("harmonic mean oracle: 2 + sin has effective value sqrt(3)") {
  CoefficientField f = field_separable_1d(1.0, 1.0, 0.0, 2.0, 1.0, 0.0);
  Grid cell = make_cell_grid(1, 256);
  CellSolve s = solve_cell(f, {0.0, 0.0}, 0, 0, cell, 1e-13);
  FaceCoefficient A = sample_cell_faces(f, {0.0, 0.0}, cell);
  cd phi = face_flux(A, s, 0);
  // midpoint sampling of an analytic periodic integrand: error far below 1e-10
  CHECK(std::abs(phi - std::sqrt(3.0)) < 1e-10);
}

TEST_CASE("2D diagonal laminate reduces to per-dimension harmonic means") {
  CoefficientField f = field_laminate_2d(1.0);
  Grid cell = make_cell_grid(2, 64);
  Vec2 x{0.2, 0.7};
  double c = f.slow_scalar(x);
  FaceCoefficient A = sample_cell_faces(f, x, cell);

  for (int r = 0; r < 2; ++r) {
    CellSolve s = solve_cell(f, x, r, 0, cell, 1e-12);
    CHECK(cell_weak_residual(A, s, r, 0) < 1e-10);
    // mean flux = effective column r
    cd a00 = 0.0, a10 = 0.0;
    for (Index j = 0; j < cell.nodes(); ++j) {
      a00 += A.v[A.base(0, j) + 0] * (cd(r == 0 ? 1.0 : 0.0) + s.Gy.at(0, j, 0)) +
             A.v[A.base(0, j) + 1] * s.Gy.at(1, j, 0);
      a10 += A.v[A.base(1, j) + 0] * s.Gy.at(0, j, 0) +
             A.v[A.base(1, j) + 1] * (cd(r == 1 ? 1.0 : 0.0) + s.Gy.at(1, j, 0));
    }
    a00 /= double(cell.nodes());
    a10 /= double(cell.nodes());
    cd want0 = r == 0 ? cd(c * std::sqrt(3.0), 0.0) : cd(0.0, 0.0);
    cd want1 = r == 1 ? cd(c * 2.0 * std::sqrt(2.0), 0.0) : cd(0.0, 0.0);
    CHECK(std::abs(a00 - want0) < 1e-8);
    CHECK(std::abs(a10 - want1) < 1e-8);
  }
}

TEST_CASE("adjoint cell solve solves the blockwise adjoint problem") {
  CoefficientField f = field_separable_1d(1.0, 2.0, 0.5, 2.0, 1.0, 0.75);
  Grid cell = make_cell_grid(1, 128);
  Vec2 x{0.11, 0.0};
  CellSolve sp = solve_cell_adjoint(f, x, 0, 0, cell, 1e-13);
  FaceCoefficient Ap = sample_cell_faces(adjoint_field(f), x, cell);
  CHECK(cell_weak_residual(Ap, sp, 0, 0) < 1e-12);

  // self-adjoint field: the twin coincides with the direct solution
  CoefficientField fs = field_separable_1d(1.0, 2.0, 0.5, 2.0, 1.0, 0.0);
  CellSolve a = solve_cell(fs, x, 0, 0, cell, 1e-13);
  CellSolve b = solve_cell_adjoint(fs, x, 0, 0, cell, 1e-13);
  CHECK((a.N.v - b.N.v).norm() < 1e-11 * (1.0 + a.N.v.norm()));
}

TEST_CASE("table sharing follows the slow structure") {
  Grid macro{1, 1.0, 8};
  Grid cell = make_cell_grid(1, 64);

  CellSolutionTable shared = build_table(field_separable_1d(1.0, 2.0, 0.5, 2.0, 1.0, 0.0), macro, cell);
  CHECK(shared.shared);
  CHECK(shared.entries.size() == 1);
  CHECK(&shared.at(0) == &shared.at(5));

  CoefficientField gen;
  gen.d = 1;
  gen.n = 1;
  gen.c_A = 1.0;
  gen.C_A = 0.0;
  gen.sup_norm = 4.0;
  gen.lipschitz_x = 4.0 * M_PI;
  gen.slow = SlowKind::General;
  gen.eval = [](const Vec2& x, const Vec2& y, MatrixXcd& out) {
    out(0, 0) = 2.0 + 0.6 * std::sin(2 * M_PI * x[0]) + 0.3 * std::cos(2 * M_PI * y[0]) +
                0.5 * std::sin(2 * M_PI * x[0]) * std::cos(2 * M_PI * y[0]);
  };
  CellSolutionTable tab = build_table(gen, macro, cell);
  CHECK_FALSE(tab.shared);
  CHECK(Index(tab.entries.size()) == macro.nodes());
  // per-node entries really differ
  CHECK((tab.at(0).N[0].v - tab.at(2).N[0].v).norm() > 1e-6);
  // every entry solves its own cell problem
  for (Index i = 0; i < macro.nodes(); i += 3) {
    Vec2 x{macro.coord(i, 0), 0.0};
    FaceCoefficient A = sample_cell_faces(gen, x, cell);
    CellSolve s{tab.at(i).N[0], tab.at(i).Gy[0]};
    CHECK(cell_weak_residual(A, s, 0, 0) < 1e-11);
  }
}

TEST_CASE("cell CSV export writes one file per direction") {
  Grid macro{1, 1.0, 4};
  Grid cell = make_cell_grid(1, 32);
  CellSolutionTable tab = build_table(field_separable_1d(1.0, 2.0, 0.5, 2.0, 1.0, 0.5), macro, cell);
  std::string dir = "cell_csv_test";
  export_cell_csv(tab, 1, dir);
  CHECK(std::filesystem::exists(dir));
  int files = 0;
  for (auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".csv") ++files;
  CHECK(files >= 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("default cell resolutions") {
  CHECK(default_cell_points(1) == 256);
  CHECK(default_cell_points(2) == 64);
}
