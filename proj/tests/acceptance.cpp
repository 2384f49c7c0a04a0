// Acceptance gate: ten end-to-end criteria, one [PASS]/[FAIL] line each.
// Exit code is the number of failed criteria; details go to stderr.

#include "homog/bench.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace homog;

namespace {

int g_checks_failed = 0;

void fail_detail(const std::string& msg) {
  ++g_checks_failed;
  std::cerr << "  [FAIL] " << msg << "\n";
}

void check(bool ok, const std::string& msg) {
  if (!ok) fail_detail(msg);
}

void check_le(double value, double bound, const std::string& what) {
  if (!(value <= bound))
    fail_detail(what + " = " + format_g17(value) + " exceeds " + format_g17(bound));
}

void check_in(double value, double lo, double hi, const std::string& what) {
  if (!(value >= lo && value <= hi))
    fail_detail(what + " = " + format_g17(value) + " outside [" + format_g17(lo) + ", " +
                format_g17(hi) + "]");
}

int run_criterion(int id, const std::string& title, const std::function<void()>& body) {
  g_checks_failed = 0;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const std::exception& e) {
    fail_detail(std::string("unexpected exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream ts;
  ts << std::fixed << std::setprecision(1) << secs;
  bool ok = g_checks_failed == 0;
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << title << "  ("
            << ts.str() << " s)" << std::endl;
  return ok ? 0 : 1;
}

GridFunction random_f(const Grid& g, int n, std::uint64_t seed) {
  GridFunction u(g, n);
  u.v = randn_cvec(u.v.size(), seed);
  return u;
}

TwoScaleFunction random_ts(const Grid& m, const Grid& c, int n, std::uint64_t seed) {
  TwoScaleFunction U(m, c, n);
  U.v = randn_cvec(U.v.size(), seed);
  return U;
}

GridFunction smooth_u(const Grid& g) {
  GridFunction u(g, 1);
  for (Index i = 0; i < g.nodes(); ++i) {
    double x0 = g.coord(i, 0) / g.L, x1 = g.d == 2 ? g.coord(i, 1) / g.L : 0.0;
    u.at(i, 0) = cd(std::sin(2 * M_PI * x0) + 0.3 * std::cos(2 * M_PI * (x0 + x1)),
                    0.5 * std::cos(4 * M_PI * x0));
  }
  return u;
}

// 1D separable test field; ayi = 0 keeps it self-adjoint, ayi != 0 makes the
// fast factor genuinely complex.
CoefficientField tf1d(double ayi) {
  return field_separable_1d(1.0, 2.0, 0.5, 2.0, 1.0, ayi);
}

// fully general (per-node cell solves) complex 1D field with x-y coupling
CoefficientField general_1d_cplx() {
  CoefficientField f;
  f.d = 1;
  f.n = 1;
  f.c_A = 0.6;
  f.C_A = 1.2;
  f.sup_norm = 3.5;
  f.lipschitz_x = 2 * M_PI * 1.2;
  f.self_adjoint = false;
  f.slow = SlowKind::General;
  f.eval = [](const Vec2& x, const Vec2& y, MatrixXcd& out) {
    out(0, 0) = cd(2.0 + 0.6 * std::sin(2 * M_PI * x[0]) + 0.3 * std::cos(2 * M_PI * y[0]) +
                       0.5 * std::sin(2 * M_PI * x[0]) * std::cos(2 * M_PI * y[0]),
                   0.4 + 0.2 * std::sin(2 * M_PI * y[0]) + 0.1 * std::cos(2 * M_PI * x[0]));
  };
  return f;
}

// complex diagonal 2D field with a scalar slow factor (shared cell solves).
// The diagonal entries each depend on both fast variables: a product profile
// (entry k depending on y_k alone) would make the cell flux constant and
// collapse the slow-derivative map to zero, leaving nothing to pair.
CoefficientField scalar_factor_2d_cplx() {
  CoefficientField f;
  f.d = 2;
  f.n = 1;
  f.c_A = 0.8;
  f.C_A = 1.0;
  f.sup_norm = 6.0;
  f.lipschitz_x = 13.0;
  f.self_adjoint = false;
  f.slow = SlowKind::ScalarFactor;
  f.slow_scalar = [](const Vec2& x) {
    return 1.0 + 0.3 * std::sin(2 * M_PI * x[0]) * std::sin(2 * M_PI * x[1]);
  };
  f.eval_ref = [](const Vec2& y, MatrixXcd& out) {
    out.setZero();
    out(0, 0) = cd(2.0 + 0.8 * std::sin(2 * M_PI * y[0]) * std::cos(2 * M_PI * y[1]),
                   0.4 * std::cos(2 * M_PI * y[0]));
    out(1, 1) = cd(3.0 + std::cos(2 * M_PI * y[1]) +
                       0.6 * std::sin(2 * M_PI * y[0]) * std::sin(2 * M_PI * y[1]),
                   -0.3 * std::sin(2 * M_PI * y[1]));
  };
  f.eval = [slow = f.slow_scalar, ref = f.eval_ref](const Vec2& x, const Vec2& y,
                                                    MatrixXcd& out) {
    ref(y, out);
    out *= slow(x);
  };
  return f;
}

// two-scale norm of the slow forward difference, matching the ts_inner measure
double x_grad_ts_norm(const TwoScaleFunction& U) {
  const Grid& m = U.macro;
  const double h = m.h();
  double acc = 0.0;
  for (int k = 0; k < m.d; ++k)
    for (Index i = 0; i < m.nodes(); ++i) {
      Index ip = m.nbr(i, k, +1);
      for (Index j = 0; j < U.cell.nodes(); ++j)
        for (int c = 0; c < U.n; ++c) acc += std::norm((U.at(ip, j, c) - U.at(i, j, c)) / h);
    }
  return std::sqrt(acc * m.w() / double(U.cell.nodes()));
}

std::optional<ConvergenceReport> g_study_1d;  // shared between criteria 3 and 4

// 1. For constant coefficients the homogenized problem is the problem itself:
// all three errors sit at solver-tolerance level for every eps.
void criterion1() {
  for (int d : {1, 2}) {
    CoefficientField f = field_constant_scalar(d, 1, cd(2.0, 0.5));
    StudyParams sp;
    sp.p = d == 1 ? 32 : 16;
    // above the double-precision residual floor of the M = 512 fine solve
    sp.tol = 1e-11;
    sp.k_list = d == 1 ? std::vector<int>{2, 3, 4} : std::vector<int>{1, 2};
    ConvergenceReport rep = run_study(f, 1.0, sp);
    for (const StudyRow& r : rep.rows) {
      std::string tag = std::to_string(d) + "D eps=" + format_g17(r.eps);
      check_le(r.err0, 1e-9, tag + " plain error");
      check_le(r.err1, 1e-9, tag + " gradient error");
      check_le(r.err2, 1e-9, tag + " second-order error");
    }
  }
}

// 2. 1D fast coefficient 2 + sin(2 pi y): the effective constant is the
// harmonic mean sqrt(3).
void criterion2() {
  CoefficientField f = field_separable_1d(1.0, 1.0, 0.0, 2.0, 1.0, 0.0);
  Grid macro{1, 1.0, 8};
  CorrectorBundle b = make_corrector_bundle(f, macro, default_mu(f), 256, 1e-12);
  cd a0 = b.eff.A0[0](0, 0);
  check_le(std::abs(a0 - std::sqrt(3.0)), 1e-6, "|effective constant - sqrt(3)|");
}

// 3. Generic separable 1D field, eps = 2^-k for k = 3..8: the plain error and
// the corrected gradient error both decay at first order, and the plain error
// is not spuriously better than first order.
void criterion3() {
  CoefficientField f = tf1d(0.0);
  StudyParams sp;
  sp.p = 32;
  // the k = 8 fine solve runs at M = 8192 where ~1e-9 is the attainable
  // floor; 1e-8 is still four decades below the smallest measured error
  sp.tol = 1e-8;
  sp.k_list = {3, 4, 5, 6, 7, 8};
  g_study_1d = run_study(f, 1.0, sp);
  std::cout << "  fitted rates: err0 " << format_g17(g_study_1d->rate0) << ", err1 "
            << format_g17(g_study_1d->rate1) << ", err2 " << format_g17(g_study_1d->rate2)
            << "\n";
  check_in(g_study_1d->rate0, 0.8, 1.3, "rate of the plain error");
  check_in(g_study_1d->rate1, 0.75, 1.3, "rate of the corrected gradient error");
  check_le(g_study_1d->rate0, 1.35, "sharpness guard on the plain-error rate");
}

// 4. Same study: the second corrector reaches second order.
void criterion4() {
  if (!g_study_1d) {
    check(false, "study from criterion 3 unavailable");
    return;
  }
  check_in(g_study_1d->rate2, 1.7, 2.3, "rate of the second-order error");
}

// 5. Smoothing toolbox inequalities with explicit constants r_Q = sqrt(d)/2
// and slack 1 + 5h, plus the exact z-norm identity on aligned grids (q = 1).
void criterion5() {
  for (int d : {1, 2}) {
    Grid macro{d, 1.0, d == 1 ? 256 : 64};
    int p = d == 1 ? 32 : 16;
    Grid cell = make_cell_grid(d, p);
    double eps = double(p) / macro.M;
    SmoothingOps S = make_smoothing(macro, cell, eps);
    double rQ = 0.5 * std::sqrt(double(d));
    double slack = 1.0 + 5.0 * macro.h();
    std::string tag = std::to_string(d) + "D ";

    std::vector<GridFunction> battery;
    battery.push_back(smooth_u(macro));
    battery.push_back(random_f(macro, 1, 71 + std::uint64_t(d)));
    battery.push_back(random_f(macro, 2, 81 + std::uint64_t(d)));
    for (size_t bi = 0; bi < battery.size(); ++bi) {
      const GridFunction& u = battery[bi];
      std::string utag = tag + "profile " + std::to_string(bi) + ": ";
      double gn = face_norm(grad(u));
      check_le(l2_norm(steklov(S, u)), l2_norm(u) * (1.0 + 1e-13), utag + "averaging contraction");
      check_le(l2_norm(u - steklov(S, u)), slack * eps * rQ * gn,
               utag + "averaging error vs gradient");
      check_le(translate_minus_id_znorm(S, u), slack * eps * rQ * gn,
               utag + "translation error vs gradient");
    }

    // two-scale: one structured and one random function
    TwoScaleFunction Us(macro, cell, 1);
    for (Index i = 0; i < macro.nodes(); ++i)
      for (Index j = 0; j < cell.nodes(); ++j)
        Us.at(i, j, 0) = std::sin(2 * M_PI * macro.coord(i, 0)) *
                         (1.0 + 0.5 * std::cos(2 * M_PI * cell_node_coord(cell, int(j % cell.M))));
    TwoScaleFunction Ur = random_ts(macro, cell, 1, 91 + std::uint64_t(d));
    for (const TwoScaleFunction* U : {&Us, &Ur}) {
      std::string utag = tag + (U == &Us ? "structured: " : "random: ");
      check_le(std::abs(tau_T_norm(S, *U) - ts_norm(*U)), 1e-12 * ts_norm(*U),
               utag + "aligned z-norm identity");
      check_le(tau_T_minus_tau_S_norm(S, *U), slack * 2.0 * eps * rQ * x_grad_ts_norm(*U),
               utag + "window spread vs slow difference");
    }
  }
}

// 6. The exact splitting of (u_eps - u0 - eps corrector, g) into its five
// terms closes to near round-off, far below the 1e-6 gate.
void criterion6() {
  CoefficientField f = tf1d(0.5);
  std::uint64_t seed = 500;
  for (int k : {3, 4}) {
    double eps = 1.0 / double(1 << k);
    Grid macro{1, 1.0, 32 * (1 << k)};
    for (int trial = 0; trial < 5; ++trial) {
      GridFunction ff = random_f(macro, 1, seed++);
      GridFunction gg = random_f(macro, 1, seed++);
      IdentityReport rep = identity_terms(f, macro, eps, default_mu(f), ff, gg, 1e-10);
      check_le(rep.residual, 1e-6,
               "eps=" + format_g17(eps) + " trial " + std::to_string(trial) + " residual");
    }
  }
}

// 7. Every corrector map reports an exact adjoint on three representative
// bundles: separable complex 1D, fully general complex 1D, diagonal complex
// 2D with a scalar slow factor.
void criterion7() {
  struct Case {
    std::string name;
    CoefficientField field;
    Grid macro;
    int Mc;
    bool l_collapses;  // 1D shared tables: constant cell flux zeroes the L map
  };
  std::vector<Case> cases;
  cases.push_back({"separable 1D", tf1d(0.5), Grid{1, 1.0, 64}, 32, true});
  cases.push_back({"general 1D", general_1d_cplx(), Grid{1, 1.0, 64}, 32, false});
  cases.push_back({"scalar-factor 2D", scalar_factor_2d_cplx(), Grid{2, 1.0, 32}, 32, false});
  std::uint64_t seed = 7000;
  for (const Case& c : cases) {
    // a strongly coercive shift keeps the resolvent solves well conditioned,
    // so their true-residual floor (and hence the adjoint mismatch they leak
    // into the pairing) sits clear of the 1e-12 bar; 3e-13 is attainable here
    CorrectorBundle b = make_corrector_bundle(c.field, c.macro, cd(-12.0, 0.0), c.Mc, 3e-13);
    CorrectorEpsOps ops = make_eps_ops(b, 0.5);
    std::vector<std::pair<std::string, LinearMap>> maps;
    maps.emplace_back("two-scale corrector", map_K(b));
    maps.emplace_back("windowed corrector", map_K_eps(ops, false));
    maps.emplace_back("windowed corrector (adjoint family)", map_K_eps(ops, true));
    if (c.l_collapses) {
      // for a 1D scalar-factor field the cell flux is constant in the fast
      // variable and the cell solutions average to zero, so the
      // slow-derivative map is identically zero: an adjoint pairing on it
      // would compare roundoff against roundoff. Assert the collapse and
      // test the map's adjoint on the nondegenerate bundles instead.
      for (bool plus : {false, true}) {
        VectorXcd x = randn_cvec(b.space().dim, seed += 100);
        check_le(map_L(b, plus).apply(x).norm(), 1e-12 * x.norm(),
                 c.name + ": slow-derivative term collapses to zero");
      }
    } else {
      maps.emplace_back("slow-derivative term", map_L(b, false));
      maps.emplace_back("slow-derivative term (adjoint family)", map_L(b, true));
    }
    maps.emplace_back("window commutator", map_M_eps(ops));
    maps.emplace_back("fused second corrector", map_C_eps(ops));
    for (const auto& [name, map] : maps)
      check_le(adjoint_error(map, 10, seed += 100), 1e-12, c.name + ": " + name);
  }
}

// 8. Lacunary 1D coefficient: the commutator pairing decays like a negative
// power of k = log2(1/eps), far slower than eps itself.
void criterion8() {
  CounterexampleReport rep = counterexample_study(12, {4, 5, 6, 7, 8}, 32, 1e-10);
  for (const CounterexampleRow& r : rep.rows)
    std::cout << "  k=" << r.k << "  eps=" << format_g17(r.eps) << "  value="
              << format_g17(r.value) << "  k^2*value=" << format_g17(r.k2_value)
              << "  value/eps=" << format_g17(r.value / r.eps) << "\n";
  std::cout << "  log-log slope in k: " << format_g17(rep.slope) << "\n";
  for (const CounterexampleRow& r : rep.rows)
    check_in(r.k2_value, 0.5, 1.5, "k=" + std::to_string(r.k) + " normalized value");
  check_in(rep.slope, -2.4, -1.6, "log-log slope in k");
  for (size_t i = 1; i < rep.rows.size(); ++i)
    check(rep.rows[i].value / rep.rows[i].eps > rep.rows[i - 1].value / rep.rows[i - 1].eps,
          "value/eps not strictly increasing at k=" + std::to_string(rep.rows[i].k));
}

// 9. The quadrature forms agree with their operator realizations.
void criterion9() {
  CoefficientField f = tf1d(0.5);
  Grid macro{1, 1.0, 512};
  CorrectorBundle b = make_corrector_bundle(f, macro, default_mu(f), 256, 1e-10);
  CorrectorEpsOps ops = make_eps_ops(b, 1.0 / 16.0);
  std::uint64_t seed = 900;
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction ff = random_f(macro, 1, seed++);
    GridFunction gg = random_f(macro, 1, seed++);
    double scale = l2_norm(ff) * l2_norm(gg);
    cd viaL = l2_inner(corrector_L(b, ff), gg);
    check_le(std::abs(form_L(b, ff, gg) - viaL), 1e-6 * (scale + std::abs(viaL)),
             "slow-derivative form, trial " + std::to_string(trial));
    cd viaM = l2_inner(corrector_M_eps(ops, ff), gg);
    check_le(std::abs(form_M(ops, ff, gg) - viaM), 1e-6 * (scale + std::abs(viaM)),
             "window-commutator form, trial " + std::to_string(trial));
  }
}

// 10. 2D laminate: the effective tensor matches its closed form, and the
// plain error decays at first order in a small 2D study.
void criterion10() {
  CoefficientField f = field_laminate_2d(1.0);
  Grid macro{2, 1.0, 64};
  CorrectorBundle b = make_corrector_bundle(f, macro, default_mu(f), 0, 1e-10);
  double worst = 0.0;
  for (Index i = 0; i < macro.nodes(); ++i) {
    double c = 1.0 + 0.5 * std::sin(2 * M_PI * macro.coord(i, 0)) *
                         std::sin(2 * M_PI * macro.coord(i, 1));
    MatrixXcd want = MatrixXcd::Zero(2, 2);
    want(0, 0) = c * std::sqrt(3.0);
    want(1, 1) = c * 2.0 * std::sqrt(2.0);
    worst = std::max(worst, (b.eff.A0[i] - want).cwiseAbs().maxCoeff());
  }
  check_le(worst, 1e-4, "effective tensor vs closed form");

  StudyParams sp;
  sp.p = 16;
  sp.tol = 1e-8;
  sp.k_list = {2, 3, 4, 5};
  sp.with_err2 = false;
  ConvergenceReport rep = run_study(f, 1.0, sp);
  std::cout << "  fitted rate: err0 " << format_g17(rep.rate0) << "\n";
  check_in(rep.rate0, 0.7, 1.4, "rate of the plain error");
}

}  // namespace

int main() {
  std::cout << "homogenization acceptance suite\n";
  int failed = 0;
  failed += run_criterion(1, "constant coefficients are reproduced exactly", criterion1);
  failed += run_criterion(2, "1D effective coefficient equals the harmonic mean", criterion2);
  failed += run_criterion(3, "plain and corrected-gradient errors decay at first order",
                          criterion3);
  failed += run_criterion(4, "second corrector reaches second order", criterion4);
  failed += run_criterion(5, "smoothing inequalities hold with explicit constants", criterion5);
  failed += run_criterion(6, "error pairing splits exactly into its five terms", criterion6);
  failed += run_criterion(7, "corrector maps expose exact adjoints", criterion7);
  failed += run_criterion(8, "lacunary coefficient decays in k, not in eps", criterion8);
  failed += run_criterion(9, "quadrature forms match the operator pairings", criterion9);
  failed += run_criterion(10, "2D laminate study matches closed form at first order",
                          criterion10);
  if (failed == 0)
    std::cout << "all criteria passed\n";
  else
    std::cout << failed << " criterion(s) failed\n";
  return failed;
}
