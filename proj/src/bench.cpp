#include "homog/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace homog {

GridFunction rhs_profile(const std::string& name, const Grid& g, int n) {
  GridFunction f(g, n);
  const double L = g.L;
  for (Index i = 0; i < g.nodes(); ++i) {
    double x0 = g.coord(i, 0), x1 = g.d == 2 ? g.coord(i, 1) : 0.0;
    for (int c = 0; c < n; ++c) {
      double ph = 0.5 * c;
      cd val;
      if (name == "smooth" || name.empty()) {
        val = std::sin(2 * M_PI * x0 / L + ph) + 0.4 * std::cos(4 * M_PI * x0 / L);
        if (g.d == 2)
          val += 0.6 * std::sin(2 * M_PI * x1 / L + 0.3) +
                 0.25 * std::cos(4 * M_PI * (x0 + x1) / L);
      } else if (name == "mode") {
        val = std::cos(2 * M_PI * x0 / L + ph);
        if (g.d == 2) val *= std::cos(2 * M_PI * x1 / L);
      } else {
        throw std::runtime_error("rhs profile: unknown name '" + name + "'");
      }
      f.at(i, c) = val;
    }
  }
  return f;
}

double fit_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::runtime_error("rate fit: need at least two matching points");
  double mx = 0, my = 0;
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0) || !(ys[i] > 0) || !std::isfinite(ys[i]))
      throw std::runtime_error("rate fit: data must be positive and finite");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(xs.size());
  my /= double(xs.size());
  double num = 0, den = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  if (den == 0) throw std::runtime_error("rate fit: degenerate abscissae");
  return num / den;
}

std::string ConvergenceReport::csv() const {
  std::string out = "eps,err0,err1,err2,iters_fine,iters_eff\n";
  for (const auto& r : rows)
    out += format_g17(r.eps) + "," + format_g17(r.err0) + "," + format_g17(r.err1) + "," +
           format_g17(r.err2) + "," + std::to_string(r.iters_fine) + "," +
           std::to_string(r.iters_eff) + "\n";
  out += "# rate_err0 = " + format_g17(rate0) + "\n";
  out += "# rate_err1 = " + format_g17(rate1) + "\n";
  out += "# rate_err2 = " + format_g17(rate2) + "\n";
  return out;
}

ConvergenceReport run_study(const CoefficientField& f, double L, const StudyParams& sp,
                            std::ostream* log) {
  if (sp.k_list.empty()) throw std::runtime_error("study: empty refinement list");
  const int p = sp.p > 0 ? sp.p : min_points_per_period(f.d);
  const cd mu = sp.mu_auto ? default_mu(f) : sp.mu;
  ConvergenceReport rep;
  std::vector<double> epss, e0s, e1s, e2s;
  for (int k : sp.k_list) {
    if (k < 0 || k > 20) throw std::runtime_error("study: refinement exponent out of range");
    const int m = 1 << k;
    const double eps = L / double(m);
    Grid macro{f.d, L, p * m};
    if (log)
      *log << "study: eps = " << format_g17(eps) << "  (grid " << macro.M
           << (f.d == 2 ? "^2" : "") << ")\n";
    CorrectorBundle b = make_corrector_bundle(f, macro, mu, sp.cell_points, sp.tol);
    CorrectorEpsOps ops = make_eps_ops(b, eps);
    GridFunction ff = rhs_profile(sp.rhs, macro, f.n);
    const double nf = l2_norm(ff);
    SolveReport repf, repe;
    FineSolver fine = make_fine_solver(f, macro, eps, mu, sp.tol);
    GridFunction ue = fine.solve(ff, &repf);
    GridFunction u0 = b.solver.solve(ff, &repe);
    StudyRow row;
    row.eps = eps;
    row.iters_fine = repf.iterations;
    row.iters_eff = repe.iterations;
    GridFunction d0(macro, f.n);
    d0.v = ue.v - u0.v;
    row.err0 = l2_norm(d0) / nf;
    GridFunction w1 = corrector_K_eps(ops, ff);
    FaceField dg = grad(ue);
    dg.v -= grad(u0).v;
    dg.v -= eps * grad(w1).v;
    row.err1 = face_norm(dg) / nf;
    if (sp.with_err2) {
      GridFunction uc = corrector_C_eps(ops, ff);
      GridFunction d2(macro, f.n);
      d2.v = ue.v - u0.v - eps * uc.v;
      row.err2 = l2_norm(d2) / nf;
    } else {
      row.err2 = std::numeric_limits<double>::quiet_NaN();
    }
    if (log)
      *log << "  err0 = " << format_g17(row.err0) << "  err1 = " << format_g17(row.err1)
           << "  err2 = " << format_g17(row.err2) << "  iters = " << row.iters_fine << "/"
           << row.iters_eff << "\n";
    if (!rep.rows.empty() && log) {
      const StudyRow& prev = rep.rows.back();
      if (row.err0 > 1.05 * prev.err0)
        *log << "# warning: err0 did not decrease under refinement (" << format_g17(prev.err0)
             << " -> " << format_g17(row.err0) << ")\n";
      if (row.iters_fine > 3 * std::max(1, prev.iters_fine))
        *log << "# note: fine-solve iterations growing quickly (" << prev.iters_fine << " -> "
             << row.iters_fine << ")\n";
    }
    rep.rows.push_back(row);
    epss.push_back(eps);
    // clamp so exactly-resolved cases (constant coefficients) still fit
    e0s.push_back(std::max(row.err0, 1e-300));
    e1s.push_back(std::max(row.err1, 1e-300));
    if (sp.with_err2) e2s.push_back(std::max(row.err2, 1e-300));
  }
  rep.rate0 = fit_rate(epss, e0s);
  rep.rate1 = fit_rate(epss, e1s);
  rep.rate2 = sp.with_err2 ? fit_rate(epss, e2s) : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

IdentityReport identity_terms(const CoefficientField& f, const Grid& macro, double eps, cd mu,
                              const GridFunction& ff, const GridFunction& gg, double tol) {
  if (f.d != 1 || f.n != 1) throw std::runtime_error("pairing identity: 1D scalar fields only");
  FineScale fs = validate_eps(macro, eps);
  const int p = fs.p;
  // cell grid pinned to p points: fine faces land exactly on cell faces
  CorrectorBundle b = make_corrector_bundle(f, macro, mu, p, tol);
  SmoothingOps S = make_smoothing(macro, b.cell, eps);
  FineSolver fine = make_fine_solver(f, macro, eps, mu, tol);
  GridFunction u0 = b.solver.solve(ff);
  GridFunction ue = fine.solve(ff);
  GridFunction uep = fine.solve_adjoint(gg);
  TwoScaleFunction U = corrector_K(b, ff);
  GridFunction Ueps = tau_S_two_scale(S, U);

  IdentityReport rep;
  GridFunction diff(macro, 1);
  diff.v = ue.v - u0.v - eps * Ueps.v;
  rep.lhs = l2_inner(diff, gg);

  FaceCoefficient aeps = sample_fine_faces(f, macro, eps);
  const Index M = macro.nodes();
  const double h = macro.h();
  // cell flux table G(i, j) = A(x_i, yface_j)(1 + grad_y N(x_i, yface_j));
  // its cell mean is the effective tensor at x_i, which closes the identity.
  std::vector<cd> G(size_t(M) * size_t(p));
  MatrixXcd Av(1, 1);
  for (Index i = 0; i < M; ++i) {
    const FaceField& Gy = b.table.at(i).Gy[0];
    Vec2 x{macro.coord(i, 0), 0.0};
    for (int j = 0; j < p; ++j) {
      f.eval(x, Vec2{cell_face_coord(b.cell, j), 0.0}, Av);
      G[size_t(i) * p + size_t(j)] = Av(0, 0) * (1.0 + Gy.at(0, j, 0));
    }
  }
  FaceField gu0 = grad(u0), guep = grad(uep);
  GridFunction rem(macro, 1);
  rem.v = u0.v - steklov(S, u0).v;
  FaceField gI = grad(rem);
  ZWindow zw = z_window(p);
  auto Uat = [&](Index node, int j) { return U.at(node, Index((j % p + p) % p), 0); };
  auto Fface = [&](Index l, int j) {
    Index lp = macro.nbr(l, 0, +1);
    return 0.5 * (G[size_t(l) * p + size_t(j)] + G[size_t(lp) * p + size_t(j)]) * gu0.at(0, l, 0);
  };
  cd t1 = 0, t2 = 0, t3 = 0, t4 = 0;
  for (Index i = 0; i < M; ++i) {
    int jn = S.fast_node(int(macro.unflatten(i)[0]));
    cd ai = aeps.v[aeps.base(0, i)];
    cd gup_i = std::conj(guep.at(0, i, 0));
    for (int t = 0; t <= p; ++t) {
      double w = zw.w[t];
      Index is = macro.nbr(i, 0, zw.s[t]);
      Index is1 = macro.nbr(is, 0, +1);
      cd Fsh = Fface(is, jn);
      t1 += w * Fsh * (std::conj(guep.at(0, is, 0)) - gup_i);
      cd dyU = 0.5 * double(p) *
               ((Uat(is, jn + 1) - Uat(is, jn)) + (Uat(is1, jn + 1) - Uat(is1, jn)));
      cd W = gu0.at(0, is, 0) + dyU;
      t2 += w * (Fsh - ai * W) * gup_i;
      cd dxU = 0.5 * ((Uat(is1, jn) - Uat(is, jn)) + (Uat(is1, jn + 1) - Uat(is, jn + 1))) / h;
      t3 -= eps * w * ai * dxU * gup_i;
    }
    t4 -= ai * gI.at(0, i, 0) * gup_i;
  }
  rep.terms = {h * t1, h * t2, h * t3, h * t4, eps * mu * l2_inner(Ueps, uep)};
  cd sum = 0;
  for (const cd& t : rep.terms) sum += t;
  double denom = l2_norm(ff) * l2_norm(gg);
  rep.residual = std::abs(rep.lhs - sum) / (denom > 0 ? denom : 1.0);
  return rep;
}

std::string CounterexampleReport::csv() const {
  std::string out = "k,eps,value,k2_value\n";
  for (const auto& r : rows)
    out += std::to_string(r.k) + "," + format_g17(r.eps) + "," + format_g17(r.value) + "," +
           format_g17(r.k2_value) + "\n";
  out += "# slope = " + format_g17(slope) + "\n";
  return out;
}

GridFunction counterexample_profile(const Grid& g) {
  if (g.d != 1) throw std::runtime_error("counterexample profile: 1D only");
  if (std::abs(g.L - 4.0) > 1e-12)
    throw std::runtime_error("counterexample profile: expects period L = 4");
  // C^1 periodic profile with unit slope across (0,1), smooth return on (1,4):
  // u' = 1 - (8/3) sin^2(pi (x-1)/3) there, so the mean of u' vanishes.
  GridFunction u(g, 1);
  for (Index i = 0; i < g.nodes(); ++i) {
    double x = g.coord(i, 0);
    if (x <= 1.0)
      u.at(i, 0) = x;
    else
      u.at(i, 0) = 1.0 - (x - 1.0) / 3.0 + (2.0 / M_PI) * std::sin(2.0 * M_PI * (x - 1.0) / 3.0);
  }
  return u;
}

CounterexampleReport counterexample_study(int K_terms, const std::vector<int>& k_list, int p,
                                          double tol, std::ostream* log) {
  const double L = 4.0;
  CoefficientField f = field_counterexample(K_terms, L);
  const cd mu(-1.0, 0.0);
  CounterexampleReport rep;
  std::vector<double> ks, vals;
  for (int k : k_list) {
    if (k < 1 || k > 16) throw std::runtime_error("counterexample study: k out of range");
    double eps = std::ldexp(1.0, -k);
    int m = int(std::lround(L / eps));
    Grid macro{1, L, p * m};
    if (log) *log << "counterexample: k = " << k << "  (grid " << macro.M << ")\n";
    CorrectorBundle b = make_corrector_bundle(f, macro, mu, 0, tol);
    CorrectorEpsOps ops = make_eps_ops(b, eps);
    GridFunction u0 = counterexample_profile(macro);
    GridFunction frhs(macro, 1);
    frhs.v = b.solver.op.apply(u0.v);
    cd val = form_M(ops, frhs, frhs);
    CounterexampleRow row;
    row.k = k;
    row.eps = eps;
    row.value = val.real();
    row.k2_value = double(k) * double(k) * val.real();
    rep.rows.push_back(row);
    ks.push_back(double(k));
    vals.push_back(std::max(row.value, 1e-300));
    if (log)
      *log << "  (M f, f) = " << format_g17(row.value) << "  k^2 value = "
           << format_g17(row.k2_value) << "  value/eps = " << format_g17(row.value / eps) << "\n";
  }
  rep.slope = fit_rate(ks, vals);
  return rep;
}

}  // namespace homog
