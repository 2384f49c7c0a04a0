#include "homog/coeff.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>

namespace homog {

double wrap_period(double t, double L) {
  double r = std::fmod(t, L);
  return r < 0 ? r + L : r;
}

double wrap_cell(double t) {
  double r = t - std::floor(t + 0.5);
  return r >= 0.5 ? r - 1.0 : r;  // floor rounding edge
}

MatrixXcd eval_blocks(const CoefficientField& f, const Vec2& x, const Vec2& y) {
  MatrixXcd out(f.bn(), f.bn());
  f.eval(x, y, out);
  return out;
}

Sector sector_of(const CoefficientField& f) { return Sector{f.sup_norm / f.c_A, f.C_A}; }

bool sector_contains(const Sector& s, cd mu) {
  return std::abs(mu.imag()) <= s.slope * (mu.real() + s.shift);
}

namespace {

double op_norm(const MatrixXcd& A) {
  Eigen::JacobiSVD<MatrixXcd> svd(A);
  return svd.singularValues()(0);
}

double hermitian_min_eig(const MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  return es.eigenvalues()(0);
}

}  // namespace

CoefficientField field_constant(int d, int n, const MatrixXcd& B) {
  if (B.rows() != d * n || B.cols() != d * n) throw std::runtime_error("field_constant: bad block size");
  CoefficientField f;
  f.d = d;
  f.n = n;
  double cA = hermitian_min_eig(0.5 * (B + B.adjoint()));
  if (cA <= 0) throw std::runtime_error("field_constant: Re B not positive definite");
  f.c_A = cA;
  f.C_A = 0.0;
  f.sup_norm = op_norm(B);
  f.lipschitz_x = 0.0;
  f.self_adjoint = B.isApprox(B.adjoint(), 1e-14);
  f.slow = SlowKind::Uniform;
  f.eval = [B](const Vec2&, const Vec2&, MatrixXcd& out) { out = B; };
  f.eval_ref = [B](const Vec2&, MatrixXcd& out) { out = B; };
  return f;
}

CoefficientField field_constant_scalar(int d, int n, cd value) {
  MatrixXcd B = value * MatrixXcd::Identity(d * n, d * n);
  return field_constant(d, n, B);
}

CoefficientField field_separable_1d(double L, double cx0, double cx1, double ay0, double ay1,
                                    double ayi) {
  double cmin = cx0 - std::abs(cx1), cmax = cx0 + std::abs(cx1);
  double remin = ay0 - std::abs(ay1);
  if (cmin <= 0 || remin <= 0) throw std::runtime_error("field_separable_1d: not uniformly elliptic");
  // sup_y |a(y)|^2 = max over s in [-1,1] of (ay1^2-ayi^2) s^2 + 2 ay0 ay1 s + ay0^2 + ayi^2
  auto q = [&](double s) { return (ay1 * ay1 - ayi * ayi) * s * s + 2 * ay0 * ay1 * s + ay0 * ay0 + ayi * ayi; };
  double m2 = std::max(q(-1.0), q(1.0));
  if (ay1 * ay1 < ayi * ayi) {
    double sv = -ay0 * ay1 / (ay1 * ay1 - ayi * ayi);
    if (sv > -1 && sv < 1) m2 = std::max(m2, q(sv));
  }
  double asup = std::sqrt(m2);

  CoefficientField f;
  f.d = 1;
  f.n = 1;
  f.c_A = cmin * remin;
  f.C_A = 0.0;
  f.sup_norm = cmax * asup;
  f.lipschitz_x = std::abs(cx1) * (2 * M_PI / L) * asup;
  f.self_adjoint = (ayi == 0.0);
  f.slow = (cx1 == 0.0) ? SlowKind::Uniform : SlowKind::ScalarFactor;
  auto aval = [ay0, ay1, ayi](double y) {
    return cd(ay0 + ay1 * std::sin(2 * M_PI * y), ayi * std::cos(2 * M_PI * y));
  };
  auto cval = [cx0, cx1, L](double x) { return cx0 + cx1 * std::sin(2 * M_PI * x / L); };
  f.slow_scalar = [cval](const Vec2& x) { return cval(x[0]); };
  f.eval_ref = [aval](const Vec2& y, MatrixXcd& out) { out(0, 0) = aval(y[0]); };
  f.eval = [cval, aval](const Vec2& x, const Vec2& y, MatrixXcd& out) {
    out(0, 0) = cval(x[0]) * aval(y[0]);
  };
  return f;
}

CoefficientField field_laminate_2d(double L) {
  CoefficientField f;
  f.d = 2;
  f.n = 1;
  f.c_A = 0.5 * 1.0;
  f.C_A = 0.0;
  f.sup_norm = 1.5 * 4.0;
  f.lipschitz_x = 4.0 * M_PI * std::sqrt(2.0) / L;
  f.self_adjoint = true;
  f.slow = SlowKind::ScalarFactor;
  f.slow_scalar = [L](const Vec2& x) {
    return 1.0 + 0.5 * std::sin(2 * M_PI * x[0] / L) * std::sin(2 * M_PI * x[1] / L);
  };
  f.eval_ref = [](const Vec2& y, MatrixXcd& out) {
    out.setZero();
    out(0, 0) = 2.0 + std::sin(2 * M_PI * y[0]);
    out(1, 1) = 3.0 + std::cos(2 * M_PI * y[1]);
  };
  auto sc = f.slow_scalar;
  auto ref = f.eval_ref;
  f.eval = [sc, ref](const Vec2& x, const Vec2& y, MatrixXcd& out) {
    ref(y, out);
    out *= sc(x);
  };
  return f;
}

CoefficientField field_bgb(int d, int n, const std::vector<MatrixXcd>& b,
                           const std::function<void(const Vec2&, const Vec2&, MatrixXcd&)>& g,
                           double g_min, double g_sup, double g_lip, bool g_self_adjoint) {
  if (int(b.size()) != d) throw std::runtime_error("field_bgb: need one b_k per dimension");
  const Index m = b[0].rows();
  for (const auto& bk : b)
    if (bk.rows() != m || bk.cols() != n) throw std::runtime_error("field_bgb: inconsistent b_k shapes");
  if (g_min <= 0) throw std::runtime_error("field_bgb: Re g must be uniformly positive definite");

  // Symbol check on a sphere mesh: b(xi) = sum_k xi_k b_k must be injective.
  MatrixXcd B(m, Index(d) * n);
  for (int k = 0; k < d; ++k) B.middleCols(Index(k) * n, n) = b[k];
  double bnorm2 = op_norm(B) * op_norm(B);
  double alpha = std::numeric_limits<double>::infinity();
  const int mesh = d == 1 ? 1 : 256;
  for (int i = 0; i < mesh; ++i) {
    double th = 2 * M_PI * i / mesh;
    Vec2 xi = d == 1 ? Vec2{1.0, 0.0} : Vec2{std::cos(th), std::sin(th)};
    MatrixXcd bxi = MatrixXcd::Zero(m, n);
    for (int k = 0; k < d; ++k) bxi += xi[k] * b[k];
    double lmin = hermitian_min_eig(bxi.adjoint() * bxi);
    if (lmin <= 1e-12 * bnorm2)
      throw std::runtime_error("field_bgb: symbol b(xi) degenerate at mesh direction " +
                               std::to_string(i));
    alpha = std::min(alpha, lmin);
  }

  CoefficientField f;
  f.d = d;
  f.n = n;
  f.c_A = alpha * g_min;
  f.C_A = 0.0;
  f.sup_norm = bnorm2 * g_sup;
  f.lipschitz_x = bnorm2 * g_lip;
  f.self_adjoint = g_self_adjoint;
  f.slow = SlowKind::General;
  f.eval = [B, g, m](const Vec2& x, const Vec2& y, MatrixXcd& out) {
    MatrixXcd gxy(m, m);
    g(x, y, gxy);
    out = B.adjoint() * gxy * B;
  };
  return f;
}

double counterexample_a1(int K_terms, double x, double L) {
  double xw = wrap_period(x, L);
  if (xw <= 0.0 || xw >= 1.0) return 1.0;
  double s = 0.0;
  double p = M_PI;
  for (int k = 1; k <= K_terms; ++k) {
    p *= 2.0;  // 2^k pi
    s += std::sin(p * xw) / (double(k) * double(k) * p);
  }
  return 1.0 + s;
}

double counterexample_a2(double y) { return 4.0 * std::sqrt(M_PI) / (2.0 + std::sin(2 * M_PI * y)); }

CoefficientField field_counterexample(int K_terms, double L) {
  if (K_terms < 1) throw std::runtime_error("field_counterexample: K_terms must be >= 1");
  double tail = 1.0 / (double(K_terms) * K_terms * std::pow(2.0, K_terms) * M_PI);
  if (tail < 0.8 * std::numeric_limits<double>::epsilon())
    std::cerr << "warning: counterexample truncation term " << K_terms
              << " is below working precision; extra terms have no effect\n";
  double SK = 0.0, p = M_PI;
  for (int k = 1; k <= K_terms; ++k) {
    p *= 2.0;
    SK += 1.0 / (double(k) * double(k) * p);
  }
  const double a2min = 4.0 * std::sqrt(M_PI) / 3.0, a2max = 4.0 * std::sqrt(M_PI);

  CoefficientField f;
  f.d = 1;
  f.n = 1;
  f.c_A = (1.0 - SK) * a2min;
  f.C_A = 0.0;
  f.sup_norm = (1.0 + SK) * a2max;
  f.lipschitz_x = (M_PI * M_PI / 6.0) * a2max;
  f.self_adjoint = true;
  f.slow = SlowKind::ScalarFactor;
  f.slow_scalar = [K_terms, L](const Vec2& x) { return counterexample_a1(K_terms, x[0], L); };
  f.eval_ref = [](const Vec2& y, MatrixXcd& out) { out(0, 0) = counterexample_a2(y[0]); };
  f.eval = [K_terms, L](const Vec2& x, const Vec2& y, MatrixXcd& out) {
    out(0, 0) = counterexample_a1(K_terms, x[0], L) * counterexample_a2(y[0]);
  };
  return f;
}

double legendre_hadamard_min(const CoefficientField& f, const std::vector<LHSample>& samples,
                             int My) {
  const int bn = f.bn();
  MatrixXcd A(bn, bn);
  VectorXcd w(bn);
  double worst = std::numeric_limits<double>::infinity();
  const Index cells = f.d == 1 ? My : Index(My) * My;
  for (const auto& s : samples) {
    for (int k = 0; k < f.d; ++k)
      for (int a = 0; a < f.n; ++a) w[k * f.n + a] = s.xi[k] * s.eta[a];
    double acc = 0.0;
    for (Index j = 0; j < cells; ++j) {
      Vec2 y{-0.5 + (double(j % My) + 0.5) / My, 0.0};
      if (f.d == 2) y = Vec2{-0.5 + (double(j / My) + 0.5) / My, -0.5 + (double(j % My) + 0.5) / My};
      f.eval(s.x, y, A);
      acc += (w.dot(A * w)).real();
    }
    worst = std::min(worst, acc / double(cells));
  }
  return worst;
}

std::vector<LHSample> lh_random_samples(const CoefficientField& f, double L, int count,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, L);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<LHSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    LHSample s;
    for (int k = 0; k < f.d; ++k) s.x[k] = ux(rng);
    double nrm = 0.0;
    while (nrm < 1e-8) {
      nrm = 0.0;
      for (int k = 0; k < f.d; ++k) {
        s.xi[k] = nd(rng);
        nrm += s.xi[k] * s.xi[k];
      }
      nrm = std::sqrt(nrm);
    }
    for (int k = 0; k < f.d; ++k) s.xi[k] /= nrm;
    s.eta = randn_cvec(f.n, rng());
    s.eta /= s.eta.norm();
    out.push_back(std::move(s));
  }
  return out;
}

double periodicity_error(const CoefficientField& f, double L, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, L), uy(-0.5, 0.5);
  std::uniform_int_distribution<int> sh(-2, 2);
  MatrixXcd A0(f.bn(), f.bn()), A1(f.bn(), f.bn());
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec2 x{ux(rng), f.d == 2 ? ux(rng) : 0.0};
    Vec2 y{uy(rng), f.d == 2 ? uy(rng) : 0.0};
    Vec2 ys = y;
    for (int k = 0; k < f.d; ++k) ys[k] += sh(rng);
    f.eval(x, y, A0);
    f.eval(x, ys, A1);
    worst = std::max(worst, (A1 - A0).norm() / std::max(A0.norm(), 1e-300));
  }
  return worst;
}

double lipschitz_quotient_max(const CoefficientField& f, double L, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, L), uy(-0.5, 0.5), ud(-1.0, 1.0);
  MatrixXcd A0(f.bn(), f.bn()), A1(f.bn(), f.bn());
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec2 x{ux(rng), f.d == 2 ? ux(rng) : 0.0};
    Vec2 y{uy(rng), f.d == 2 ? uy(rng) : 0.0};
    Vec2 x2 = x;
    double dist2 = 0.0;
    for (int k = 0; k < f.d; ++k) {
      double dk = 1e-4 * L * ud(rng);
      x2[k] += dk;
      dist2 += dk * dk;
    }
    if (dist2 == 0.0) continue;
    f.eval(x, y, A0);
    f.eval(x2, y, A1);
    worst = std::max(worst, op_norm(A1 - A0) / std::sqrt(dist2));
  }
  return worst;
}

double sampled_sup(const CoefficientField& f, double L, int per_dim) {
  MatrixXcd A(f.bn(), f.bn());
  double worst = 0.0;
  const Index nx = f.d == 1 ? per_dim : Index(per_dim) * per_dim;
  const Index ny = nx;
  for (Index ix = 0; ix < nx; ++ix) {
    Vec2 x{L * double(ix % per_dim) / per_dim, 0.0};
    if (f.d == 2) x = Vec2{L * double(ix / per_dim) / per_dim, L * double(ix % per_dim) / per_dim};
    for (Index iy = 0; iy < ny; ++iy) {
      Vec2 y{-0.5 + double(iy % per_dim) / per_dim, 0.0};
      if (f.d == 2)
        y = Vec2{-0.5 + double(iy / per_dim) / per_dim, -0.5 + double(iy % per_dim) / per_dim};
      f.eval(x, y, A);
      worst = std::max(worst, op_norm(A));
    }
  }
  return worst;
}

}  // namespace homog
