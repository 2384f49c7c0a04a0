#include "homog/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace homog {

FaceField grad(const GridFunction& u) {
  const Grid& g = u.grid;
  FaceField F(g, u.n);
  const double ih = 1.0 / g.h();
  const Index N = g.nodes();
  for (int k = 0; k < g.d; ++k)
    for (Index i = 0; i < N; ++i) {
      Index ip = g.nbr(i, k, +1);
      for (int c = 0; c < u.n; ++c) F.at(k, i, c) = (u.at(ip, c) - u.at(i, c)) * ih;
    }
  return F;
}

GridFunction div_adj(const FaceField& F) {
  const Grid& g = F.grid;
  GridFunction r(g, F.n);
  const double ih = 1.0 / g.h();
  const Index N = g.nodes();
  for (int k = 0; k < g.d; ++k)
    for (Index i = 0; i < N; ++i) {
      Index im = g.nbr(i, k, -1);
      for (int c = 0; c < F.n; ++c) r.at(i, c) += (F.at(k, im, c) - F.at(k, i, c)) * ih;
    }
  return r;
}

NodeField avg_face_to_node(const FaceField& F) {
  const Grid& g = F.grid;
  NodeField G(g, F.n);
  const Index N = g.nodes();
  for (int k = 0; k < g.d; ++k)
    for (Index i = 0; i < N; ++i) {
      Index im = g.nbr(i, k, -1);
      for (int c = 0; c < F.n; ++c) G.at(i, k, c) = 0.5 * (F.at(k, im, c) + F.at(k, i, c));
    }
  return G;
}

FaceField avg_node_to_face(const NodeField& G) {
  const Grid& g = G.grid;
  FaceField F(g, G.n);
  const Index N = g.nodes();
  for (int k = 0; k < g.d; ++k)
    for (Index i = 0; i < N; ++i) {
      Index ip = g.nbr(i, k, +1);
      for (int c = 0; c < G.n; ++c) F.at(k, i, c) = 0.5 * (G.at(i, k, c) + G.at(ip, k, c));
    }
  return F;
}

cd l2_inner(const GridFunction& u, const GridFunction& v) {
  // a.dot(b) = a^H b, so v.dot(u) is linear in u and conjugates v.
  return u.grid.w() * v.v.dot(u.v);
}

double l2_norm(const GridFunction& u) { return std::sqrt(u.grid.w()) * u.v.norm(); }

cd face_inner(const FaceField& F, const FaceField& G) { return F.grid.w() * G.v.dot(F.v); }

double face_norm(const FaceField& F) { return std::sqrt(F.grid.w()) * F.v.norm(); }

double h1_norm(const GridFunction& u) {
  double a = l2_norm(u), b = face_norm(grad(u));
  return std::sqrt(a * a + b * b);
}

cd ts_inner(const TwoScaleFunction& U, const TwoScaleFunction& V) {
  double w = U.macro.w() / double(U.cell.nodes());
  return w * V.v.dot(U.v);
}

double ts_norm(const TwoScaleFunction& U) {
  return std::sqrt(U.macro.w() / double(U.cell.nodes())) * U.v.norm();
}

GridFunction cell_zero_mean(const GridFunction& u) {
  GridFunction r = u;
  const Index N = u.grid.nodes();
  for (int c = 0; c < u.n; ++c) {
    cd m = 0.0;
    for (Index i = 0; i < N; ++i) m += u.at(i, c);
    m /= double(N);
    for (Index i = 0; i < N; ++i) r.at(i, c) -= m;
  }
  return r;
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  GridFunction r = a;
  r.v += b.v;
  return r;
}
GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  GridFunction r = a;
  r.v -= b.v;
  return r;
}
GridFunction operator*(cd s, const GridFunction& a) {
  GridFunction r = a;
  r.v *= s;
  return r;
}
FaceField operator-(const FaceField& a, const FaceField& b) {
  FaceField r = a;
  r.v -= b.v;
  return r;
}
FaceField operator*(cd s, const FaceField& a) {
  FaceField r = a;
  r.v *= s;
  return r;
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_grid_csv(const std::string& path, const GridFunction& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const Grid& g = u.grid;
  out << (g.d == 1 ? "i" : "i,j");
  for (int c = 0; c < u.n; ++c) out << ",re" << c << ",im" << c;
  out << "\n";
  for (Index i = 0; i < g.nodes(); ++i) {
    auto I = g.unflatten(i);
    out << I[0];
    if (g.d == 2) out << "," << I[1];
    for (int c = 0; c < u.n; ++c)
      out << "," << format_g17(u.at(i, c).real()) << "," << format_g17(u.at(i, c).imag());
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

VectorXcd randn_cvec(Index size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  VectorXcd v(size);
  for (Index i = 0; i < size; ++i) {
    double re = nd(rng), im = nd(rng);
    v[i] = cd(re, im);
  }
  return v;
}

}  // namespace homog
