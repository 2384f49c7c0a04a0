#pragma once

#include "homog/bench.hpp"

#include <string>

namespace homog {

// Study setup read from plain key = value text ('#' starts a comment). All
// violations are collected and reported in a single error.
struct StudyConfig {
  int dim = 1;
  int n = 1;
  double L = 1.0;
  int p = 0;   // grid points per fast period; 0 = dimension minimum
  int Mc = 0;  // cell points per dimension; 0 = dimension default
  bool mu_auto = true;
  cd mu = cd(-1.0, 0.0);
  double tol = 1e-10;
  std::vector<int> k_list{3, 4, 5};
  std::string field = "separable";
  double cx0 = 2.0, cx1 = 0.5;             // separable: slow factor cx0 + cx1 sin(2 pi x / L)
  double ay0 = 2.0, ay1 = 1.0, ayi = 0.0;  // separable: fast factor ay0 + ay1 sin + i ayi cos
  double const_re = 2.0, const_im = 0.5;   // constant: scalar value
  int K_terms = 12;                        // counterexample: series truncation
  std::string rhs = "smooth";
  bool with_err2 = true;
};

StudyConfig parse_config(const std::string& text);
StudyConfig load_config(const std::string& path);
std::string render_config(const StudyConfig& c);  // parse(render(c)) reproduces c

CoefficientField make_field(const StudyConfig& c);
StudyParams study_params(const StudyConfig& c);

}  // namespace homog
