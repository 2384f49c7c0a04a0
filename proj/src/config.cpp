#include "homog/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace homog {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& v, double& out) {
  try {
    size_t used = 0;
    out = std::stod(v, &used);
    return used == v.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

bool parse_int(const std::string& v, int& out) {
  try {
    size_t used = 0;
    out = std::stoi(v, &used);
    return used == v.size();
  } catch (...) {
    return false;
  }
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "1" || v == "true" || v == "yes") {
    out = true;
    return true;
  }
  if (v == "0" || v == "false" || v == "no") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

StudyConfig parse_config(const std::string& text) {
  StudyConfig c;
  std::vector<std::string> errs;
  auto bad = [&errs](const std::string& key, const std::string& val, const std::string& why) {
    errs.push_back(key + " = '" + val + "' (" + why + ")");
  };
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back("line " + std::to_string(lineno) + " has no '='");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "dim") {
      if (!parse_int(val, c.dim) || (c.dim != 1 && c.dim != 2)) bad(key, val, "must be 1 or 2");
    } else if (key == "n") {
      if (!parse_int(val, c.n) || c.n < 1) bad(key, val, "must be a positive integer");
    } else if (key == "L") {
      if (!parse_double(val, c.L) || !(c.L > 0)) bad(key, val, "must be positive");
    } else if (key == "p") {
      if (!parse_int(val, c.p) || c.p < 0 || (c.p > 0 && c.p % 2 != 0))
        bad(key, val, "must be 0 or a positive even integer");
    } else if (key == "Mc") {
      if (!parse_int(val, c.Mc) || c.Mc < 0 || (c.Mc > 0 && c.Mc % 2 != 0))
        bad(key, val, "must be 0 or a positive even integer");
    } else if (key == "mu") {
      if (val == "auto")
        c.mu_auto = true;
      else
        bad(key, val, "only 'auto' is accepted here; use mu_re / mu_im for explicit values");
    } else if (key == "mu_re") {
      double x;
      if (!parse_double(val, x)) {
        bad(key, val, "not a number");
      } else {
        c.mu = cd(x, c.mu.imag());
        c.mu_auto = false;
      }
    } else if (key == "mu_im") {
      double x;
      if (!parse_double(val, x)) {
        bad(key, val, "not a number");
      } else {
        c.mu = cd(c.mu.real(), x);
        c.mu_auto = false;
      }
    } else if (key == "tol") {
      if (!parse_double(val, c.tol) || !(c.tol > 0) || c.tol > 1e-2)
        bad(key, val, "must be in (0, 1e-2]");
    } else if (key == "k") {
      std::istringstream ks(val);
      std::vector<int> list;
      int kv;
      bool ok = true;
      while (ks >> kv) {
        if (kv < 0 || kv > 20) ok = false;
        list.push_back(kv);
      }
      if (!ks.eof() || list.empty() || !ok)
        bad(key, val, "expected integers in [0, 20]");
      else
        c.k_list = list;
    } else if (key == "field") {
      if (val != "separable" && val != "laminate" && val != "constant" &&
          val != "counterexample")
        bad(key, val, "expected separable|laminate|constant|counterexample");
      else
        c.field = val;
    } else if (key == "cx0") {
      if (!parse_double(val, c.cx0)) bad(key, val, "not a number");
    } else if (key == "cx1") {
      if (!parse_double(val, c.cx1)) bad(key, val, "not a number");
    } else if (key == "ay0") {
      if (!parse_double(val, c.ay0)) bad(key, val, "not a number");
    } else if (key == "ay1") {
      if (!parse_double(val, c.ay1)) bad(key, val, "not a number");
    } else if (key == "ayi") {
      if (!parse_double(val, c.ayi)) bad(key, val, "not a number");
    } else if (key == "const_re") {
      if (!parse_double(val, c.const_re)) bad(key, val, "not a number");
    } else if (key == "const_im") {
      if (!parse_double(val, c.const_im)) bad(key, val, "not a number");
    } else if (key == "K_terms") {
      if (!parse_int(val, c.K_terms) || c.K_terms < 1 || c.K_terms > 40)
        bad(key, val, "must be in [1, 40]");
    } else if (key == "rhs") {
      if (val != "smooth" && val != "mode") bad(key, val, "expected smooth|mode");
      else c.rhs = val;
    } else if (key == "err2") {
      if (!parse_bool(val, c.with_err2)) bad(key, val, "expected 0/1");
    } else {
      errs.push_back("unknown key '" + key + "' on line " + std::to_string(lineno));
    }
  }
  // cross-field checks
  if (c.field == "separable" && c.dim != 1)
    errs.push_back("field separable requires dim = 1 (dim = " + std::to_string(c.dim) + ")");
  if (c.field == "counterexample" && c.dim != 1)
    errs.push_back("field counterexample requires dim = 1");
  if (c.field == "counterexample" && std::abs(c.L - 4.0) > 1e-12)
    errs.push_back("field counterexample requires L = 4 (L = " + format_g17(c.L) + ")");
  if (c.field == "laminate" && c.dim != 2)
    errs.push_back("field laminate requires dim = 2 (dim = " + std::to_string(c.dim) + ")");
  if ((c.field == "separable" || c.field == "laminate" || c.field == "counterexample") && c.n != 1)
    errs.push_back("field " + c.field + " is scalar; n must be 1");
  if (c.field == "separable" && !(c.cx0 - std::abs(c.cx1) > 0))
    errs.push_back("separable slow factor not positive: need cx0 > |cx1|");
  if (c.field == "separable" && !(c.ay0 - std::abs(c.ay1) > 0))
    errs.push_back("separable fast factor not coercive: need ay0 > |ay1|");
  if (c.field == "constant" && !(c.const_re > 0))
    errs.push_back("constant field needs positive real part, const_re = " +
                   format_g17(c.const_re));
  if (!errs.empty()) {
    std::string msg = "config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  return c;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const StudyConfig& c) {
  std::string out;
  out += "dim = " + std::to_string(c.dim) + "\n";
  out += "n = " + std::to_string(c.n) + "\n";
  out += "L = " + format_g17(c.L) + "\n";
  out += "p = " + std::to_string(c.p) + "\n";
  out += "Mc = " + std::to_string(c.Mc) + "\n";
  if (c.mu_auto) {
    out += "mu = auto\n";
  } else {
    out += "mu_re = " + format_g17(c.mu.real()) + "\n";
    out += "mu_im = " + format_g17(c.mu.imag()) + "\n";
  }
  out += "tol = " + format_g17(c.tol) + "\n";
  out += "k =";
  for (int k : c.k_list) out += " " + std::to_string(k);
  out += "\n";
  out += "field = " + c.field + "\n";
  if (c.field == "separable") {
    out += "cx0 = " + format_g17(c.cx0) + "\n";
    out += "cx1 = " + format_g17(c.cx1) + "\n";
    out += "ay0 = " + format_g17(c.ay0) + "\n";
    out += "ay1 = " + format_g17(c.ay1) + "\n";
    out += "ayi = " + format_g17(c.ayi) + "\n";
  } else if (c.field == "constant") {
    out += "const_re = " + format_g17(c.const_re) + "\n";
    out += "const_im = " + format_g17(c.const_im) + "\n";
  } else if (c.field == "counterexample") {
    out += "K_terms = " + std::to_string(c.K_terms) + "\n";
  }
  out += "rhs = " + c.rhs + "\n";
  out += "err2 = " + std::string(c.with_err2 ? "1" : "0") + "\n";
  return out;
}

CoefficientField make_field(const StudyConfig& c) {
  if (c.field == "separable") return field_separable_1d(c.L, c.cx0, c.cx1, c.ay0, c.ay1, c.ayi);
  if (c.field == "laminate") return field_laminate_2d(c.L);
  if (c.field == "constant") return field_constant_scalar(c.dim, c.n, cd(c.const_re, c.const_im));
  if (c.field == "counterexample") return field_counterexample(c.K_terms, c.L);
  throw std::runtime_error("config: unknown field '" + c.field + "'");
}

StudyParams study_params(const StudyConfig& c) {
  StudyParams sp;
  sp.p = c.p;
  sp.cell_points = c.Mc;
  sp.mu = c.mu;
  sp.mu_auto = c.mu_auto;
  sp.tol = c.tol;
  sp.k_list = c.k_list;
  sp.rhs = c.rhs;
  sp.with_err2 = c.with_err2;
  return sp;
}

}  // namespace homog
