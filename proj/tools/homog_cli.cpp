#include "homog/bench.hpp"
#include "homog/config.hpp"
#include "homog/runtime.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace homog;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << text;
  std::cout << "wrote " << path << "\n";
}

Grid study_grid(const StudyConfig& c, int k) {
  int p = c.p > 0 ? c.p : min_points_per_period(c.dim);
  return Grid{c.dim, c.L, p * (1 << k)};
}

cd resolved_mu(const StudyConfig& c, const CoefficientField& f) {
  return c.mu_auto ? default_mu(f) : c.mu;
}

int run_cell(const StudyConfig& c, const std::string& out, Index node) {
  CoefficientField f = make_field(c);
  Grid macro = study_grid(c, c.k_list.front());
  Grid cell = make_cell_grid(c.dim, c.Mc > 0 ? c.Mc : default_cell_points(c.dim));
  std::cout << "cell: table at Mc = " << cell.M << " (macro grid " << macro.M << ")\n";
  CellSolutionTable t = build_table(f, macro, cell, std::min(c.tol, 1e-12));
  if (node < 0 || node >= macro.nodes())
    throw std::runtime_error("cell: node index out of range [0, " +
                             std::to_string(macro.nodes()) + ")");
  export_cell_csv(t, node, out);
  std::cout << "wrote cell solutions under " << out << "\n";
  return 0;
}

int run_effective(const StudyConfig& c, const std::string& out) {
  CoefficientField f = make_field(c);
  Grid macro = study_grid(c, c.k_list.front());
  Grid cell = make_cell_grid(c.dim, c.Mc > 0 ? c.Mc : default_cell_points(c.dim));
  std::cout << "effective: assembling on grid " << macro.M << (c.dim == 2 ? "^2" : "") << "\n";
  CellSolutionTable t = build_table(f, macro, cell, std::min(c.tol, 1e-12));
  EffectiveField eff = assemble_effective(f, t);
  write_effective_csv(out, eff);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int run_solve(const StudyConfig& c, const std::string& out, int k) {
  CoefficientField f = make_field(c);
  if (k < 0) k = c.k_list.front();
  Grid macro = study_grid(c, k);
  double eps = c.L / double(1 << k);
  cd mu = resolved_mu(c, f);
  std::cout << "solve: eps = " << format_g17(eps) << ", grid " << macro.M
            << (c.dim == 2 ? "^2" : "") << ", mu = (" << format_g17(mu.real()) << ","
            << format_g17(mu.imag()) << ")\n";
  CorrectorBundle b = make_corrector_bundle(f, macro, mu, c.Mc, c.tol);
  FineSolver fine = make_fine_solver(f, macro, eps, mu, c.tol);
  GridFunction ff = rhs_profile(c.rhs, macro, c.n);
  SolveReport repf, repe;
  GridFunction ue = fine.solve(ff, &repf);
  GridFunction u0 = b.solver.solve(ff, &repe);
  std::cout << "solve: fine iterations " << repf.iterations << ", effective iterations "
            << repe.iterations << "\n";
  std::string csv = "node,re_u_eps,im_u_eps,re_u0,im_u0\n";
  for (Index i = 0; i < macro.nodes(); ++i)
    for (int a = 0; a < c.n; ++a)
      csv += std::to_string(i * c.n + a) + "," + format_g17(ue.at(i, a).real()) + "," +
             format_g17(ue.at(i, a).imag()) + "," + format_g17(u0.at(i, a).real()) + "," +
             format_g17(u0.at(i, a).imag()) + "\n";
  write_text(out, csv);
  return 0;
}

int run_study_cmd(const StudyConfig& c, const std::string& out) {
  CoefficientField f = make_field(c);
  ConvergenceReport rep = run_study(f, c.L, study_params(c), &std::cout);
  write_text(out, rep.csv());
  std::cout << "rates: err0 " << format_g17(rep.rate0) << ", err1 " << format_g17(rep.rate1)
            << ", err2 " << format_g17(rep.rate2) << "\n";
  return 0;
}

int run_counterexample(const StudyConfig& c, const std::string& out) {
  int p = c.p > 0 ? c.p : min_points_per_period(1);
  CounterexampleReport rep = counterexample_study(c.K_terms, c.k_list, p, c.tol, &std::cout);
  write_text(out, rep.csv());
  std::cout << "fitted slope of (M f, f) against k: " << format_g17(rep.slope) << "\n";
  return 0;
}

int run_identity(const StudyConfig& c, int trials, std::uint64_t seed) {
  CoefficientField f = make_field(c);
  int k = c.k_list.front();
  Grid macro = study_grid(c, k);
  double eps = c.L / double(1 << k);
  cd mu = resolved_mu(c, f);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    GridFunction ff(macro, c.n), gg(macro, c.n);
    ff.v = randn_cvec(macro.nodes() * c.n, seed + 2 * t);
    gg.v = randn_cvec(macro.nodes() * c.n, seed + 2 * t + 1);
    IdentityReport rep = identity_terms(f, macro, eps, mu, ff, gg, c.tol);
    std::cout << "identity trial " << t << ": residual = " << format_g17(rep.residual) << "\n";
    for (int j = 0; j < 5; ++j)
      std::cout << "  t" << (j + 1) << " = (" << format_g17(rep.terms[j].real()) << ","
                << format_g17(rep.terms[j].imag()) << ")\n";
    worst = std::max(worst, rep.residual);
  }
  std::cout << "identity: worst residual = " << format_g17(worst) << "\n";
  return worst <= 1e-6 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic homogenization toolkit: cell problems, effective tensors, two-scale "
               "correctors and resolvent convergence studies"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = -1;
  app.add_option("--config", config_path, "key = value study configuration file")->required();
  app.add_option("--threads", threads, "worker threads (0 = all cores; default HOMOG_THREADS)");

  std::string out_cell = "cell_out", out_eff = "effective.csv", out_solve = "solve.csv";
  std::string out_study = "study.csv", out_ce = "counterexample.csv";
  Index cell_node = 0;
  int solve_k = -1, id_trials = 3;
  std::uint64_t id_seed = 2026;

  CLI::App* c_cell = app.add_subcommand("cell", "solve cell problems, export one table entry");
  c_cell->add_option("--out", out_cell, "output directory");
  c_cell->add_option("--node", cell_node, "macro node index");
  CLI::App* c_eff = app.add_subcommand("effective", "assemble the effective tensor field");
  c_eff->add_option("--out", out_eff, "output CSV");
  CLI::App* c_solve = app.add_subcommand("solve", "fine and effective resolvent solves");
  c_solve->add_option("--out", out_solve, "output CSV");
  c_solve->add_option("--k", solve_k, "refinement exponent (default: first of k list)");
  CLI::App* c_study = app.add_subcommand("study", "resolvent convergence study over eps");
  c_study->add_option("--out", out_study, "output CSV");
  CLI::App* c_ce = app.add_subcommand("counterexample", "(M f, f) decay for the lacunary field");
  c_ce->add_option("--out", out_ce, "output CSV");
  CLI::App* c_id = app.add_subcommand("identity", "first-corrector pairing identity check");
  c_id->add_option("--trials", id_trials, "number of random pairs");
  c_id->add_option("--seed", id_seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  if (threads < 0) {
    const char* env = std::getenv("HOMOG_THREADS");
    if (env) threads = std::atoi(env);
  }
  if (threads >= 0) homog::runtime::set_threads(threads);

  try {
    homog::StudyConfig cfg = homog::load_config(config_path);
    if (c_cell->parsed()) return run_cell(cfg, out_cell, cell_node);
    if (c_eff->parsed()) return run_effective(cfg, out_eff);
    if (c_solve->parsed()) return run_solve(cfg, out_solve, solve_k);
    if (c_study->parsed()) return run_study_cmd(cfg, out_study);
    if (c_ce->parsed()) return run_counterexample(cfg, out_ce);
    if (c_id->parsed()) return run_identity(cfg, id_trials, id_seed);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
