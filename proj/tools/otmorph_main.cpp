// Command-line front end: geodesics, barycenters, the Benamou-Brenier
// cross-check, the time-discretization consistency table, and the oracle
// self-checks.

#include <CLI11.hpp>

#include <iostream>

#include "otm/runs.hpp"

namespace {

void add_common_options(CLI::App* cmd, otm::RunConfig& cfg,
                        std::string& config_path, std::string& boundary) {
  cmd->add_option("--config", config_path, "JSON config file");
  cmd->add_option("--delta", cfg.delta, "density-modulation penalty 1/delta");
  cmd->add_option("--gamma", cfg.gamma, "viscous dissipation weight");
  cmd->add_option("--lambda", cfg.lambda_elastic, "elastic lambda");
  cmd->add_option("--mu", cfg.mu_elastic, "elastic mu");
  cmd->add_option("--k", cfg.k_schedule,
                  "time steps K (list = cascadic schedule)")
      ->delimiter(',');
  cmd->add_option("--levels", cfg.level_schedule,
                  "grid levels (list = cascadic schedule)")
      ->delimiter(',');
  cmd->add_option("--grid-level", cfg.grid_level,
                  "grid level when no input image fixes it");
  cmd->add_option("--sweeps", cfg.sweeps, "outer sweeps per stage");
  cmd->add_option("--boundary", boundary, "dirichlet|periodic");
  cmd->add_option("--threads", cfg.threads, "deformation solver threads");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_flag("--overwrite", cfg.overwrite, "replace the output directory");
  cmd->add_flag("--rescale-output", cfg.rescale_output,
                "write images rescaled to [min,max] instead of clamped");
  cmd->add_option("--ncg-grad-tol", cfg.ncg_grad_tol, "");
  cmd->add_option("--ncg-max-iters", cfg.ncg_max_iters, "");
  cmd->add_option("--pcg-rel-tol", cfg.pcg_rel_tol, "");
  cmd->add_option("--pcg-max-iters", cfg.pcg_max_iters, "");
  cmd->add_option("--stall-tol", cfg.outer_stall_tol, "");
}

void finish_config(otm::RunConfig& cfg, const std::string& boundary,
                   const std::vector<std::string>& inputs, int resample_level) {
  if (!inputs.empty()) cfg.inputs = inputs;
  if (boundary == "dirichlet")
    cfg.boundary = otm::Boundary::DirichletIdentity;
  else if (boundary == "periodic")
    cfg.boundary = otm::Boundary::Periodic;
  else if (!boundary.empty())
    throw std::runtime_error("boundary must be dirichlet|periodic");
  if (resample_level >= 0) {
    cfg.resample = true;
    if (cfg.level_schedule.empty()) cfg.grid_level = resample_level;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-discrete optimal transport of images with density "
               "modulation and viscous dissipation"};
  app.require_subcommand(1);

  otm::RunConfig cfg;
  std::string config_path, boundary;
  std::vector<std::string> inputs;
  int resample_level = -1;

  // Pre-scan for --config so file values act as defaults under CLI flags.
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") cfg = otm::load_config(argv[i + 1]);

  auto* geodesic = app.add_subcommand("geodesic", "discrete geodesic between two images");
  geodesic->add_option("inputs", inputs, "u_A u_B image files")->expected(0, 2);
  geodesic->add_flag("--emit-source", cfg.emit_source,
                     "write per-step source images z_k");
  geodesic->add_flag("--qp-check", cfg.qp_check,
                     "nonnegativity QP diagnostic along transport paths");
  geodesic->add_option("--resample", resample_level,
                       "resample inputs to this grid level");
  add_common_options(geodesic, cfg, config_path, boundary);

  auto* barycenter = app.add_subcommand("barycenter", "weighted barycenter of M images");
  barycenter->add_option("inputs", inputs, "input image files")->expected(0, 16);
  barycenter->add_option("--weights", cfg.weights, "weights, sum 1")->delimiter(',');
  barycenter->add_flag("--triangle", cfg.triangle_sweep,
                       "sweep all weight triples in {0,1/3,2/3,1}");
  barycenter->add_option("--resample", resample_level, "resample level");
  add_common_options(barycenter, cfg, config_path, boundary);

  auto* bb = app.add_subcommand("bb", "Benamou-Brenier solver, non-viscous model");
  bb->add_option("inputs", inputs, "u_A u_B image files")->expected(0, 2);
  bb->add_option("--nt", cfg.nt, "time steps (tau = 1/nt)");
  bb->add_option("--r", cfg.r, "augmentation parameter");
  bb->add_option("--max-iters", cfg.max_iters, "ALG2 iteration budget");
  bb->add_option("--tol", cfg.bb_tol, "primal residual tolerance");
  bb->add_option("--resample", resample_level, "resample level");
  add_common_options(bb, cfg, config_path, boundary);

  auto* consistency = app.add_subcommand(
      "consistency", "time-discretization error table on an analytic path");
  consistency->add_option("--case", cfg.consistency_case, "bump|linear");
  add_common_options(consistency, cfg, config_path, boundary);

  auto* oracle = app.add_subcommand("oracle-check",
                                    "cross-check fast solvers against oracles");
  (void)oracle;

  CLI11_PARSE(app, argc, argv);

  try {
    finish_config(cfg, boundary, inputs, resample_level);
    if (geodesic->parsed()) return otm::run_geodesic(cfg);
    if (barycenter->parsed()) return otm::run_barycenter(cfg);
    if (bb->parsed()) return otm::run_bb(cfg);
    if (consistency->parsed()) return otm::run_consistency(cfg);
    if (oracle->parsed()) return otm::run_oracle_check(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
