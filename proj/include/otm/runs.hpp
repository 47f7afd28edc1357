#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "otm/consistency.hpp"
#include "otm/field.hpp"
#include "otm/model.hpp"
#include "otm/path.hpp"

namespace otm {

/// Parameters of one CLI invocation; config-file keys mirror these fields
/// one-to-one and command-line flags override them.
struct RunConfig {
  std::vector<std::string> inputs;
  std::filesystem::path out_dir = "out";
  bool overwrite = false;

  double delta = 0.1;
  double gamma = 0.01;
  double lambda_elastic = 10.0;
  double mu_elastic = 1.0;
  std::vector<int> k_schedule = {4};
  std::vector<int> level_schedule;
  int grid_level = 6;  // used when no input images fix the level
  int sweeps = 15;
  Boundary boundary = Boundary::DirichletIdentity;
  int threads = 1;
  bool resample = false;
  bool emit_source = false;
  bool rescale_output = false;
  bool qp_check = false;

  double ncg_grad_tol = 1e-6;
  int ncg_max_iters = 50;
  double pcg_rel_tol = 1e-10;
  int pcg_max_iters = 5000;
  double outer_stall_tol = 5e-5;

  // barycenter
  std::vector<double> weights;
  bool triangle_sweep = false;

  // bb
  int nt = 60;
  double r = 1.0;
  int max_iters = 2000;
  double bb_tol = 1e-6;

  // consistency
  std::string consistency_case = "bump";
};

/// Loads a JSON config file; unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);
void apply_config_json(const std::string& json_text, RunConfig& cfg);

int run_geodesic(const RunConfig& cfg);
int run_barycenter(const RunConfig& cfg);
int run_bb(const RunConfig& cfg);
int run_consistency(const RunConfig& cfg);
int run_oracle_check(const RunConfig& cfg);

/// The built-in smooth path used by the consistency subcommand and tests:
/// an accelerating periodic bump with amplitude modulation and a
/// divergence-free shear.
SmoothPath translating_bump_path();

/// Dense-oracle counterpart of solve_image_system (assembles the full block
/// matrix by probing and solves it directly).
std::vector<ImageField> dense_image_solve(const std::vector<Deformation>& phis,
                                          const ImageField& u_a,
                                          const ImageField& u_b,
                                          const ModelParams& params);

}  // namespace otm
