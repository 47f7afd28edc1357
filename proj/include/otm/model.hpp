#pragma once

#include <stdexcept>

#include "otm/elastic.hpp"
#include "otm/grid.hpp"

namespace otm {

struct SolverTolerances {
  double ncg_grad_tol = 1e-6;
  int ncg_max_iters = 50;
  double pcg_rel_tol = 1e-10;
  int pcg_max_iters = 5000;
  int outer_max_sweeps = 15;
  double outer_stall_tol = 5e-5;
};

struct ModelParams {
  double delta = 0.1;   // density-modulation penalty weight is 1/delta
  double gamma = 0.1;   // viscous dissipation weight
  ElasticParams elastic;
  int K = 4;            // time steps; tau = 1/K
  Boundary boundary = Boundary::DirichletIdentity;
  SolverTolerances tol;
  int threads = 1;
  bool nonnegative_images = false;  // opt-in pointwise QP image solve

  void validate() const {
    if (delta <= 0.0) throw std::invalid_argument("ModelParams: delta <= 0");
    if (gamma < 0.0) throw std::invalid_argument("ModelParams: gamma < 0");
    if (elastic.lambda <= 0.0 || elastic.mu <= 0.0)
      throw std::invalid_argument("ModelParams: elastic moduli must be > 0");
    if (K < 1) throw std::invalid_argument("ModelParams: K < 1");
    if (tol.ncg_grad_tol <= 0 || tol.pcg_rel_tol <= 0 ||
        tol.outer_stall_tol <= 0 || tol.ncg_max_iters <= 0 ||
        tol.pcg_max_iters <= 0 || tol.outer_max_sweeps <= 0)
      throw std::invalid_argument("ModelParams: tolerances must be positive");
    if (threads < 1) throw std::invalid_argument("ModelParams: threads < 1");
  }
};

}  // namespace otm
