#pragma once

#include <functional>
#include <vector>

namespace otm {

/// Polak-Ribiere+ nonlinear conjugate gradients with Armijo backtracking.
/// Energy may return +infinity for inadmissible trial points; such trials
/// are rejected inside the line search.
struct NcgOptions {
  double grad_tol = 1e-6;
  int max_iters = 50;
  double armijo_c1 = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 40;
};

struct NcgResult {
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;   // gradient tolerance reached
  bool stalled = false;     // line search exhausted its backtracks
};

using EnergyFn = std::function<double(const std::vector<double>&)>;
using GradientFn = std::function<std::vector<double>(const std::vector<double>&)>;

NcgResult ncg_minimize(const EnergyFn& energy, const GradientFn& gradient,
                       std::vector<double>& x, const NcgOptions& options);

}  // namespace otm
