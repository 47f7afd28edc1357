#include "otm/ncg.hpp"

#include <cmath>

namespace otm {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

NcgResult ncg_minimize(const EnergyFn& energy, const GradientFn& gradient,
                       std::vector<double>& x, const NcgOptions& opt) {
  NcgResult result;
  const std::size_t n = x.size();
  if (n == 0) {
    result.converged = true;
    return result;
  }

  double e = energy(x);
  std::vector<double> g = gradient(x);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
  double g_dot_g = dot(g, g);
  double step = 1.0;
  std::vector<double> trial(n);

  for (int it = 0; it < opt.max_iters; ++it) {
    result.grad_norm = std::sqrt(g_dot_g);
    if (result.grad_norm < opt.grad_tol) {
      result.converged = true;
      break;
    }

    double slope = dot(g, d);
    if (slope >= 0.0) {  // not a descent direction: restart with steepest
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -g_dot_g;
    }

    // Armijo backtracking; infinite trial energies simply fail the test.
    double t = step;
    bool accepted = false;
    double e_accepted = e;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + t * d[i];
      const double e_trial = energy(trial);
      if (std::isfinite(e_trial) && e_trial <= e + opt.armijo_c1 * t * slope) {
        accepted = true;
        e_accepted = e_trial;
        break;
      }
      t *= opt.backtrack_factor;
    }
    if (!accepted) {
      result.stalled = true;
      break;
    }

    x.swap(trial);
    e = e_accepted;
    std::vector<double> g_new = gradient(x);

    // PR+ coefficient with automatic restart.
    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i) num += g_new[i] * (g_new[i] - g[i]);
    double beta = g_dot_g > 0.0 ? num / g_dot_g : 0.0;
    if (beta < 0.0) beta = 0.0;

    g.swap(g_new);
    g_dot_g = dot(g, g);
    for (std::size_t i = 0; i < n; ++i) d[i] = beta * d[i] - g[i];

    step = std::min(1.0, t / opt.backtrack_factor);
    result.iterations = it + 1;
  }

  result.energy = e;
  result.grad_norm = std::sqrt(g_dot_g);
  if (result.grad_norm < opt.grad_tol) result.converged = true;
  return result;
}

}  // namespace otm
