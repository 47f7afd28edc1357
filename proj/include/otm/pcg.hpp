#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace otm {

struct PcgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

class PcgError : public std::runtime_error {
 public:
  PcgError(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

/// Preconditioned conjugate gradients for SPD operators. `apply` computes
/// y = A x; `inv_diag` is the Jacobi preconditioner. x holds the initial
/// guess and the solution. CG started from the current iterate decreases the
/// quadratic 1/2 x'Ax - b'x monotonically, which the outer descent loops
/// rely on.
inline PcgResult pcg_solve(
    const std::function<void(std::span<const double>, std::span<double>)>& apply,
    std::span<const double> inv_diag, std::span<const double> b,
    std::span<double> x, double rel_tol, int max_iters) {
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), ap(n);

  apply(x, std::span<double>(ap));
  double b_norm_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - ap[i];
    b_norm_sq += b[i] * b[i];
  }
  const double b_norm = std::sqrt(b_norm_sq);
  const double stop = rel_tol * (b_norm > 0.0 ? b_norm : 1.0);

  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = inv_diag[i] * r[i];
    rz += r[i] * z[i];
  }
  p = z;

  PcgResult result;
  double r_norm = 0.0;
  for (double ri : r) r_norm += ri * ri;
  r_norm = std::sqrt(r_norm);
  result.relative_residual = b_norm > 0.0 ? r_norm / b_norm : r_norm;
  if (r_norm <= stop) {
    result.converged = true;
    return result;
  }

  for (int it = 0; it < max_iters; ++it) {
    apply(p, std::span<double>(ap));
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (pap <= 0.0)
      throw PcgError("pcg: operator not positive definite", result.relative_residual);
    const double alpha = rz / pap;
    r_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      r_norm += r[i] * r[i];
    }
    r_norm = std::sqrt(r_norm);
    result.iterations = it + 1;
    result.relative_residual = b_norm > 0.0 ? r_norm / b_norm : r_norm;
    if (r_norm <= stop) {
      result.converged = true;
      return result;
    }
    double rz_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = inv_diag[i] * r[i];
      rz_next += r[i] * z[i];
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return result;
}

}  // namespace otm
