#pragma once

#include <functional>
#include <vector>

#include "otm/geometry.hpp"

namespace otm {
namespace oracles {

/// Dense symmetric system assembled from the same mass-matrix entries as the
/// sparse production solves; row-major storage.
struct DenseSystem {
  int n = 0;
  std::vector<double> matrix;  // n*n, row-major
  std::vector<double> rhs;     // n

  double& at(int r, int c) { return matrix[r * n + c]; }
  double at(int r, int c) const { return matrix[r * n + c]; }
  double symmetry_gap() const;
};

/// Direct factorization solve (partial-pivot LU). Throws std::domain_error
/// on a numerically singular matrix.
std::vector<double> dense_solve(const DenseSystem& system);

/// Central finite differences of an energy functional, coordinate by
/// coordinate. Throws std::domain_error if the functional is not finite in
/// the step neighborhood.
std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& functional,
    const std::vector<double>& point, double step);

/// Closed-form squared transport cost of rigidly translating a density of
/// the given total mass by `offset`.
inline double translation_distance(double mass, Vec2 offset) {
  return mass * offset.norm_sq();
}

/// Exhaustive active-set solve of  min 1/2 v'Hv + b'v  s.t. v >= 0  for a
/// convex tridiagonal-or-dense H with n <= 4. H row-major.
std::vector<double> brute_force_qp(int n, const std::vector<double>& hessian,
                                   const std::vector<double>& linear);

}  // namespace oracles
}  // namespace otm
