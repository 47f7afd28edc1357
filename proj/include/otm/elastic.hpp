#pragma once

#include <limits>

#include "otm/geometry.hpp"

namespace otm {

struct ElasticParams {
  double lambda = 10.0;
  double mu = 1.0;
};

/// Determinants at or below this threshold are treated as nonpositive.
inline constexpr double kDetFloor = 1e-12;

/// Hyperelastic density
///   W(F) = mu/2 |F|_F^2 + lambda/4 (det F)^2
///          - (mu + lambda/2) log(det F) - mu - lambda/4
/// for det F > 0, +infinity otherwise. W(I) = 0, DW(I) = 0.
inline double hyperelastic_density(const Mat2& f, const ElasticParams& p) {
  const double det = f.det();
  if (det <= kDetFloor) return std::numeric_limits<double>::infinity();
  return 0.5 * p.mu * f.frobenius_sq() + 0.25 * p.lambda * det * det -
         (p.mu + 0.5 * p.lambda) * std::log(det) - p.mu - 0.25 * p.lambda;
}

/// dW/dF = mu F + (lambda/2 det F - (mu + lambda/2)/det F) cof F.
/// Caller must ensure det F > kDetFloor.
inline Mat2 hyperelastic_derivative(const Mat2& f, const ElasticParams& p) {
  const double det = f.det();
  const double s = 0.5 * p.lambda * det - (p.mu + 0.5 * p.lambda) / det;
  return p.mu * f + s * f.cofactor();
}

}  // namespace otm
