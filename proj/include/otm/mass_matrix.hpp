#pragma once

#include <vector>

#include "otm/field.hpp"
#include "otm/quadrature.hpp"
#include "otm/sparse.hpp"

namespace otm {

/// Weight samples omega(x_q^l), one per (cell, quadrature point), cell-major.
using QuadWeights = std::vector<double>;

QuadWeights unit_weights(const Grid& grid);
/// det(D phi)^power sampled at quadrature points.
QuadWeights jacobian_det_weights(const Deformation& phi, int power);
/// |phi - id|^2 sampled at quadrature points.
QuadWeights displacement_sq_weights(const Deformation& phi);

/// Weighted mass matrix M[omega, Phi, Psi]_ij =
///   sum_l sum_q w_q^l omega(x_q^l) (xi_i . Phi)(x_q^l) (xi_j . Psi)(x_q^l),
/// indexed over unique DOFs. Null deformation pointers mean the identity.
SparseMatrix assemble_mass_matrix(const Grid& grid, const QuadWeights& weights,
                                  const Deformation* phi,
                                  const Deformation* psi);

inline SparseMatrix assemble_mass_matrix(const QuadWeights& weights,
                                         const Deformation& phi,
                                         const Deformation& psi) {
  return assemble_mass_matrix(phi.grid(), weights, &phi, &psi);
}

/// M[omega, id, id] * ones, computed directly: t[j] = sum_q w_q omega xi_j(x_q).
std::vector<double> lumped_weight_vector(const Grid& grid,
                                         const QuadWeights& weights);

}  // namespace otm
