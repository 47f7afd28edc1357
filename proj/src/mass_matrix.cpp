#include "otm/mass_matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace otm {

QuadWeights unit_weights(const Grid& grid) {
  return QuadWeights(grid.cell_count() * QuadratureRule::kPoints, 1.0);
}

QuadWeights jacobian_det_weights(const Deformation& phi, int power) {
  const CellQuadrature quad(phi.grid());
  QuadWeights w(quad.cell_count() * QuadratureRule::kPoints);
  for (int cell = 0; cell < quad.cell_count(); ++cell)
    for (int q = 0; q < QuadratureRule::kPoints; ++q) {
      const double det = phi.jacobian(quad.world_point(cell, q)).det();
      w[cell * QuadratureRule::kPoints + q] = power == 1 ? det : det * det;
    }
  return w;
}

QuadWeights displacement_sq_weights(const Deformation& phi) {
  const CellQuadrature quad(phi.grid());
  QuadWeights w(quad.cell_count() * QuadratureRule::kPoints);
  for (int cell = 0; cell < quad.cell_count(); ++cell)
    for (int q = 0; q < QuadratureRule::kPoints; ++q)
      w[cell * QuadratureRule::kPoints + q] =
          phi.eval_displacement(quad.world_point(cell, q)).norm_sq();
  return w;
}

namespace {

BasisSample deformed_basis(const Grid& grid, const Deformation* phi, Vec2 x,
                           const BasisSample& undeformed) {
  if (phi == nullptr) return undeformed;
  const BasisSample s = sample_basis(grid, phi->eval_position(x));
  if (!s.inside)
    throw OutOfDomainError("mass assembly: deformed point left the domain");
  return s;
}

}  // namespace

SparseMatrix assemble_mass_matrix(const Grid& grid, const QuadWeights& weights,
                                  const Deformation* phi,
                                  const Deformation* psi) {
  const CellQuadrature quad(grid);
  if (static_cast<int>(weights.size()) !=
      quad.cell_count() * QuadratureRule::kPoints)
    throw std::invalid_argument("assemble_mass_matrix: weight count mismatch");
  if ((phi && phi->grid() != grid) || (psi && psi->grid() != grid))
    throw std::invalid_argument("assemble_mass_matrix: grid mismatch");

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(weights.size()) * 16);

  for (int cell = 0; cell < quad.cell_count(); ++cell) {
    const auto nodes = quad.cell_nodes(cell);
    for (int q = 0; q < QuadratureRule::kPoints; ++q) {
      const double omega = weights[cell * QuadratureRule::kPoints + q];
      if (!std::isfinite(omega))
        throw std::invalid_argument("assemble_mass_matrix: non-finite weight");
      if (omega == 0.0) continue;
      const double w = quad.world_weight(q) * omega;
      const Vec2 x = quad.world_point(cell, q);

      BasisSample base;
      base.nodes = nodes;
      base.value = quad.rule.shape[q];
      const BasisSample si = deformed_basis(grid, phi, x, base);
      const BasisSample sj =
          psi == phi ? si : deformed_basis(grid, psi, x, base);

      for (int a = 0; a < 4; ++a) {
        const double va = w * si.value[a];
        if (va == 0.0) continue;
        const int ia = grid.dof_of_node(si.nodes[a]);
        for (int b = 0; b < 4; ++b) {
          if (sj.value[b] == 0.0) continue;
          triplets.push_back({ia, grid.dof_of_node(sj.nodes[b]),
                              va * sj.value[b]});
        }
      }
    }
  }
  return SparseMatrix::from_triplets(grid.dof_count(), std::move(triplets));
}

std::vector<double> lumped_weight_vector(const Grid& grid,
                                         const QuadWeights& weights) {
  const CellQuadrature quad(grid);
  if (static_cast<int>(weights.size()) !=
      quad.cell_count() * QuadratureRule::kPoints)
    throw std::invalid_argument("lumped_weight_vector: weight count mismatch");
  std::vector<double> t(grid.dof_count(), 0.0);
  for (int cell = 0; cell < quad.cell_count(); ++cell) {
    const auto nodes = quad.cell_nodes(cell);
    for (int q = 0; q < QuadratureRule::kPoints; ++q) {
      const double w = quad.world_weight(q) *
                       weights[cell * QuadratureRule::kPoints + q];
      if (w == 0.0) continue;
      for (int a = 0; a < 4; ++a)
        t[grid.dof_of_node(nodes[a])] += w * quad.rule.shape[q][a];
    }
  }
  return t;
}

}  // namespace otm
