#pragma once

#include <vector>

#include "otm/field.hpp"

namespace otm {

/// Free displacement unknowns of a deformation: interior nodes on
/// DirichletIdentity grids, unique (torus) nodes on Periodic grids.
/// Flat layout: (x_0, y_0, x_1, y_1, ...).
class DeformationDofMap {
 public:
  explicit DeformationDofMap(const Grid& grid);

  const Grid& grid() const { return grid_; }
  int dof_count() const { return static_cast<int>(free_nodes_.size()) * 2; }
  const std::vector<int>& free_nodes() const { return free_nodes_; }

  std::vector<double> pack(const Deformation& phi) const;
  /// Writes free DOFs into phi and restores boundary identification/zeros.
  void unpack(const std::vector<double>& x, Deformation& phi) const;
  /// Accumulate a full nodal gradient into the free-DOF layout
  /// (periodic duplicates are summed into their representative).
  std::vector<double> gather_gradient(const std::vector<Vec2>& nodal) const;

 private:
  Grid grid_;
  std::vector<int> free_nodes_;
};

/// Image unknowns: all stored nodes (Dirichlet) or unique nodes (Periodic).
class ImageDofMap {
 public:
  explicit ImageDofMap(const Grid& grid) : grid_(grid) {}

  const Grid& grid() const { return grid_; }
  int dof_count() const { return grid_.dof_count(); }

  std::vector<double> pack(const ImageField& u) const;
  void unpack(const std::vector<double>& x, ImageField& u) const;

 private:
  Grid grid_;
};

}  // namespace otm
