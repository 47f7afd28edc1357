#include "otm/dof.hpp"

namespace otm {

DeformationDofMap::DeformationDofMap(const Grid& grid) : grid_(grid) {
  const int n = grid.nodes_per_side();
  if (grid.periodic()) {
    free_nodes_.reserve((n - 1) * (n - 1));
    for (int iy = 0; iy < n - 1; ++iy)
      for (int ix = 0; ix < n - 1; ++ix)
        free_nodes_.push_back(grid.node_index(ix, iy));
  } else {
    free_nodes_.reserve((n - 2) * (n - 2));
    for (int iy = 1; iy < n - 1; ++iy)
      for (int ix = 1; ix < n - 1; ++ix)
        free_nodes_.push_back(grid.node_index(ix, iy));
  }
}

std::vector<double> DeformationDofMap::pack(const Deformation& phi) const {
  std::vector<double> x(dof_count());
  for (std::size_t i = 0; i < free_nodes_.size(); ++i) {
    x[2 * i] = phi.displacement()[free_nodes_[i]].x;
    x[2 * i + 1] = phi.displacement()[free_nodes_[i]].y;
  }
  return x;
}

void DeformationDofMap::unpack(const std::vector<double>& x,
                               Deformation& phi) const {
  for (std::size_t i = 0; i < free_nodes_.size(); ++i)
    phi.displacement()[free_nodes_[i]] = {x[2 * i], x[2 * i + 1]};
  if (grid_.periodic()) phi.sync_periodic();
}

std::vector<double> DeformationDofMap::gather_gradient(
    const std::vector<Vec2>& nodal) const {
  std::vector<double> g(dof_count(), 0.0);
  if (grid_.periodic()) {
    // Sum contributions from identified storage nodes; dof_of_node agrees
    // with the row-major order of free_nodes_.
    for (int node = 0; node < grid_.node_count(); ++node) {
      const int dof = grid_.dof_of_node(node);
      g[2 * dof] += nodal[node].x;
      g[2 * dof + 1] += nodal[node].y;
    }
  } else {
    for (std::size_t i = 0; i < free_nodes_.size(); ++i) {
      g[2 * i] = nodal[free_nodes_[i]].x;
      g[2 * i + 1] = nodal[free_nodes_[i]].y;
    }
  }
  return g;
}

std::vector<double> ImageDofMap::pack(const ImageField& u) const {
  std::vector<double> x(dof_count());
  for (int dof = 0; dof < dof_count(); ++dof)
    x[dof] = u[grid_.node_of_dof(dof)];
  return x;
}

void ImageDofMap::unpack(const std::vector<double>& x, ImageField& u) const {
  for (int dof = 0; dof < dof_count(); ++dof)
    u[grid_.node_of_dof(dof)] = x[dof];
  if (grid_.periodic()) u.sync_periodic();
}

}  // namespace otm
