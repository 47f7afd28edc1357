#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "otm/geometry.hpp"

namespace otm {

enum class Boundary { DirichletIdentity, Periodic };

/// Regular quadrilateral grid on [0,1]^2 with 2^level + 1 nodes per side.
///
/// Storage indexing keeps a full (2^level+1)^2 nodal array for both boundary
/// types; on Periodic grids the last row/column are copies of the first and
/// solver degrees of freedom range over the (2^level)^2 unique nodes.
class Grid {
 public:
  Grid(int level, Boundary boundary)
      : level_(level), boundary_(boundary) {
    if (level < 0 || level > 14)
      throw std::invalid_argument("Grid: level out of range");
    n_ = (1 << level) + 1;
    h_ = 1.0 / static_cast<double>(n_ - 1);
  }

  int level() const { return level_; }
  Boundary boundary() const { return boundary_; }
  bool periodic() const { return boundary_ == Boundary::Periodic; }

  int nodes_per_side() const { return n_; }
  int cells_per_side() const { return n_ - 1; }
  double cell_width() const { return h_; }

  int node_count() const { return n_ * n_; }
  int cell_count() const { return (n_ - 1) * (n_ - 1); }

  int node_index(int ix, int iy) const { return iy * n_ + ix; }
  Vec2 node_position(int node) const {
    return {h_ * (node % n_), h_ * (node / n_)};
  }

  bool is_boundary_node(int node) const {
    const int ix = node % n_, iy = node / n_;
    return ix == 0 || iy == 0 || ix == n_ - 1 || iy == n_ - 1;
  }

  /// Unique solver DOFs: all nodes (Dirichlet storage) or the torus nodes.
  int dof_count() const {
    return periodic() ? (n_ - 1) * (n_ - 1) : n_ * n_;
  }

  /// Map a storage node to its unique DOF (periodic identification).
  int dof_of_node(int node) const {
    if (!periodic()) return node;
    const int m = n_ - 1;
    const int ix = (node % n_) % m;
    const int iy = (node / n_) % m;
    return iy * m + ix;
  }

  /// One representative storage node per DOF.
  int node_of_dof(int dof) const {
    if (!periodic()) return dof;
    const int m = n_ - 1;
    return (dof / m) * n_ + (dof % m);
  }

  bool operator==(const Grid& o) const {
    return level_ == o.level_ && boundary_ == o.boundary_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  int level_;
  Boundary boundary_;
  int n_;
  double h_;
};

/// Thrown when a DirichletIdentity evaluation point leaves [0,1]^2 by more
/// than the clamping tolerance.
class OutOfDomainError : public std::runtime_error {
 public:
  explicit OutOfDomainError(const char* what) : std::runtime_error(what) {}
};

}  // namespace otm
