#pragma once

#include <array>
#include <vector>

#include "otm/grid.hpp"

namespace otm {

inline constexpr double kDomainClampTol = 1e-12;

/// Locate result for a point: containing cell nodes and bilinear weights.
struct BasisSample {
  std::array<int, 4> nodes;    // storage node indices: (0,0),(1,0),(0,1),(1,1)
  std::array<double, 4> value; // bilinear shape values at the point
  bool inside = true;          // false: Dirichlet point beyond the clamp tol
};

namespace detail {

/// Wrap/clamp a coordinate and return cell index plus local coordinate.
/// On Dirichlet grids, excursions beyond kDomainClampTol set `inside=false`.
inline void locate_1d(double p, int cells, double h, bool periodic,
                      int& cell, double& local, bool& inside) {
  if (periodic) {
    p -= std::floor(p);            // wrap into [0,1)
    if (p >= 1.0) p = 0.0;         // guard against round-up
  } else {
    if (p < 0.0) {
      if (p < -kDomainClampTol) inside = false;
      p = 0.0;
    } else if (p > 1.0) {
      if (p > 1.0 + kDomainClampTol) inside = false;
      p = 1.0;
    }
  }
  const double s = p / h;
  cell = static_cast<int>(s);
  if (cell >= cells) cell = cells - 1;
  local = s - cell;
}

}  // namespace detail

/// Bilinear basis sample at an arbitrary point (non-throwing).
inline BasisSample sample_basis(const Grid& grid, Vec2 p) {
  BasisSample out;
  int cx, cy;
  double sx, sy;
  detail::locate_1d(p.x, grid.cells_per_side(), grid.cell_width(),
                    grid.periodic(), cx, sx, out.inside);
  detail::locate_1d(p.y, grid.cells_per_side(), grid.cell_width(),
                    grid.periodic(), cy, sy, out.inside);
  out.nodes = {grid.node_index(cx, cy), grid.node_index(cx + 1, cy),
               grid.node_index(cx, cy + 1), grid.node_index(cx + 1, cy + 1)};
  out.value = {(1 - sx) * (1 - sy), sx * (1 - sy), (1 - sx) * sy, sx * sy};
  return out;
}

/// Piecewise-bilinear intensity map given by nodal values.
class ImageField {
 public:
  explicit ImageField(const Grid& grid, double fill = 0.0)
      : grid_(grid), values_(grid.node_count(), fill) {}
  ImageField(const Grid& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid.node_count())
      throw std::invalid_argument("ImageField: nodal value count mismatch");
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](int node) const { return values_[node]; }
  double& operator[](int node) { return values_[node]; }

  double eval(Vec2 p) const;
  Vec2 eval_gradient(Vec2 p) const;

  /// Copy identified boundary values from the unique representatives.
  void sync_periodic();

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Deformation phi: D -> D stored as nodal displacement phi - id.
class Deformation {
 public:
  explicit Deformation(const Grid& grid)
      : grid_(grid), displacement_(grid.node_count()) {}

  const Grid& grid() const { return grid_; }
  const std::vector<Vec2>& displacement() const { return displacement_; }
  std::vector<Vec2>& displacement() { return displacement_; }

  bool is_identity() const;

  /// Displacement value at an arbitrary point.
  Vec2 eval_displacement(Vec2 p) const;
  /// Deformed position phi(p) = p + displacement(p).
  Vec2 eval_position(Vec2 p) const { return p + eval_displacement(p); }
  /// Jacobian D(phi) = I + D(displacement) at p.
  Mat2 jacobian(Vec2 p) const;

  void sync_periodic();

 private:
  Grid grid_;
  std::vector<Vec2> displacement_;
};

inline double jacobian_det(const Deformation& phi, Vec2 p) {
  return phi.jacobian(p).det();
}

/// Bilinear prolongation to the next finer (nested) grid level.
ImageField prolongate(const ImageField& field, const Grid& target);
Deformation prolongate(const Deformation& field, const Grid& target);

/// Nodal subsampling to a coarser nested grid level.
ImageField restrict_to(const ImageField& field, const Grid& target);

}  // namespace otm
