#pragma once

#include <cmath>
#include <random>

#include "otm/field.hpp"

namespace otm {

/// Compactly supported smooth bump exp(1 - 1/(1 - |x-c|^2/r^2)) on |x-c| < r,
/// normalized to `amplitude` at the center.
inline ImageField bump_image(const Grid& grid, Vec2 center, double radius,
                             double amplitude = 1.0) {
  ImageField out(grid);
  for (int node = 0; node < grid.node_count(); ++node) {
    const Vec2 p = grid.node_position(node);
    double dx = p.x - center.x, dy = p.y - center.y;
    if (grid.periodic()) {
      dx -= std::round(dx);
      dy -= std::round(dy);
    }
    const double rr = (dx * dx + dy * dy) / (radius * radius);
    out[node] = rr < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - rr)) : 0.0;
  }
  out.sync_periodic();
  return out;
}

inline ImageField rectangle_image(const Grid& grid, Vec2 lo, Vec2 hi,
                                  double value = 1.0) {
  ImageField out(grid);
  for (int node = 0; node < grid.node_count(); ++node) {
    const Vec2 p = grid.node_position(node);
    if (p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y)
      out[node] = value;
  }
  out.sync_periodic();
  return out;
}

inline ImageField constant_image(const Grid& grid, double c) {
  return ImageField(grid, c);
}

inline ImageField random_image(const Grid& grid, std::mt19937_64& rng,
                               double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ImageField out(grid);
  for (double& v : out.values()) v = dist(rng);
  out.sync_periodic();
  return out;
}

/// Small random displacement on the free nodes; magnitude well under a cell
/// width keeps det D phi > 0.
inline Deformation random_admissible_deformation(const Grid& grid,
                                                 std::mt19937_64& rng,
                                                 double magnitude) {
  std::uniform_real_distribution<double> dist(-magnitude, magnitude);
  Deformation out(grid);
  const int n = grid.nodes_per_side();
  const int lo = grid.periodic() ? 0 : 1;
  const int hi = grid.periodic() ? n - 1 : n - 1;
  for (int iy = lo; iy < hi; ++iy)
    for (int ix = lo; ix < hi; ++ix)
      out.displacement()[grid.node_index(ix, iy)] = {dist(rng), dist(rng)};
  out.sync_periodic();
  return out;
}

/// Area-weighted total mass (Simpson quadrature of the field).
double image_mass(const ImageField& u);
/// Center of mass; meaningful for nonnegative fields with positive mass.
Vec2 image_center_of_mass(const ImageField& u);
/// Connected components above the threshold (4-adjacency on nodes, wrapping
/// on periodic grids).
int count_components_above(const ImageField& u, double threshold);

}  // namespace otm
