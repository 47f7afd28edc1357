#pragma once

#include <array>

#include "otm/field.hpp"
#include "otm/grid.hpp"

namespace otm {

/// Tensor 3x3 Simpson rule on the reference cell [0,1]^2 (9 points).
/// Exact for tensor-product polynomials of per-direction degree <= 3.
struct QuadratureRule {
  static constexpr int kPoints = 9;
  std::array<Vec2, kPoints> point;            // reference coordinates
  std::array<double, kPoints> weight;         // reference weights, sum = 1
  std::array<std::array<double, 4>, kPoints> shape;    // bilinear values
  std::array<std::array<Vec2, 4>, kPoints> shape_ref_grad;  // reference grads

  QuadratureRule() {
    constexpr double c[3] = {0.0, 0.5, 1.0};
    constexpr double w[3] = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
    int q = 0;
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 3; ++i, ++q) {
        const double s = c[i], t = c[j];
        point[q] = {s, t};
        weight[q] = w[i] * w[j];
        shape[q] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
        shape_ref_grad[q] = {Vec2{-(1 - t), -(1 - s)}, Vec2{1 - t, -s},
                             Vec2{-t, 1 - s}, Vec2{t, s}};
      }
    }
  }
};

inline const QuadratureRule& simpson_rule() {
  static const QuadratureRule rule;
  return rule;
}

/// Per-cell quadrature geometry on a grid: nodes of the cell, world-space
/// quadrature points, and weights pre-multiplied by the cell area.
struct CellQuadrature {
  const Grid& grid;
  const QuadratureRule& rule = simpson_rule();
  double cell_area;
  double inv_h;

  explicit CellQuadrature(const Grid& g)
      : grid(g),
        cell_area(g.cell_width() * g.cell_width()),
        inv_h(1.0 / g.cell_width()) {}

  int cell_count() const { return grid.cell_count(); }

  std::array<int, 4> cell_nodes(int cell) const {
    const int cs = grid.cells_per_side();
    const int cx = cell % cs, cy = cell / cs;
    return {grid.node_index(cx, cy), grid.node_index(cx + 1, cy),
            grid.node_index(cx, cy + 1), grid.node_index(cx + 1, cy + 1)};
  }

  Vec2 world_point(int cell, int q) const {
    const int cs = grid.cells_per_side();
    const double h = grid.cell_width();
    const int cx = cell % cs, cy = cell / cs;
    return {(cx + rule.point[q].x) * h, (cy + rule.point[q].y) * h};
  }

  double world_weight(int q) const { return rule.weight[q] * cell_area; }

  /// Shape gradient in world coordinates (reference gradient / h).
  Vec2 shape_grad(int q, int a) const {
    return rule.shape_ref_grad[q][a] * inv_h;
  }
};

/// Deterministic pairwise tree reduction over per-cell partial sums.
double pairwise_sum(std::vector<double>& partials);

}  // namespace otm
