#include "otm/field.hpp"

#include <cmath>

namespace otm {

namespace {

struct CellLocation {
  int cx, cy;
  double sx, sy;  // local coordinates in [0,1]
};

CellLocation locate_or_throw(const Grid& grid, Vec2 p) {
  bool inside = true;
  CellLocation loc;
  detail::locate_1d(p.x, grid.cells_per_side(), grid.cell_width(),
                    grid.periodic(), loc.cx, loc.sx, inside);
  detail::locate_1d(p.y, grid.cells_per_side(), grid.cell_width(),
                    grid.periodic(), loc.cy, loc.sy, inside);
  if (!inside)
    throw OutOfDomainError("evaluation point outside [0,1]^2");
  return loc;
}

}  // namespace

double ImageField::eval(Vec2 p) const {
  const CellLocation l = locate_or_throw(grid_, p);
  const int n = grid_.nodes_per_side();
  const double* v = values_.data() + l.cy * n + l.cx;
  const double v00 = v[0], v10 = v[1], v01 = v[n], v11 = v[n + 1];
  return (1 - l.sx) * (1 - l.sy) * v00 + l.sx * (1 - l.sy) * v10 +
         (1 - l.sx) * l.sy * v01 + l.sx * l.sy * v11;
}

Vec2 ImageField::eval_gradient(Vec2 p) const {
  const CellLocation l = locate_or_throw(grid_, p);
  const int n = grid_.nodes_per_side();
  const double inv_h = 1.0 / grid_.cell_width();
  const double* v = values_.data() + l.cy * n + l.cx;
  const double v00 = v[0], v10 = v[1], v01 = v[n], v11 = v[n + 1];
  return {((1 - l.sy) * (v10 - v00) + l.sy * (v11 - v01)) * inv_h,
          ((1 - l.sx) * (v01 - v00) + l.sx * (v11 - v10)) * inv_h};
}

void ImageField::sync_periodic() {
  if (!grid_.periodic()) return;
  const int n = grid_.nodes_per_side();
  for (int i = 0; i < n; ++i) {
    values_[grid_.node_index(n - 1, i)] =
        values_[grid_.node_index(0, i % (n - 1))];
    values_[grid_.node_index(i, n - 1)] =
        values_[grid_.node_index(i % (n - 1), 0)];
  }
}

bool Deformation::is_identity() const {
  for (const Vec2& d : displacement_)
    if (d.x != 0.0 || d.y != 0.0) return false;
  return true;
}

Vec2 Deformation::eval_displacement(Vec2 p) const {
  const CellLocation l = locate_or_throw(grid_, p);
  const int n = grid_.nodes_per_side();
  const Vec2* v = displacement_.data() + l.cy * n + l.cx;
  const Vec2 v00 = v[0], v10 = v[1], v01 = v[n], v11 = v[n + 1];
  return (1 - l.sx) * (1 - l.sy) * v00 + l.sx * (1 - l.sy) * v10 +
         (1 - l.sx) * l.sy * v01 + l.sx * l.sy * v11;
}

Mat2 Deformation::jacobian(Vec2 p) const {
  const CellLocation l = locate_or_throw(grid_, p);
  const int n = grid_.nodes_per_side();
  const double inv_h = 1.0 / grid_.cell_width();
  const Vec2* v = displacement_.data() + l.cy * n + l.cx;
  const Vec2 v00 = v[0], v10 = v[1], v01 = v[n], v11 = v[n + 1];
  const Vec2 dx = ((1 - l.sy) * (v10 - v00) + l.sy * (v11 - v01)) * inv_h;
  const Vec2 dy = ((1 - l.sx) * (v01 - v00) + l.sx * (v11 - v10)) * inv_h;
  return {1.0 + dx.x, dy.x, dx.y, 1.0 + dy.y};
}

void Deformation::sync_periodic() {
  if (!grid_.periodic()) return;
  const int n = grid_.nodes_per_side();
  for (int i = 0; i < n; ++i) {
    displacement_[grid_.node_index(n - 1, i)] =
        displacement_[grid_.node_index(0, i % (n - 1))];
    displacement_[grid_.node_index(i, n - 1)] =
        displacement_[grid_.node_index(i % (n - 1), 0)];
  }
}

namespace {

void check_prolongation_levels(const Grid& from, const Grid& to) {
  if (to.level() != from.level() + 1 || to.boundary() != from.boundary())
    throw std::invalid_argument("prolongate: target must be one level finer");
}

}  // namespace

ImageField prolongate(const ImageField& field, const Grid& target) {
  check_prolongation_levels(field.grid(), target);
  ImageField out(target);
  const int n = target.nodes_per_side();
  const double h = target.cell_width();
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      out[target.node_index(ix, iy)] = field.eval({ix * h, iy * h});
  return out;
}

Deformation prolongate(const Deformation& field, const Grid& target) {
  check_prolongation_levels(field.grid(), target);
  Deformation out(target);
  const int n = target.nodes_per_side();
  const double h = target.cell_width();
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      out.displacement()[target.node_index(ix, iy)] =
          field.eval_displacement({ix * h, iy * h});
  return out;
}

ImageField restrict_to(const ImageField& field, const Grid& target) {
  const Grid& src = field.grid();
  if (target.level() > src.level() || target.boundary() != src.boundary())
    throw std::invalid_argument("restrict_to: target must be coarser");
  const int stride = 1 << (src.level() - target.level());
  ImageField out(target);
  const int n = target.nodes_per_side();
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      out[target.node_index(ix, iy)] =
          field[src.node_index(ix * stride, iy * stride)];
  return out;
}

}  // namespace otm
