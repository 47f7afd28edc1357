#include "otm/bb.hpp"

#include <cmath>

#include "otm/dof.hpp"
#include "otm/mass_matrix.hpp"

namespace otm {

void project_paraboloid(double& a, Vec2& b) {
  const double slack = a + 0.5 * b.norm_sq();
  if (slack <= 0.0) return;
  const double beta = b.norm();
  if (beta == 0.0) {    // projection of (a > 0, 0) is the vertex
    a = 0.0;
    return;
  }
  // Multiplier equation h(t) = a - t + beta^2 / (2 (1+t)^2) = 0; h is
  // strictly decreasing and convex on t > -1 with h(0) = slack > 0.
  auto h = [&](double t) { return a - t + 0.5 * beta * beta / ((1 + t) * (1 + t)); };
  double lo = 0.0, hi = std::max(1.0, a + 0.5 * beta * beta);
  while (h(hi) > 0.0) hi *= 2.0;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double ht = h(t);
    if (std::abs(ht) < 1e-14 * (1.0 + std::abs(a) + beta)) break;
    if (ht > 0.0)
      lo = t;
    else
      hi = t;
    const double dh = -1.0 - beta * beta / std::pow(1 + t, 3);
    double t_newton = t - ht / dh;
    if (t_newton <= lo || t_newton >= hi) t_newton = 0.5 * (lo + hi);
    t = t_newton;
  }
  a -= t;
  b *= 1.0 / (1.0 + t);
}

namespace {

constexpr double kGaussOffset = 0.28867513459481287;  // 1/(2 sqrt(3))

}  // namespace

int BBDiscretization::st_dof(int it, int spatial_node) const {
  return it * grid_.spatial.dof_count() +
         grid_.spatial.dof_of_node(spatial_node);
}

void BBDiscretization::cell_nodes(int cell, std::array<int, 8>& nodes) const {
  const int cs = grid_.spatial.cells_per_side();
  const int ix = cell % cs;
  const int iy = (cell / cs) % cs;
  const int it = cell / (cs * cs);
  for (int c = 0; c < 8; ++c) {
    const int ct = c >> 2, cy = (c >> 1) & 1, cx = c & 1;
    nodes[c] = st_dof(it + ct, grid_.spatial.node_index(ix + cx, iy + cy));
  }
}

BBDiscretization::BBDiscretization(const SpaceTimeGrid& grid, double r,
                                   double delta)
    : grid_(grid), r_(r), delta_(delta) {
  if (r <= 0.0 || delta <= 0.0)
    throw std::invalid_argument("BBDiscretization: r and delta must be > 0");
  const double tau = grid_.tau();
  const double h = grid_.spatial.cell_width();
  weight_ = 0.125 * tau * h * h;  // 2x2x2 Gauss, each weight 1/8, x volume

  // Shape tables at the 8 Gauss points.
  const double gp[2] = {0.5 - kGaussOffset, 0.5 + kGaussOffset};
  for (int g = 0; g < 8; ++g) {
    const double gt = gp[g >> 2], gy = gp[(g >> 1) & 1], gx = gp[g & 1];
    for (int c = 0; c < 8; ++c) {
      const int ct = c >> 2, cy = (c >> 1) & 1, cx = c & 1;
      const double nt = ct ? gt : 1 - gt, dnt = ct ? 1.0 : -1.0;
      const double ny = cy ? gy : 1 - gy, dny = cy ? 1.0 : -1.0;
      const double nx = cx ? gx : 1 - gx, dnx = cx ? 1.0 : -1.0;
      shapes_[g].value[c] = nt * ny * nx;
      shapes_[g].dt[c] = dnt * ny * nx / tau;
      shapes_[g].dx[c] = nt * ny * dnx / h;
      shapes_[g].dy[c] = nt * dny * nx / h;
    }
  }

  // Operator r G'WG + (delta/2) M assembled cellwise.
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(grid_.cell_count()) * 64);
  std::array<int, 8> nodes;
  double local[8][8];
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      double acc = 0.0;
      for (int g = 0; g < 8; ++g) {
        const Shape& s = shapes_[g];
        acc += weight_ * (r * (s.dt[i] * s.dt[j] + s.dx[i] * s.dx[j] +
                               s.dy[i] * s.dy[j]) +
                          0.5 * delta * s.value[i] * s.value[j]);
      }
      local[i][j] = acc;
    }
  for (int cell = 0; cell < grid_.cell_count(); ++cell) {
    cell_nodes(cell, nodes);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        triplets.push_back({nodes[i], nodes[j], local[i][j]});
  }
  op_ = SparseMatrix::from_triplets(grid_.node_count(), std::move(triplets));

  spatial_mass_ = assemble_mass_matrix(grid_.spatial,
                                       unit_weights(grid_.spatial), nullptr,
                                       nullptr);
}

double BBDiscretization::sample_time(int s) const {
  const int cell = s / 8, g = s % 8;
  const int it = cell / (grid_.spatial.cells_per_side() *
                         grid_.spatial.cells_per_side());
  const double gp[2] = {0.5 - kGaussOffset, 0.5 + kGaussOffset};
  return (it + gp[g >> 2]) * grid_.tau();
}

Vec2 BBDiscretization::sample_position(int s) const {
  const int cell = s / 8, g = s % 8;
  const int cs = grid_.spatial.cells_per_side();
  const int ix = cell % cs, iy = (cell / cs) % cs;
  const double h = grid_.spatial.cell_width();
  const double gp[2] = {0.5 - kGaussOffset, 0.5 + kGaussOffset};
  return {(ix + gp[g & 1]) * h, (iy + gp[(g >> 1) & 1]) * h};
}

double BBDiscretization::node_time(int node) const {
  return (node / grid_.spatial.dof_count()) * grid_.tau();
}

Vec2 BBDiscretization::node_position(int node) const {
  const int sd = node % grid_.spatial.dof_count();
  return grid_.spatial.node_position(grid_.spatial.node_of_dof(sd));
}

std::vector<double> BBDiscretization::assemble_load(
    const SampledPair& q, const SampledPair& mu, const ImageField* u_a,
    const ImageField* u_b) const {
  std::vector<double> load(node_count(), 0.0);
  std::array<int, 8> nodes;
  for (int cell = 0; cell < grid_.cell_count(); ++cell) {
    cell_nodes(cell, nodes);
    for (int g = 0; g < 8; ++g) {
      const int s = cell * 8 + g;
      const Shape& sh = shapes_[g];
      const double vt = r_ * q.a[s] - mu.a[s];
      const Vec2 vx = r_ * q.b[s] - mu.b[s];
      for (int c = 0; c < 8; ++c)
        load[nodes[c]] +=
            weight_ * (sh.dt[c] * vt + sh.dx[c] * vx.x + sh.dy[c] * vx.y);
    }
  }
  // Endpoint data enters through the natural time-boundary terms.
  const int nsd = grid_.spatial.dof_count();
  const ImageDofMap dof(grid_.spatial);
  std::vector<double> tmp(nsd);
  if (u_a != nullptr) {
    spatial_mass_.multiply(dof.pack(*u_a), tmp);
    for (int i = 0; i < nsd; ++i) load[i] -= tmp[i];
  }
  if (u_b != nullptr) {
    spatial_mass_.multiply(dof.pack(*u_b), tmp);
    for (int i = 0; i < nsd; ++i) load[grid_.time_steps * nsd + i] += tmp[i];
  }
  return load;
}

PcgResult BBDiscretization::solve_potential(const std::vector<double>& load,
                                            std::vector<double>& phi,
                                            double rel_tol,
                                            int max_iters) const {
  std::vector<double> inv_diag = op_.diagonal();
  for (double& d : inv_diag) d = 1.0 / d;
  const PcgResult result = pcg_solve(
      [&](std::span<const double> x, std::span<double> y) {
        op_.multiply(x, y);
      },
      inv_diag, load, phi, rel_tol, max_iters);
  if (!result.converged)
    throw PcgError("bb: potential solve did not converge",
                   result.relative_residual);
  return result;
}

void BBDiscretization::potential_gradient(const std::vector<double>& phi,
                                          std::vector<double>& dt,
                                          std::vector<Vec2>& dx) const {
  dt.assign(sample_count(), 0.0);
  dx.assign(sample_count(), Vec2{});
  std::array<int, 8> nodes;
  for (int cell = 0; cell < grid_.cell_count(); ++cell) {
    cell_nodes(cell, nodes);
    for (int g = 0; g < 8; ++g) {
      const int s = cell * 8 + g;
      const Shape& sh = shapes_[g];
      double at = 0.0, ax = 0.0, ay = 0.0;
      for (int c = 0; c < 8; ++c) {
        const double p = phi[nodes[c]];
        at += sh.dt[c] * p;
        ax += sh.dx[c] * p;
        ay += sh.dy[c] * p;
      }
      dt[s] = at;
      dx[s] = {ax, ay};
    }
  }
}

std::vector<double> BBDiscretization::potential_at_samples(
    const std::vector<double>& phi) const {
  std::vector<double> out(sample_count(), 0.0);
  std::array<int, 8> nodes;
  for (int cell = 0; cell < grid_.cell_count(); ++cell) {
    cell_nodes(cell, nodes);
    for (int g = 0; g < 8; ++g) {
      const Shape& sh = shapes_[g];
      double acc = 0.0;
      for (int c = 0; c < 8; ++c) acc += sh.value[c] * phi[nodes[c]];
      out[cell * 8 + g] = acc;
    }
  }
  return out;
}

std::vector<double> BBDiscretization::assemble_source_load(
    const std::function<double(double, Vec2)>& f) const {
  std::vector<double> load(node_count(), 0.0);
  std::array<int, 8> nodes;
  for (int cell = 0; cell < grid_.cell_count(); ++cell) {
    cell_nodes(cell, nodes);
    for (int g = 0; g < 8; ++g) {
      const int s = cell * 8 + g;
      const double value = f(sample_time(s), sample_position(s));
      for (int c = 0; c < 8; ++c)
        load[nodes[c]] += weight_ * shapes_[g].value[c] * value;
    }
  }
  return load;
}

std::vector<ImageField> BBDiscretization::slice_samples(
    const std::vector<double>& values) const {
  const int nsd = grid_.spatial.dof_count();
  std::vector<double> num(node_count(), 0.0), den(node_count(), 0.0);
  std::array<int, 8> nodes;
  for (int cell = 0; cell < grid_.cell_count(); ++cell) {
    cell_nodes(cell, nodes);
    for (int g = 0; g < 8; ++g) {
      const int s = cell * 8 + g;
      for (int c = 0; c < 8; ++c) {
        num[nodes[c]] += weight_ * shapes_[g].value[c] * values[s];
        den[nodes[c]] += weight_ * shapes_[g].value[c];
      }
    }
  }
  std::vector<ImageField> slices;
  slices.reserve(grid_.time_steps + 1);
  for (int it = 0; it <= grid_.time_steps; ++it) {
    ImageField slice(grid_.spatial);
    for (int node = 0; node < grid_.spatial.node_count(); ++node) {
      const int dof = it * nsd + grid_.spatial.dof_of_node(node);
      slice[node] = den[dof] > 0.0 ? num[dof] / den[dof] : 0.0;
    }
    slices.push_back(std::move(slice));
  }
  return slices;
}

double alg2_iterate(const BBDiscretization& disc, SpaceTimeState& state,
                    const ImageField& u_a, const ImageField& u_b,
                    double pcg_rel_tol) {
  // (1) potential update (z = (delta/2) phi is implicit in the operator).
  const std::vector<double> load =
      disc.assemble_load(state.q, state.mu, &u_a, &u_b);
  disc.solve_potential(load, state.phi, pcg_rel_tol);

  // (2) pointwise projection q = proj_K(grad phi + mu / r).
  std::vector<double> gt;
  std::vector<Vec2> gx;
  disc.potential_gradient(state.phi, gt, gx);
  const double inv_r = 1.0 / state.r;
  const int samples = disc.sample_count();
  double residual = 0.0;
  for (int s = 0; s < samples; ++s) {
    double a = gt[s] + state.mu.a[s] * inv_r;
    Vec2 b = gx[s] + state.mu.b[s] * inv_r;
    project_paraboloid(a, b);
    state.q.a[s] = a;
    state.q.b[s] = b;
    // (3) dual ascent mu += r (grad phi - q).
    const double rt = gt[s] - a;
    const Vec2 rx = gx[s] - b;
    state.mu.a[s] += state.r * rt;
    state.mu.b[s] += state.r * rx;
    residual += disc.sample_weight() * (rt * rt + rx.norm_sq());
  }
  return std::sqrt(residual);
}

BBEnergy bb_energy(const BBDiscretization& disc, const SpaceTimeState& state) {
  BBEnergy e;
  const double w = disc.sample_weight();
  for (int s = 0; s < disc.sample_count(); ++s) {
    const double rho = state.mu.a[s];
    const double msq = state.mu.b[s].norm_sq();
    // 1-homogeneous quotient with 0^2/0 = 0; samples with rho ~ 0 and
    // residual momentum are skipped (they carry no reliable energy).
    if (rho > 1e-12)
      e.transport += w * msq / rho;
  }
  const std::vector<double> phi_s = disc.potential_at_samples(state.phi);
  for (int s = 0; s < disc.sample_count(); ++s) {
    const double z = 0.5 * state.delta * phi_s[s];
    e.source += w * z * z / state.delta;
  }
  return e;
}

BBResult bb_geodesic(const ImageField& u_a, const ImageField& u_b,
                     const SpaceTimeGrid& grid, double r, double delta,
                     int max_iters, double tol) {
  if (u_a.grid() != grid.spatial || u_b.grid() != grid.spatial)
    throw std::invalid_argument("bb_geodesic: endpoint grid mismatch");
  const BBDiscretization disc(grid, r, delta);

  SpaceTimeState state;
  state.r = r;
  state.delta = delta;
  state.phi.assign(disc.node_count(), 0.0);
  state.q = SampledPair(disc.sample_count());
  state.mu = SampledPair(disc.sample_count());
  for (int s = 0; s < disc.sample_count(); ++s) {
    const double t = disc.sample_time(s);
    const Vec2 x = disc.sample_position(s);
    state.mu.a[s] = (1.0 - t) * u_a.eval(x) + t * u_b.eval(x);
  }

  BBResult out;
  for (int it = 1; it <= max_iters; ++it) {
    const double residual = alg2_iterate(disc, state, u_a, u_b);
    BBIterRecord rec;
    rec.iteration = it;
    rec.primal_residual = residual;
    rec.transport_energy = bb_energy(disc, state).transport;
    out.log.push_back(rec);
    out.iterations = it;
    if (residual < tol) {
      out.converged = true;
      break;
    }
  }
  out.energy = bb_energy(disc, state);
  out.distance_sq = out.energy.transport;
  out.slices = disc.slice_samples(state.mu.a);
  return out;
}

}  // namespace otm
