#include "otm/consistency.hpp"

#include <cmath>
#include <stdexcept>

#include "otm/matching.hpp"
#include "otm/quadrature.hpp"

namespace otm {

namespace {

ImageField sample_image(const std::function<double(double, Vec2)>& u, double t,
                        const Grid& grid) {
  ImageField out(grid);
  for (int node = 0; node < grid.node_count(); ++node)
    out[node] = u(t, grid.node_position(node));
  return out;
}

Deformation sample_deformation(const std::function<Vec2(double, Vec2)>& v,
                               double t, double scale, const Grid& grid) {
  Deformation out(grid);
  for (int node = 0; node < grid.node_count(); ++node)
    out.displacement()[node] = v(t, grid.node_position(node)) * scale;
  return out;
}

}  // namespace

double discrete_path_energy_of_samples(const SmoothPath& path,
                                       const Grid& grid, int K, double delta,
                                       double gamma,
                                       const ElasticParams& elastic) {
  const double tau = 1.0 / K;
  ImageField prev = sample_image(path.u, 0.0, grid);
  double total = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double t = k * tau;
    const ImageField next = sample_image(path.u, t, grid);
    const Deformation phi = sample_deformation(path.v, t, tau, grid);
    const EnergyBreakdown e =
        matching_energy(prev, next, phi, delta, gamma, elastic);
    if (!e.finite)
      throw std::domain_error(
          "discrete_path_energy_of_samples: inadmissible sampled deformation");
    total += e.total();
    prev = next;
  }
  return K * total;
}

double continuous_path_energy(const SmoothPath& path, const Grid& grid,
                              double delta, double gamma,
                              const ElasticParams& elastic, int time_steps) {
  if (time_steps % 2 != 0)
    throw std::invalid_argument("continuous_path_energy: need even time_steps");
  const CellQuadrature quad(grid);
  const double dt = 1.0 / time_steps;

  auto spatial_integral = [&](double t) {
    std::vector<double> partial(quad.cell_count(), 0.0);
    for (int cell = 0; cell < quad.cell_count(); ++cell) {
      double acc = 0.0;
      for (int q = 0; q < QuadratureRule::kPoints; ++q) {
        const Vec2 x = quad.world_point(cell, q);
        const double w = quad.world_weight(q);
        const double uv = path.u(t, x);
        const Vec2 vv = path.v(t, x);
        const double zv = path.z(t, x);
        double integrand = uv * vv.norm_sq() + zv * zv / delta;
        if (gamma > 0.0) {
          const Mat2 dv = path.dv(t, x);
          const double div_v = dv.trace();
          const Mat2 eps{dv.a, 0.5 * (dv.b + dv.c), 0.5 * (dv.b + dv.c), dv.d};
          const double tr_eps_sq = eps.a * eps.a + 2.0 * eps.b * eps.c + eps.d * eps.d;
          integrand +=
              gamma * (0.5 * elastic.lambda * div_v * div_v + elastic.mu * tr_eps_sq);
        }
        acc += w * integrand;
      }
      partial[cell] = acc;
    }
    return pairwise_sum(partial);
  };

  double total = 0.0;
  for (int j = 0; j <= time_steps; ++j) {
    const double coeff = (j == 0 || j == time_steps) ? 1.0
                         : (j % 2 == 1)              ? 4.0
                                                     : 2.0;
    total += coeff * spatial_integral(j * dt);
  }
  return total * dt / 3.0;
}

ConsistencyTable consistency_check(const SmoothPath& path, const Grid& grid,
                                   const std::vector<int>& Ks, double delta,
                                   double gamma, const ElasticParams& elastic,
                                   int reference_K, int time_steps) {
  ConsistencyTable table;
  table.continuous_energy =
      continuous_path_energy(path, grid, delta, gamma, elastic, time_steps);
  table.reference_K = reference_K;
  table.reference_energy = discrete_path_energy_of_samples(
      path, grid, reference_K, delta, gamma, elastic);

  for (int K : Ks) {
    ConsistencyRow row;
    row.K = K;
    row.discrete_energy =
        discrete_path_energy_of_samples(path, grid, K, delta, gamma, elastic);
    row.error_vs_continuous =
        std::abs(row.discrete_energy - table.continuous_energy);
    row.error_vs_reference =
        std::abs(row.discrete_energy - table.reference_energy);
    table.rows.push_back(row);
  }
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    const double e0 = table.rows[i].error_vs_reference;
    const double e1 = table.rows[i + 1].error_vs_reference;
    const double ratio_k = static_cast<double>(table.rows[i + 1].K) /
                           static_cast<double>(table.rows[i].K);
    if (e0 > 0.0 && e1 > 0.0)
      table.observed_orders.push_back(std::log(e0 / e1) / std::log(ratio_k));
  }
  return table;
}

}  // namespace otm
