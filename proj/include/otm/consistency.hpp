#pragma once

#include <functional>
#include <vector>

#include "otm/elastic.hpp"
#include "otm/field.hpp"

namespace otm {

/// A smooth image path with velocities, supplied analytically. `z` is the
/// continuity-equation source du/dt + div(u v) in closed form; `dv` is the
/// spatial Jacobian of v.
struct SmoothPath {
  std::function<double(double, Vec2)> u;
  std::function<Vec2(double, Vec2)> v;
  std::function<Mat2(double, Vec2)> dv;
  std::function<double(double, Vec2)> z;
};

struct ConsistencyRow {
  int K = 0;
  double discrete_energy = 0.0;
  double error_vs_continuous = 0.0;
  double error_vs_reference = 0.0;
};

struct ConsistencyTable {
  double continuous_energy = 0.0;
  double reference_energy = 0.0;  // E^{K_ref,D} on the same grid
  int reference_K = 0;
  std::vector<ConsistencyRow> rows;
  /// log2(err(K)/err(2K)) for consecutive Ks, measured against the
  /// high-K reference.
  std::vector<double> observed_orders;
};

/// Discrete path energy E^{K,D} = K sum_k F[u_{k-1}, u_k, id + v_k/K] for
/// nodal samples of the smooth path.
double discrete_path_energy_of_samples(const SmoothPath& path,
                                       const Grid& grid, int K, double delta,
                                       double gamma,
                                       const ElasticParams& elastic);

/// Continuous path energy by composite-Simpson time quadrature of the
/// spatial Simpson integral of u|v|^2 + z^2/delta + gamma L[v,v].
double continuous_path_energy(const SmoothPath& path, const Grid& grid,
                              double delta, double gamma,
                              const ElasticParams& elastic,
                              int time_steps = 256);

ConsistencyTable consistency_check(const SmoothPath& path, const Grid& grid,
                                   const std::vector<int>& Ks, double delta,
                                   double gamma, const ElasticParams& elastic,
                                   int reference_K = 256,
                                   int time_steps = 256);

}  // namespace otm
