#pragma once

#include <functional>
#include <vector>

#include "otm/field.hpp"
#include "otm/pcg.hpp"
#include "otm/sparse.hpp"

namespace otm {

/// Euclidean projection onto K = {(a, b) : a + |b|^2/2 <= 0}. Interior
/// points are returned unchanged; otherwise the unique closest boundary
/// point, via the monotone multiplier equation solved to 1e-12.
void project_paraboloid(double& a, Vec2& b);

struct SpaceTimeGrid {
  Grid spatial;
  int time_steps;  // N_t; tau = 1/N_t

  SpaceTimeGrid(const Grid& spatial_grid, int nt)
      : spatial(spatial_grid), time_steps(nt) {
    if (nt < 2) throw std::invalid_argument("SpaceTimeGrid: N_t < 2");
  }
  double tau() const { return 1.0 / time_steps; }
  int node_count() const { return (time_steps + 1) * spatial.dof_count(); }
  int cell_count() const { return time_steps * spatial.cell_count(); }
  int sample_count() const { return cell_count() * 8; }
};

/// Scalar-plus-vector field sampled at the space-time Gauss points; used for
/// both q = (a, b) and mu = (rho, m).
struct SampledPair {
  std::vector<double> a;
  std::vector<Vec2> b;

  explicit SampledPair(int samples = 0) : a(samples, 0.0), b(samples) {}
};

struct SpaceTimeState {
  std::vector<double> phi;  // nodal potential
  SampledPair q;            // (a, b)
  SampledPair mu;           // (rho, m)
  double r = 1.0;
  double delta = 1.0;
};

struct BBIterRecord {
  int iteration = 0;
  double primal_residual = 0.0;
  double transport_energy = 0.0;
};

struct BBEnergy {
  double transport = 0.0;  // integral of |m|^2 / rho (0^2/0 := 0)
  double source = 0.0;     // (1/delta) integral of z^2, z = (delta/2) phi
  double total() const { return transport + source; }
};

struct BBResult {
  std::vector<ImageField> slices;  // rho at the N_t + 1 time levels
  BBEnergy energy;
  double distance_sq = 0.0;  // the transport quotient integral
  std::vector<BBIterRecord> log;
  int iterations = 0;
  bool converged = false;
};

/// Trilinear space-time discretization of the screened potential problem
///   -r Laplace_{t,x} phi + (delta/2) phi = div_{t,x}(mu - r q)
/// with natural (Neumann) conditions in time carrying the endpoint data and
/// the spatial boundary following the grid's boundary enum. The operator
/// r G'WG + (delta/2) M is assembled once; q and mu live at the 2x2x2 Gauss
/// samples where G phi is evaluated.
class BBDiscretization {
 public:
  BBDiscretization(const SpaceTimeGrid& grid, double r, double delta);

  const SpaceTimeGrid& grid() const { return grid_; }
  int node_count() const { return grid_.node_count(); }
  int sample_count() const { return grid_.sample_count(); }
  double sample_weight() const { return weight_; }
  const SparseMatrix& op() const { return op_; }

  /// (t, x) coordinates of a sample / a space-time node.
  double sample_time(int s) const;
  Vec2 sample_position(int s) const;
  double node_time(int node) const;
  Vec2 node_position(int node) const;

  /// Right-hand side G'W(r q - mu) plus the time-face loads -M_x u_a, +M_x u_b.
  std::vector<double> assemble_load(const SampledPair& q, const SampledPair& mu,
                                    const ImageField* u_a,
                                    const ImageField* u_b) const;
  /// Load vector of an arbitrary source: l_i = integral of f xi_i.
  std::vector<double> assemble_source_load(
      const std::function<double(double, Vec2)>& f) const;

  PcgResult solve_potential(const std::vector<double>& load,
                            std::vector<double>& phi, double rel_tol = 1e-8,
                            int max_iters = 20000) const;

  /// (d/dt, grad_x) phi at every sample point.
  void potential_gradient(const std::vector<double>& phi,
                          std::vector<double>& dt, std::vector<Vec2>& dx) const;
  /// phi interpolated at every sample point.
  std::vector<double> potential_at_samples(const std::vector<double>& phi) const;

  /// Lumped projection of sample values onto the N_t + 1 nodal time slices.
  std::vector<ImageField> slice_samples(const std::vector<double>& values) const;

 private:
  SpaceTimeGrid grid_;
  double r_;
  double delta_;
  double weight_;  // constant Gauss weight x cell volume
  SparseMatrix op_;
  SparseMatrix spatial_mass_;
  // Per-Gauss-point trilinear shape values and gradients (t, x, y).
  struct Shape {
    std::array<double, 8> value;
    std::array<double, 8> dt, dx, dy;
  };
  std::array<Shape, 8> shapes_;
  int st_dof(int it, int spatial_node) const;
  void cell_nodes(int cell, std::array<int, 8>& nodes) const;
  friend struct BBCellIter;
};

/// One ALG2 sweep: potential solve, pointwise projection, dual ascent.
/// Returns the primal residual ||G phi - q||_{L^2}.
double alg2_iterate(const BBDiscretization& disc, SpaceTimeState& state,
                    const ImageField& u_a, const ImageField& u_b,
                    double pcg_rel_tol = 1e-8);

BBEnergy bb_energy(const BBDiscretization& disc, const SpaceTimeState& state);

BBResult bb_geodesic(const ImageField& u_a, const ImageField& u_b,
                     const SpaceTimeGrid& grid, double r, double delta,
                     int max_iters, double tol);

}  // namespace otm
