#pragma once

#include <vector>

#include "otm/field.hpp"
#include "otm/model.hpp"

namespace otm {

/// One node's transport-path data: positions X_0..X_K, per-step Jacobian
/// determinants d_k = det D phi_k(X_{k-1}) and path weights
/// c_k = det D X_{k-1} = d_1 ... d_{k-1}.
struct TransportPath {
  std::vector<Vec2> positions;   // K+1, wrapped on periodic grids
  std::vector<Vec2> step;        // K, unwrapped displacement X_k - X_{k-1}
  std::vector<double> step_det;  // K, d_k
  std::vector<double> weight;    // K, c_k
};

TransportPath trace_transport_path(const std::vector<Deformation>& phis,
                                   Vec2 start);

/// The per-node quadratic minimized along a transport path:
///   Q(v_1..v_{K-1}) = sum_k c_k ( |X_k - X_{k-1}|^2 v_{k-1}
///                                 + (1/delta) (d_k v_k - v_{k-1})^2 )
/// with v_0 = u_A(x), v_K = u_B(x) fixed. Hessian is tridiagonal positive
/// definite.
struct PathQp {
  std::vector<double> h_diag;   // K-1
  std::vector<double> h_off;    // K-2, H_{k,k+1}
  std::vector<double> lin;      // K-1, linear coefficients b
  double value(const std::vector<double>& v) const;
  std::vector<double> gradient(const std::vector<double>& v) const;
};

PathQp build_path_qp(const TransportPath& path, double u_a, double u_b,
                     double delta);

/// Unconstrained minimizer of the path quadratic (Thomas solve); equals the
/// pointwise Euler-Lagrange recursion values sampled along the path.
std::vector<double> solve_path_recursion(const PathQp& qp);

/// Minimizer subject to v_k >= 0: projected coordinate descent with an
/// exact active-set polish and KKT verification.
std::vector<double> solve_path_qp_nonnegative(const PathQp& qp);

/// Interior images sampled along the transport paths started at the grid
/// nodes: output field k holds u_k(X_k(x)) at node x. With identity
/// deformations this coincides with the nodal interior images.
std::vector<ImageField> pointwise_qp(const ImageField& u_a,
                                     const ImageField& u_b,
                                     const std::vector<Deformation>& phis,
                                     const ModelParams& params);

}  // namespace otm
