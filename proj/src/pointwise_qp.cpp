#include "otm/pointwise_qp.hpp"

#include <cmath>
#include <stdexcept>

#include "otm/elastic.hpp"

namespace otm {

TransportPath trace_transport_path(const std::vector<Deformation>& phis,
                                   Vec2 start) {
  TransportPath path;
  const int K = static_cast<int>(phis.size());
  path.positions.reserve(K + 1);
  path.positions.push_back(start);
  path.step_det.resize(K);
  path.weight.resize(K);
  path.step.resize(K);
  double w = 1.0;
  for (int k = 0; k < K; ++k) {
    const Vec2 x = path.positions.back();
    const double det = phis[k].jacobian(x).det();
    if (det <= kDetFloor)
      throw std::domain_error(
          "trace_transport_path: nonpositive determinant along the path");
    path.step_det[k] = det;
    path.weight[k] = w;
    w *= det;
    // Travel distances use the unwrapped displacement; positions are
    // wrapped back into the torus on periodic grids.
    const Vec2 disp = phis[k].eval_displacement(x);
    path.step[k] = disp;
    Vec2 y = x + disp;
    if (phis[k].grid().periodic()) {
      y.x -= std::floor(y.x);
      y.y -= std::floor(y.y);
    }
    path.positions.push_back(y);
  }
  return path;
}

PathQp build_path_qp(const TransportPath& path, double u_a, double u_b,
                     double delta) {
  const int K = static_cast<int>(path.step_det.size());
  if (K < 2) throw std::invalid_argument("build_path_qp: K < 2");
  const double inv_delta = 1.0 / delta;
  PathQp qp;
  qp.h_diag.assign(K - 1, 0.0);
  qp.h_off.assign(K - 2, 0.0);
  qp.lin.assign(K - 1, 0.0);

  auto travel_sq = [&](int k) {  // |X_{k+1} - X_k|^2 via the unwrapped step
    return path.step[k].norm_sq();
  };

  for (int k = 1; k <= K - 1; ++k) {
    const double c_k = path.weight[k - 1];
    const double c_next = path.weight[k - 1] * path.step_det[k - 1];
    const double d_k = path.step_det[k - 1];
    qp.h_diag[k - 1] = 2.0 * inv_delta * (c_k * d_k * d_k + c_next);
    if (k <= K - 2) {
      const double d_next = path.step_det[k];
      qp.h_off[k - 1] = -2.0 * inv_delta * c_next * d_next;
    }
    qp.lin[k - 1] = c_next * travel_sq(k);
  }
  qp.lin[0] -= 2.0 * inv_delta * path.weight[0] * path.step_det[0] * u_a;
  qp.lin[K - 2] -=
      2.0 * inv_delta * path.weight[K - 1] * path.step_det[K - 1] * u_b;
  return qp;
}

double PathQp::value(const std::vector<double>& v) const {
  const int n = static_cast<int>(h_diag.size());
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    e += 0.5 * h_diag[i] * v[i] * v[i] + lin[i] * v[i];
    if (i < n - 1) e += h_off[i] * v[i] * v[i + 1];
  }
  return e;
}

std::vector<double> PathQp::gradient(const std::vector<double>& v) const {
  const int n = static_cast<int>(h_diag.size());
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    g[i] = h_diag[i] * v[i] + lin[i];
    if (i > 0) g[i] += h_off[i - 1] * v[i - 1];
    if (i < n - 1) g[i] += h_off[i] * v[i + 1];
  }
  return g;
}

namespace {

/// Thomas solve of the tridiagonal system H v = -b restricted to `free`
/// variables (others pinned at zero).
std::vector<double> solve_reduced(const PathQp& qp,
                                  const std::vector<bool>& fixed) {
  const int n = static_cast<int>(qp.h_diag.size());
  std::vector<double> v(n, 0.0);
  // Consecutive runs of free variables form independent tridiagonal systems.
  int i = 0;
  std::vector<double> diag, off, rhs;
  while (i < n) {
    if (fixed[i]) {
      ++i;
      continue;
    }
    int j = i;
    diag.clear();
    off.clear();
    rhs.clear();
    while (j < n && !fixed[j]) {
      diag.push_back(qp.h_diag[j]);
      rhs.push_back(-qp.lin[j]);
      if (j + 1 < n && !fixed[j + 1]) off.push_back(qp.h_off[j]);
      ++j;
    }
    const int m = static_cast<int>(diag.size());
    for (int r = 1; r < m; ++r) {
      const double f = off[r - 1] / diag[r - 1];
      diag[r] -= f * off[r - 1];
      rhs[r] -= f * rhs[r - 1];
    }
    v[i + m - 1] = rhs[m - 1] / diag[m - 1];
    for (int r = m - 2; r >= 0; --r)
      v[i + r] = (rhs[r] - off[r] * v[i + r + 1]) / diag[r];
    i = j;
  }
  return v;
}

}  // namespace

std::vector<double> solve_path_recursion(const PathQp& qp) {
  return solve_reduced(qp, std::vector<bool>(qp.h_diag.size(), false));
}

std::vector<double> solve_path_qp_nonnegative(const PathQp& qp) {
  const int n = static_cast<int>(qp.h_diag.size());
  std::vector<double> v = solve_reduced(qp, std::vector<bool>(n, false));
  bool feasible = true;
  for (double vi : v) feasible = feasible && vi >= 0.0;
  if (feasible) return v;

  for (double& vi : v) vi = std::max(vi, 0.0);
  constexpr double kKktTol = 1e-13;
  for (int round = 0; round < 200; ++round) {
    // Projected coordinate descent sweeps to identify the active set.
    for (int pass = 0; pass < 4; ++pass)
      for (int i = 0; i < n; ++i) {
        double g = qp.lin[i];
        if (i > 0) g += qp.h_off[i - 1] * v[i - 1];
        if (i < n - 1) g += qp.h_off[i] * v[i + 1];
        v[i] = std::max(0.0, -g / qp.h_diag[i]);
      }
    std::vector<bool> fixed(n, false);
    for (int i = 0; i < n; ++i) fixed[i] = v[i] <= 0.0;
    std::vector<double> exact = solve_reduced(qp, fixed);
    // KKT check: feasibility of free variables, nonnegative multipliers.
    const std::vector<double> g = qp.gradient(exact);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      if (fixed[i] && g[i] < -kKktTol) ok = false;
      if (!fixed[i] && exact[i] < -kKktTol) ok = false;
    }
    if (ok) {
      for (double& vi : exact) vi = std::max(vi, 0.0);
      return exact;
    }
    for (int i = 0; i < n; ++i) v[i] = std::max(exact[i], 0.0);
  }
  throw std::runtime_error("solve_path_qp_nonnegative: active set cycling");
}

std::vector<ImageField> pointwise_qp(const ImageField& u_a,
                                     const ImageField& u_b,
                                     const std::vector<Deformation>& phis,
                                     const ModelParams& params) {
  const Grid& grid = u_a.grid();
  if (u_b.grid() != grid)
    throw std::invalid_argument("pointwise_qp: grid mismatch");
  const int K = static_cast<int>(phis.size());
  if (K < 2) return {};

  std::vector<ImageField> out(K - 1, ImageField(grid));
  for (int dof = 0; dof < grid.dof_count(); ++dof) {
    const int node = grid.node_of_dof(dof);
    const Vec2 x = grid.node_position(node);
    const TransportPath path = trace_transport_path(phis, x);
    const PathQp qp = build_path_qp(path, u_a[node], u_b.eval(path.positions[K]),
                                    params.delta);
    const std::vector<double> v = solve_path_qp_nonnegative(qp);
    for (int k = 0; k < K - 1; ++k) out[k][node] = v[k];
  }
  for (ImageField& u : out) u.sync_periodic();
  return out;
}

}  // namespace otm
