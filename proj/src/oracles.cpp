#include "otm/oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace otm {
namespace oracles {

double DenseSystem::symmetry_gap() const {
  double gap = 0.0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      gap = std::max(gap, std::abs(at(r, c) - at(c, r)));
  return gap;
}

std::vector<double> dense_solve(const DenseSystem& system) {
  const int n = system.n;
  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd b(n);
  for (int r = 0; r < n; ++r) {
    b(r) = system.rhs[r];
    for (int c = 0; c < n; ++c) a(r, c) = system.at(r, c);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot <= 1e-14)
    throw std::domain_error("dense_solve: singular matrix");
  const Eigen::VectorXd x = lu.solve(b);
  return std::vector<double>(x.data(), x.data() + n);
}

std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& functional,
    const std::vector<double>& point, double step) {
  std::vector<double> grad(point.size());
  std::vector<double> p = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    p[i] = point[i] + step;
    const double plus = functional(p);
    p[i] = point[i] - step;
    const double minus = functional(p);
    p[i] = point[i];
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw std::domain_error("fd_gradient: infinite energy in neighborhood");
    grad[i] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

std::vector<double> brute_force_qp(int n, const std::vector<double>& hessian,
                                   const std::vector<double>& linear) {
  if (n < 1 || n > 4)
    throw std::invalid_argument("brute_force_qp: n must be in [1,4]");
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd b(n);
  for (int r = 0; r < n; ++r) {
    b(r) = linear[r];
    for (int c = 0; c < n; ++c) h(r, c) = hessian[r * n + c];
  }
  {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument("brute_force_qp: Hessian not PSD");
  }

  constexpr double kTol = 1e-12;
  double best_value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;
  bool found = false;
  for (int mask = 0; mask < (1 << n); ++mask) {
    // Bit set => variable pinned to zero (active constraint).
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
      if (!(mask & (1 << i))) free_idx.push_back(i);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    if (!free_idx.empty()) {
      const int m = static_cast<int>(free_idx.size());
      Eigen::MatrixXd hf(m, m);
      Eigen::VectorXd bf(m);
      for (int r = 0; r < m; ++r) {
        bf(r) = -b(free_idx[r]);
        for (int c = 0; c < m; ++c) hf(r, c) = h(free_idx[r], free_idx[c]);
      }
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(hf);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd vf = lu.solve(bf);
      for (int r = 0; r < m; ++r) v(free_idx[r]) = vf(r);
    }
    bool feasible = true;
    for (int i = 0; i < n; ++i) feasible = feasible && v(i) >= -kTol;
    if (!feasible) continue;
    const Eigen::VectorXd g = h * v + b;  // multipliers on the active set
    bool kkt = true;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) kkt = kkt && g(i) >= -kTol;
    if (!kkt) continue;
    const double value = 0.5 * v.dot(h * v) + b.dot(v);
    if (value < best_value) {
      best_value = value;
      best = v;
      found = true;
    }
  }
  if (!found)
    throw std::runtime_error("brute_force_qp: no feasible KKT point");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(best(i), 0.0);
  return out;
}

}  // namespace oracles
}  // namespace otm
