#include "otm/image_system.hpp"

#include <stdexcept>

namespace otm {

ImageSystem::ImageSystem(const Grid& grid,
                         const std::vector<Deformation>& phis, double delta)
    : n_(grid.dof_count()), delta_(delta) {
  if (phis.empty()) throw std::invalid_argument("ImageSystem: no deformations");
  const int K = static_cast<int>(phis.size());
  mass_ = assemble_mass_matrix(grid, unit_weights(grid), nullptr, nullptr);
  cross_.reserve(K);
  for (int k = 1; k <= K; ++k) {
    if (phis[k - 1].grid() != grid)
      throw std::invalid_argument("ImageSystem: grid mismatch");
    QuadWeights det = jacobian_det_weights(phis[k - 1], 1);
    for (double d : det)
      if (d <= kDetFloor)
        throw std::domain_error(
            "ImageSystem: deformation with nonpositive Jacobian determinant");
    cross_.push_back(
        assemble_mass_matrix(grid, det, &phis[k - 1], nullptr));
    if (k <= K - 1) {
      for (double& d : det) d *= d;
      diag_.push_back(
          assemble_mass_matrix(grid, det, &phis[k - 1], &phis[k - 1]));
      transport_load_.push_back(
          lumped_weight_vector(grid, displacement_sq_weights(phis[k])));
    }
  }
}

void ImageSystem::apply(std::span<const double> x, std::span<double> y) const {
  const int K = this->K();
  std::vector<double> tmp(n_);
  for (int k = 1; k <= K - 1; ++k) {
    auto yk = y.subspan((k - 1) * n_, n_);
    auto xk = x.subspan((k - 1) * n_, n_);
    diag_[k - 1].multiply(xk, yk);
    mass_.multiply_add(1.0, xk, yk);
    if (k > 1) cross_[k - 1].multiply_add(-1.0, x.subspan((k - 2) * n_, n_), yk);
    if (k < K - 1)
      cross_[k].multiply_add_transposed(-1.0, x.subspan(k * n_, n_), yk);
  }
}

std::vector<double> ImageSystem::rhs(std::span<const double> u_a,
                                     std::span<const double> u_b) const {
  const int K = this->K();
  std::vector<double> r(unknowns(), 0.0);
  const double half_delta = 0.5 * delta_;
  for (int k = 1; k <= K - 1; ++k)
    for (int i = 0; i < n_; ++i)
      r[(k - 1) * n_ + i] = -half_delta * transport_load_[k - 1][i];
  cross_[0].multiply_add(1.0, u_a, std::span<double>(r).subspan(0, n_));
  cross_[K - 1].multiply_add_transposed(
      1.0, u_b, std::span<double>(r).subspan((K - 2) * n_, n_));
  return r;
}

std::vector<double> ImageSystem::inverse_diagonal() const {
  const int K = this->K();
  std::vector<double> inv(unknowns());
  const std::vector<double> mass_diag = mass_.diagonal();
  for (int k = 1; k <= K - 1; ++k) {
    std::vector<double> d = diag_[k - 1].diagonal();
    for (int i = 0; i < n_; ++i) inv[(k - 1) * n_ + i] = 1.0 / (d[i] + mass_diag[i]);
  }
  return inv;
}

std::vector<ImageField> solve_image_system(
    const std::vector<Deformation>& phis, const ImageField& u_a,
    const ImageField& u_b, const ModelParams& params,
    const std::vector<ImageField>* warm_start, PcgResult* stats) {
  const Grid& grid = u_a.grid();
  if (u_b.grid() != grid)
    throw std::invalid_argument("solve_image_system: endpoint grid mismatch");
  const int K = static_cast<int>(phis.size());
  if (K == 1) return {};

  const ImageSystem system(grid, phis, params.delta);
  const ImageDofMap dof(grid);

  const std::vector<double> rhs =
      system.rhs(dof.pack(u_a), dof.pack(u_b));
  std::vector<double> x(system.unknowns(), 0.0);
  if (warm_start != nullptr &&
      static_cast<int>(warm_start->size()) == K - 1) {
    for (int k = 0; k < K - 1; ++k) {
      const std::vector<double> xv = dof.pack((*warm_start)[k]);
      std::copy(xv.begin(), xv.end(), x.begin() + k * system.block_size());
    }
  }

  const std::vector<double> inv_diag = system.inverse_diagonal();
  const PcgResult result = pcg_solve(
      [&](std::span<const double> in, std::span<double> out) {
        system.apply(in, out);
      },
      inv_diag, rhs, x, params.tol.pcg_rel_tol, params.tol.pcg_max_iters);
  if (stats != nullptr) *stats = result;
  if (!result.converged)
    throw PcgError("solve_image_system: PCG did not converge",
                   result.relative_residual);

  std::vector<ImageField> images;
  images.reserve(K - 1);
  for (int k = 0; k < K - 1; ++k) {
    ImageField u(grid);
    dof.unpack(std::vector<double>(x.begin() + k * system.block_size(),
                                   x.begin() + (k + 1) * system.block_size()),
               u);
    images.push_back(std::move(u));
  }
  return images;
}

}  // namespace otm
