#pragma once

#include <optional>
#include <span>
#include <vector>

#include "otm/dof.hpp"
#include "otm/mass_matrix.hpp"
#include "otm/model.hpp"
#include "otm/path.hpp"
#include "otm/pcg.hpp"

namespace otm {

/// Block tridiagonal normal equations for the interior images of a path with
/// fixed deformations Phi_1..Phi_K:
///   blocks  A_{k,k}   = M[(det D Phi_k)^2, Phi_k, Phi_k] + M[1, id, id]
///           A_{k,k-1} = -M[det D Phi_k, Phi_k, id]
///           A_{k,k+1} = -M[det D Phi_{k+1}, Phi_{k+1}, id]^T
///   rhs     R_k = -(delta/2) t_k  (+ boundary terms from U_0, U_K)
/// with t_k the lumped |Phi_{k+1} - id|^2 load. All blocks act on unique
/// image DOFs. Throws std::domain_error if any det D Phi_k <= 0 at a
/// quadrature point.
class ImageSystem {
 public:
  ImageSystem(const Grid& grid, const std::vector<Deformation>& phis,
              double delta);

  int K() const { return static_cast<int>(cross_.size()); }
  int block_size() const { return n_; }
  int unknowns() const { return (K() - 1) * n_; }

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& cross(int k) const { return cross_[k - 1]; }   // k=1..K
  const SparseMatrix& diag(int k) const { return diag_[k - 1]; }     // k=1..K-1
  const std::vector<double>& transport_load(int k) const {           // k=1..K-1
    return transport_load_[k - 1];
  }

  /// y = A x on the stacked interior unknowns.
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> rhs(std::span<const double> u_a,
                          std::span<const double> u_b) const;
  std::vector<double> inverse_diagonal() const;

  double delta() const { return delta_; }

 private:
  int n_;
  double delta_;
  SparseMatrix mass_;                     // M[1, id, id]
  std::vector<SparseMatrix> cross_;       // M[det_k, Phi_k, id], k=1..K
  std::vector<SparseMatrix> diag_;        // M[det_k^2, Phi_k, Phi_k], k=1..K-1
  std::vector<std::vector<double>> transport_load_;  // t_k, k=1..K-1
};

/// Interior images U_1..U_{K-1} minimizing the path energy for fixed
/// deformations; exact block solve by Jacobi-preconditioned CG. Warm-start
/// images (when given) seed the CG iteration, which keeps the quadratic
/// energy monotone across the call. Returns an empty vector for K = 1.
std::vector<ImageField> solve_image_system(
    const std::vector<Deformation>& phis, const ImageField& u_a,
    const ImageField& u_b, const ModelParams& params,
    const std::vector<ImageField>* warm_start = nullptr,
    PcgResult* stats = nullptr);

}  // namespace otm
