#pragma once

#include <vector>

#include "otm/field.hpp"
#include "otm/matching.hpp"
#include "otm/model.hpp"

namespace otm {

/// A discrete path: K+1 images and the K matching deformations between them.
/// images.front() and images.back() stay pinned to the endpoint inputs.
struct DiscretePath {
  std::vector<ImageField> images;       // U_0 .. U_K
  std::vector<Deformation> deformations;  // Phi_1 .. Phi_K
  std::vector<EnergyBreakdown> step_energies;

  int K() const { return static_cast<int>(deformations.size()); }
  const Grid& grid() const { return images.front().grid(); }

  /// Constant path at u with identity deformations.
  static DiscretePath constant(const ImageField& u, int K) {
    DiscretePath p;
    p.images.assign(K + 1, u);
    p.deformations.assign(K, Deformation(u.grid()));
    return p;
  }
};

/// Aggregated path energy K * sum_k F[U_{k-1}, U_k, Phi_k], channel-wise.
EnergyBreakdown path_energy(DiscretePath& path, const ModelParams& params);
EnergyBreakdown path_energy_const(const DiscretePath& path,
                                  const ModelParams& params);

}  // namespace otm
