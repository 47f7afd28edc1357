#include "otm/path.hpp"

namespace otm {

EnergyBreakdown path_energy_const(const DiscretePath& path,
                                  const ModelParams& params) {
  EnergyBreakdown total;
  const int K = path.K();
  for (int k = 1; k <= K; ++k) {
    const EnergyBreakdown step =
        matching_energy(path.images[k - 1], path.images[k],
                        path.deformations[k - 1], params.delta, params.gamma,
                        params.elastic);
    if (!step.finite) return EnergyBreakdown::infinite();
    total += step;
  }
  total *= static_cast<double>(K);
  return total;
}

EnergyBreakdown path_energy(DiscretePath& path, const ModelParams& params) {
  EnergyBreakdown total;
  const int K = path.K();
  path.step_energies.assign(K, EnergyBreakdown{});
  for (int k = 1; k <= K; ++k) {
    const EnergyBreakdown step =
        matching_energy(path.images[k - 1], path.images[k],
                        path.deformations[k - 1], params.delta, params.gamma,
                        params.elastic);
    path.step_energies[k - 1] = step;
    if (!step.finite) return EnergyBreakdown::infinite();
    total += step;
  }
  total *= static_cast<double>(K);
  return total;
}

}  // namespace otm
