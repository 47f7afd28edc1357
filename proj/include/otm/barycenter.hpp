#pragma once

#include <vector>

#include "otm/geodesic.hpp"
#include "otm/path.hpp"

namespace otm {

struct BarycenterProblem {
  std::vector<ImageField> inputs;  // u^1..u^M
  std::vector<double> weights;     // lambda^m >= 0, sum = 1
  ModelParams params;

  int M() const { return static_cast<int>(inputs.size()); }
  void validate() const;
};

struct BarycenterSolution {
  ImageField barycenter;
  /// M paths running FROM the barycenter TO the inputs:
  /// paths[m].images.front() == barycenter, .back() == inputs[m].
  std::vector<DiscretePath> paths;
  EnergyBreakdown weighted_energy;
  std::vector<EnergyBreakdown> per_input_energy;  // unweighted path energies
  DescentLog log;
};

/// Exact joint solve of the coupled image system for fixed deformations:
/// the barycenter image plus all interior images of the weighted paths.
/// Zero-weight paths drop out of the barycenter equation and have their
/// interiors filled by the per-path solve afterwards. When clamp_nonnegative
/// is set, the barycenter image is projected to max(0, .) after the solve.
void barycenter_system_solve(
    const std::vector<std::vector<Deformation>>& deformations,
    const BarycenterProblem& problem, ImageField& barycenter,
    std::vector<std::vector<ImageField>>& interiors,
    bool clamp_nonnegative = false, PcgResult* stats = nullptr);

/// Alternating descent for the weighted barycenter with an optional
/// coarse-to-fine schedule in time (K doubling up to params.K).
BarycenterSolution barycenter_descent(const BarycenterProblem& problem,
                                      bool cascadic_in_time = true);

}  // namespace otm
