#pragma once

#include <optional>
#include <vector>

#include "otm/image_system.hpp"
#include "otm/ncg.hpp"
#include "otm/path.hpp"

namespace otm {

struct SweepRecord {
  int sweep = 0;
  double image_delta = 0.0;  // ||u^j - u^{j-1}||_{l^2} over the image stack
  EnergyBreakdown energy;
};

struct DescentLog {
  std::vector<SweepRecord> sweeps;
  bool stalled = false;
};

/// One pass of nonlinear CG over each matching deformation with the images
/// held fixed. The K subproblems decouple in time; with params.threads > 1
/// they run concurrently (results are identical either way). Returns true if
/// every subproblem hit its gradient tolerance; per-step line-search stalls
/// leave the current iterate in place.
bool optimize_deformations(DiscretePath& path, const ModelParams& params);

/// l^2 distance between two interior image stacks, area-weighted.
double image_stack_delta(const std::vector<ImageField>& a,
                         const std::vector<ImageField>& b);

struct GeodesicResult {
  DiscretePath path;
  DescentLog log;
};

/// Alternating descent between deformation optimization and the exact
/// interior image solve. Default initialization: identity deformations and
/// images from solve_image_system at the identity.
GeodesicResult alternating_descent(
    const ImageField& u_a, const ImageField& u_b, const ModelParams& params,
    const DiscretePath* init = nullptr);

struct CascadicStage {
  int level = 0;
  int K = 2;
  int sweeps = 15;
};

struct CascadicSchedule {
  std::vector<CascadicStage> stages;
  void validate() const;

  /// K doubling 2,4,...,K_final at a fixed grid level.
  static CascadicSchedule k_doubling(int level, int k_final, int sweeps = 15);
};

struct StageLog {
  CascadicStage stage;
  DescentLog log;
};

struct CascadicResult {
  DiscretePath path;
  std::vector<StageLog> stages;
};

/// Coarse-to-fine driver: endpoints are restricted per stage from the finest
/// inputs, images/deformations are prolongated between spatial levels, and a
/// K-doubling inserts intensity-midpoint images with deformations restarted
/// from the identity.
CascadicResult cascadic_solve(const ImageField& u_a, const ImageField& u_b,
                              const CascadicSchedule& schedule,
                              const ModelParams& params);

}  // namespace otm
