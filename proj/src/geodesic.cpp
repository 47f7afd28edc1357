#include "otm/geodesic.hpp"

#include <cmath>
#include <future>
#include <stdexcept>

#include "otm/dof.hpp"

namespace otm {

namespace {

void check_endpoints(const ImageField& u_a, const ImageField& u_b) {
  if (u_a.grid() != u_b.grid())
    throw std::invalid_argument("geodesic: endpoint grid mismatch");
  for (double v : u_a.values())
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("geodesic: u_A must be finite and >= 0");
  for (double v : u_b.values())
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("geodesic: u_B must be finite and >= 0");
}

NcgResult optimize_single_deformation(const ImageField& u_prev,
                                      const ImageField& u_next,
                                      Deformation& phi,
                                      const ModelParams& params) {
  const DeformationDofMap dof(phi.grid());
  Deformation scratch = phi;

  const EnergyFn energy = [&](const std::vector<double>& x) {
    dof.unpack(x, scratch);
    return matching_energy(u_prev, u_next, scratch, params.delta, params.gamma,
                           params.elastic)
        .total();
  };
  const GradientFn gradient = [&](const std::vector<double>& x) {
    dof.unpack(x, scratch);
    return dof.gather_gradient(matching_gradient_deformation(
        u_prev, u_next, scratch, params.delta, params.gamma, params.elastic));
  };

  NcgOptions opt;
  opt.grad_tol = params.tol.ncg_grad_tol;
  opt.max_iters = params.tol.ncg_max_iters;

  std::vector<double> x = dof.pack(phi);
  const NcgResult result = ncg_minimize(energy, gradient, x, opt);
  dof.unpack(x, phi);
  return result;
}

}  // namespace

bool optimize_deformations(DiscretePath& path, const ModelParams& params) {
  const int K = path.K();
  std::vector<NcgResult> results(K);
  if (params.threads > 1 && K > 1) {
    std::vector<std::future<NcgResult>> futures;
    futures.reserve(K);
    for (int k = 0; k < K; ++k)
      futures.push_back(std::async(std::launch::async, [&, k] {
        return optimize_single_deformation(path.images[k], path.images[k + 1],
                                           path.deformations[k], params);
      }));
    for (int k = 0; k < K; ++k) results[k] = futures[k].get();
  } else {
    for (int k = 0; k < K; ++k)
      results[k] = optimize_single_deformation(
          path.images[k], path.images[k + 1], path.deformations[k], params);
  }
  bool all_converged = true;
  for (const NcgResult& r : results) all_converged = all_converged && r.converged;
  return all_converged;
}

double image_stack_delta(const std::vector<ImageField>& a,
                         const std::vector<ImageField>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("image_stack_delta: stack size mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Grid& grid = a[k].grid();
    const double area = grid.cell_width() * grid.cell_width();
    for (int dof = 0; dof < grid.dof_count(); ++dof) {
      const int node = grid.node_of_dof(dof);
      const double d = a[k][node] - b[k][node];
      sum += area * d * d;
    }
  }
  return std::sqrt(sum);
}

GeodesicResult alternating_descent(const ImageField& u_a,
                                   const ImageField& u_b,
                                   const ModelParams& params,
                                   const DiscretePath* init) {
  params.validate();
  check_endpoints(u_a, u_b);
  const int K = params.K;

  GeodesicResult out;
  DiscretePath& path = out.path;
  if (init != nullptr) {
    if (init->K() != K || init->grid() != u_a.grid())
      throw std::invalid_argument("alternating_descent: init shape mismatch");
    path = *init;
    path.images.front() = u_a;
    path.images.back() = u_b;
  } else {
    path.deformations.assign(K, Deformation(u_a.grid()));
    path.images.clear();
    path.images.push_back(u_a);
    std::vector<ImageField> interior =
        solve_image_system(path.deformations, u_a, u_b, params);
    for (ImageField& u : interior) path.images.push_back(std::move(u));
    path.images.push_back(u_b);
  }

  std::vector<ImageField> previous(path.images.begin() + 1,
                                   path.images.end() - 1);
  for (int sweep = 1; sweep <= params.tol.outer_max_sweeps; ++sweep) {
    optimize_deformations(path, params);

    if (K >= 2) {
      std::vector<ImageField> interior =
          solve_image_system(path.deformations, u_a, u_b, params, &previous);
      for (int k = 0; k < K - 1; ++k) path.images[k + 1] = interior[k];
    }
    std::vector<ImageField> current(path.images.begin() + 1,
                                    path.images.end() - 1);
    const double delta = image_stack_delta(current, previous);
    previous = std::move(current);

    SweepRecord rec;
    rec.sweep = sweep;
    rec.image_delta = delta;
    rec.energy = path_energy(path, params);
    out.log.sweeps.push_back(rec);

    if (delta < params.tol.outer_stall_tol) return out;
  }
  out.log.stalled = true;
  return out;
}

void CascadicSchedule::validate() const {
  if (stages.empty())
    throw std::invalid_argument("CascadicSchedule: empty schedule");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].K < 1 || stages[i].sweeps < 1 || stages[i].level < 0)
      throw std::invalid_argument("CascadicSchedule: invalid stage");
    if (i > 0) {
      if (stages[i].level < stages[i - 1].level ||
          stages[i].K < stages[i - 1].K)
        throw std::invalid_argument(
            "CascadicSchedule: levels and K must be nondecreasing");
      if (stages[i].K != stages[i - 1].K && stages[i].K != 2 * stages[i - 1].K)
        throw std::invalid_argument(
            "CascadicSchedule: K may only stay or double per stage");
    }
  }
}

CascadicSchedule CascadicSchedule::k_doubling(int level, int k_final,
                                              int sweeps) {
  CascadicSchedule s;
  for (int k = 2; k <= k_final; k *= 2) s.stages.push_back({level, k, sweeps});
  if (s.stages.empty() || s.stages.back().K != k_final)
    throw std::invalid_argument("k_doubling: K must be a power of two >= 2");
  return s;
}

namespace {

DiscretePath refine_in_time(const DiscretePath& path) {
  DiscretePath out;
  const int K = path.K();
  out.images.reserve(2 * K + 1);
  for (int k = 0; k < K; ++k) {
    out.images.push_back(path.images[k]);
    ImageField mid = path.images[k];
    for (int node = 0; node < mid.grid().node_count(); ++node)
      mid[node] = 0.5 * (path.images[k][node] + path.images[k + 1][node]);
    out.images.push_back(std::move(mid));
  }
  out.images.push_back(path.images.back());
  out.deformations.assign(2 * K, Deformation(path.grid()));
  return out;
}

DiscretePath prolongate_path(const DiscretePath& path, const Grid& fine) {
  DiscretePath out;
  for (const ImageField& u : path.images)
    out.images.push_back(prolongate(u, fine));
  for (const Deformation& phi : path.deformations)
    out.deformations.push_back(prolongate(phi, fine));
  return out;
}

}  // namespace

CascadicResult cascadic_solve(const ImageField& u_a, const ImageField& u_b,
                              const CascadicSchedule& schedule,
                              const ModelParams& params) {
  schedule.validate();
  check_endpoints(u_a, u_b);
  const Grid& fine_grid = u_a.grid();
  if (schedule.stages.back().level > fine_grid.level())
    throw std::invalid_argument(
        "cascadic_solve: schedule exceeds the endpoint grid level");

  CascadicResult out;
  std::optional<DiscretePath> path;

  for (std::size_t s = 0; s < schedule.stages.size(); ++s) {
    const CascadicStage stage = schedule.stages[s];
    const Grid stage_grid(stage.level, fine_grid.boundary());
    const ImageField a = stage.level == fine_grid.level()
                             ? u_a
                             : restrict_to(u_a, stage_grid);
    const ImageField b = stage.level == fine_grid.level()
                             ? u_b
                             : restrict_to(u_b, stage_grid);

    if (path.has_value()) {
      while (path->grid().level() < stage.level) {
        const Grid next(path->grid().level() + 1, fine_grid.boundary());
        *path = prolongate_path(*path, next);
      }
      if (stage.K == 2 * path->K()) *path = refine_in_time(*path);
      path->images.front() = a;
      path->images.back() = b;
    }

    ModelParams stage_params = params;
    stage_params.K = stage.K;
    stage_params.tol.outer_max_sweeps = stage.sweeps;
    GeodesicResult stage_result = alternating_descent(
        a, b, stage_params, path.has_value() ? &*path : nullptr);
    path = std::move(stage_result.path);
    out.stages.push_back({stage, std::move(stage_result.log)});
  }
  out.path = std::move(*path);
  return out;
}

}  // namespace otm
