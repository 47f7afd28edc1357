#include "otm/barycenter.hpp"

#include <cmath>
#include <future>
#include <memory>
#include <stdexcept>

#include "otm/dof.hpp"
#include "otm/image_system.hpp"

namespace otm {

void BarycenterProblem::validate() const {
  params.validate();
  if (inputs.empty()) throw std::invalid_argument("barycenter: no inputs");
  if (weights.size() != inputs.size())
    throw std::invalid_argument("barycenter: weight count mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("barycenter: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("barycenter: weights must sum to 1");
  for (const ImageField& u : inputs) {
    if (u.grid() != inputs.front().grid())
      throw std::invalid_argument("barycenter: inputs on different grids");
    for (double v : u.values())
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("barycenter: inputs must be >= 0");
  }
}

namespace {

struct JointSystem {
  int n = 0;                 // image DOFs per block
  int K = 1;
  std::vector<int> active;   // indices of paths with positive weight
  std::vector<double> lam;   // weights of active paths
  std::vector<std::unique_ptr<ImageSystem>> blocks;  // per active path
  std::vector<std::vector<double>> first_load;       // t_0^m per active path
  const SparseMatrix* mass = nullptr;

  int unknowns() const {
    return n + static_cast<int>(active.size()) * (K - 1) * n;
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    const auto x_lambda = x.subspan(0, n);
    auto y_lambda = y.subspan(0, n);
    std::vector<double> tmp(n);
    for (std::size_t a = 0; a < active.size(); ++a) {
      const ImageSystem& sys = *blocks[a];
      const double w = lam[a];
      // Barycenter row: lambda^m (M0 x_lambda - M_1^T x_1).
      sys.mass().multiply(x_lambda, tmp);
      for (int i = 0; i < n; ++i) y_lambda[i] += w * tmp[i];
      if (K >= 2) {
        const auto x_path = x.subspan(n + a * (K - 1) * n, (K - 1) * n);
        auto y_path = y.subspan(n + a * (K - 1) * n, (K - 1) * n);
        sys.cross(1).multiply_transposed(x_path.subspan(0, n), tmp);
        for (int i = 0; i < n; ++i) y_lambda[i] -= w * tmp[i];
        // Interior rows: the per-path block operator plus the coupling
        // -M_1 x_lambda in row k=1, all scaled by lambda^m.
        sys.apply(x_path, y_path);
        sys.cross(1).multiply(x_lambda, tmp);
        for (int i = 0; i < n; ++i) y_path[i] -= tmp[i];
        for (double& v : y_path) v *= w;
      }
    }
  }

  std::vector<double> rhs(const std::vector<std::vector<double>>& inputs_dof,
                          double delta) const {
    std::vector<double> r(unknowns(), 0.0);
    const double half_delta = 0.5 * delta;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const ImageSystem& sys = *blocks[a];
      const double w = lam[a];
      for (int i = 0; i < n; ++i) r[i] -= w * half_delta * first_load[a][i];
      if (K >= 2) {
        auto r_path = std::span<double>(r).subspan(n + a * (K - 1) * n, (K - 1) * n);
        for (int k = 1; k <= K - 1; ++k)
          for (int i = 0; i < n; ++i)
            r_path[(k - 1) * n + i] -= half_delta * sys.transport_load(k)[i];
        sys.cross(K).multiply_add_transposed(
            1.0, inputs_dof[active[a]], r_path.subspan((K - 2) * n, n));
        for (double& v : r_path) v *= w;
      } else {
        sys.cross(1).multiply_add_transposed(w, inputs_dof[active[a]],
                                             std::span<double>(r).subspan(0, n));
      }
    }
    return r;
  }

  std::vector<double> inverse_diagonal() const {
    std::vector<double> inv(unknowns(), 0.0);
    std::vector<double> acc(n, 0.0);
    const std::vector<double> mass_diag = mass->diagonal();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (int i = 0; i < n; ++i) acc[i] += lam[a] * mass_diag[i];
      if (K >= 2) {
        for (int k = 1; k <= K - 1; ++k) {
          const std::vector<double> d = blocks[a]->diag(k).diagonal();
          for (int i = 0; i < n; ++i)
            inv[n + a * (K - 1) * n + (k - 1) * n + i] =
                1.0 / (lam[a] * (d[i] + mass_diag[i]));
        }
      }
    }
    for (int i = 0; i < n; ++i) inv[i] = 1.0 / acc[i];
    return inv;
  }
};

std::vector<double> first_transport_load(const Grid& grid,
                                         const Deformation& phi1) {
  return lumped_weight_vector(grid, displacement_sq_weights(phi1));
}

}  // namespace

void barycenter_system_solve(
    const std::vector<std::vector<Deformation>>& deformations,
    const BarycenterProblem& problem, ImageField& barycenter,
    std::vector<std::vector<ImageField>>& interiors, bool clamp_nonnegative,
    PcgResult* stats) {
  problem.validate();
  const Grid& grid = problem.inputs.front().grid();
  const int M = problem.M();
  const int K = problem.params.K;
  if (static_cast<int>(deformations.size()) != M)
    throw std::invalid_argument("barycenter_system_solve: path count mismatch");

  JointSystem joint;
  joint.n = grid.dof_count();
  joint.K = K;
  for (int m = 0; m < M; ++m) {
    if (static_cast<int>(deformations[m].size()) != K)
      throw std::invalid_argument("barycenter_system_solve: K mismatch");
    if (problem.weights[m] > 0.0) {
      joint.active.push_back(m);
      joint.lam.push_back(problem.weights[m]);
      joint.blocks.push_back(std::make_unique<ImageSystem>(
          grid, deformations[m], problem.params.delta));
      joint.first_load.push_back(
          first_transport_load(grid, deformations[m][0]));
    }
  }
  if (joint.active.empty())
    throw std::invalid_argument("barycenter_system_solve: all weights zero");
  joint.mass = &joint.blocks.front()->mass();

  const ImageDofMap dof(grid);
  std::vector<std::vector<double>> inputs_dof;
  for (const ImageField& u : problem.inputs) inputs_dof.push_back(dof.pack(u));

  const std::vector<double> rhs = joint.rhs(inputs_dof, problem.params.delta);
  std::vector<double> x(joint.unknowns(), 0.0);
  // Warm start from the caller's current iterates.
  if (barycenter.grid() == grid) {
    const std::vector<double> b0 = dof.pack(barycenter);
    std::copy(b0.begin(), b0.end(), x.begin());
  }
  if (static_cast<int>(interiors.size()) == M && K >= 2) {
    for (std::size_t a = 0; a < joint.active.size(); ++a) {
      const auto& path_interiors = interiors[joint.active[a]];
      if (static_cast<int>(path_interiors.size()) == K - 1)
        for (int k = 0; k < K - 1; ++k) {
          const std::vector<double> v = dof.pack(path_interiors[k]);
          std::copy(v.begin(), v.end(),
                    x.begin() + joint.n + a * (K - 1) * joint.n + k * joint.n);
        }
    }
  }

  const std::vector<double> inv_diag = joint.inverse_diagonal();
  const PcgResult result = pcg_solve(
      [&](std::span<const double> in, std::span<double> out) {
        joint.apply(in, out);
      },
      inv_diag, rhs, x, problem.params.tol.pcg_rel_tol,
      problem.params.tol.pcg_max_iters);
  if (stats != nullptr) *stats = result;
  if (!result.converged)
    throw PcgError("barycenter_system_solve: PCG did not converge",
                   result.relative_residual);

  barycenter = ImageField(grid);
  dof.unpack(std::vector<double>(x.begin(), x.begin() + joint.n), barycenter);
  if (clamp_nonnegative)
    for (double& v : barycenter.values()) v = std::max(v, 0.0);

  interiors.assign(M, {});
  for (std::size_t a = 0; a < joint.active.size(); ++a) {
    auto& path_interiors = interiors[joint.active[a]];
    for (int k = 0; k < K - 1; ++k) {
      ImageField u(grid);
      dof.unpack(
          std::vector<double>(
              x.begin() + joint.n + a * (K - 1) * joint.n + k * joint.n,
              x.begin() + joint.n + a * (K - 1) * joint.n + (k + 1) * joint.n),
          u);
      path_interiors.push_back(std::move(u));
    }
  }
  // Zero-weight paths: interiors from the ordinary per-path solve; they do
  // not feed back into the barycenter image.
  for (int m = 0; m < M; ++m) {
    if (problem.weights[m] > 0.0 || K < 2) continue;
    interiors[m] = solve_image_system(deformations[m], barycenter,
                                      problem.inputs[m], problem.params);
  }
}

namespace {

double barycenter_stack_delta(const ImageField& b0, const ImageField& b1,
                              const std::vector<std::vector<ImageField>>& i0,
                              const std::vector<std::vector<ImageField>>& i1) {
  std::vector<ImageField> a{b0}, b{b1};
  for (std::size_t m = 0; m < i0.size(); ++m) {
    a.insert(a.end(), i0[m].begin(), i0[m].end());
    b.insert(b.end(), i1[m].begin(), i1[m].end());
  }
  return image_stack_delta(a, b);
}

}  // namespace

BarycenterSolution barycenter_descent(const BarycenterProblem& problem,
                                      bool cascadic_in_time) {
  problem.validate();
  const Grid& grid = problem.inputs.front().grid();
  const int M = problem.M();

  std::vector<int> k_stages;
  if (cascadic_in_time) {
    for (int k = 2; k < problem.params.K; k *= 2) k_stages.push_back(k);
  }
  k_stages.push_back(problem.params.K);

  BarycenterSolution out{ImageField(grid), {}, {}, {}, {}};
  std::vector<std::vector<Deformation>> deformations;
  std::vector<std::vector<ImageField>> interiors;

  for (std::size_t stage = 0; stage < k_stages.size(); ++stage) {
    const int K = k_stages[stage];
    BarycenterProblem stage_problem = problem;
    stage_problem.params.K = K;

    if (stage == 0) {
      deformations.assign(M, std::vector<Deformation>(K, Deformation(grid)));
      interiors.clear();
      barycenter_system_solve(deformations, stage_problem, out.barycenter,
                              interiors);
    } else {
      // Refine in time: midpoint images, deformations restart from identity.
      const int K_prev = k_stages[stage - 1];
      deformations.assign(M, std::vector<Deformation>(K, Deformation(grid)));
      std::vector<std::vector<ImageField>> refined(M);
      for (int m = 0; m < M; ++m) {
        std::vector<ImageField> stack;
        stack.push_back(out.barycenter);
        for (auto& u : interiors[m]) stack.push_back(u);
        stack.push_back(problem.inputs[m]);
        for (int k = 0; k < K_prev; ++k) {
          if (k > 0) refined[m].push_back(stack[k]);
          ImageField mid(grid);
          for (int node = 0; node < grid.node_count(); ++node)
            mid[node] = 0.5 * (stack[k][node] + stack[k + 1][node]);
          refined[m].push_back(std::move(mid));
        }
      }
      interiors = std::move(refined);
    }

    auto weighted_energy = [&]() {
      EnergyBreakdown total;
      for (int m = 0; m < M; ++m) {
        if (problem.weights[m] <= 0.0) continue;
        EnergyBreakdown path_total;
        const ImageField* prev = &out.barycenter;
        for (int k = 0; k < K; ++k) {
          const ImageField* next =
              k == K - 1 ? &problem.inputs[m] : &interiors[m][k];
          path_total += matching_energy(*prev, *next, deformations[m][k],
                                        problem.params.delta,
                                        problem.params.gamma,
                                        problem.params.elastic);
          prev = next;
        }
        path_total *= static_cast<double>(K) * problem.weights[m];
        total += path_total;
      }
      return total;
    };

    for (int sweep = 1; sweep <= problem.params.tol.outer_max_sweeps; ++sweep) {
      // Deformation half-sweep: M*K independent subproblems.
      for (int m = 0; m < M; ++m) {
        if (problem.weights[m] <= 0.0) continue;
        DiscretePath path;
        path.images.push_back(out.barycenter);
        for (auto& u : interiors[m]) path.images.push_back(u);
        path.images.push_back(problem.inputs[m]);
        path.deformations = deformations[m];
        optimize_deformations(path, stage_problem.params);
        deformations[m] = std::move(path.deformations);
      }

      const ImageField prev_barycenter = out.barycenter;
      const std::vector<std::vector<ImageField>> prev_interiors = interiors;
      barycenter_system_solve(deformations, stage_problem, out.barycenter,
                              interiors);
      const double delta = barycenter_stack_delta(
          prev_barycenter, out.barycenter, prev_interiors, interiors);

      SweepRecord rec;
      rec.sweep = static_cast<int>(out.log.sweeps.size()) + 1;
      rec.image_delta = delta;
      rec.energy = weighted_energy();
      out.log.sweeps.push_back(rec);
      if (delta < problem.params.tol.outer_stall_tol) break;
      if (sweep == problem.params.tol.outer_max_sweeps) out.log.stalled = true;
    }
  }

  // Assemble the returned paths and energies.
  out.paths.clear();
  out.per_input_energy.clear();
  EnergyBreakdown weighted;
  for (int m = 0; m < M; ++m) {
    DiscretePath path;
    path.images.push_back(out.barycenter);
    for (auto& u : interiors[m]) path.images.push_back(u);
    path.images.push_back(problem.inputs[m]);
    path.deformations = deformations[m];
    EnergyBreakdown e = path_energy(path, problem.params);
    out.per_input_energy.push_back(e);
    e *= problem.weights[m];
    weighted += e;
    out.paths.push_back(std::move(path));
  }
  out.weighted_energy = weighted;
  return out;
}

}  // namespace otm
