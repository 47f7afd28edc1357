#include "otm/runs.hpp"

#include <cinttypes>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <random>

#include "otm/barycenter.hpp"
#include "otm/bb.hpp"
#include "otm/consistency.hpp"
#include "otm/geodesic.hpp"
#include "otm/image_io.hpp"
#include "otm/oracles.hpp"
#include "otm/pointwise_qp.hpp"
#include "otm/synth.hpp"

namespace otm {

double image_mass(const ImageField& u) {
  const CellQuadrature quad(u.grid());
  std::vector<double> partial(quad.cell_count(), 0.0);
  for (int cell = 0; cell < quad.cell_count(); ++cell) {
    const auto nodes = quad.cell_nodes(cell);
    double acc = 0.0;
    for (int q = 0; q < QuadratureRule::kPoints; ++q) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += quad.rule.shape[q][a] * u[nodes[a]];
      acc += quad.world_weight(q) * v;
    }
    partial[cell] = acc;
  }
  return pairwise_sum(partial);
}

Vec2 image_center_of_mass(const ImageField& u) {
  const CellQuadrature quad(u.grid());
  double mass = 0.0, mx = 0.0, my = 0.0;
  for (int cell = 0; cell < quad.cell_count(); ++cell) {
    const auto nodes = quad.cell_nodes(cell);
    for (int q = 0; q < QuadratureRule::kPoints; ++q) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += quad.rule.shape[q][a] * u[nodes[a]];
      const double w = quad.world_weight(q) * v;
      const Vec2 x = quad.world_point(cell, q);
      mass += w;
      mx += w * x.x;
      my += w * x.y;
    }
  }
  if (mass <= 0.0) return {0.5, 0.5};
  return {mx / mass, my / mass};
}

int count_components_above(const ImageField& u, double threshold) {
  const Grid& grid = u.grid();
  const int n = grid.nodes_per_side();
  const int m = grid.periodic() ? n - 1 : n;
  auto value_at = [&](int ix, int iy) {
    return u[grid.node_index(ix % n, iy % n)];
  };
  std::vector<char> visited(static_cast<std::size_t>(m) * m, 0);
  auto idx = [&](int ix, int iy) { return iy * m + ix; };
  int components = 0;
  for (int iy = 0; iy < m; ++iy)
    for (int ix = 0; ix < m; ++ix) {
      if (visited[idx(ix, iy)] || value_at(ix, iy) <= threshold) continue;
      ++components;
      std::deque<std::pair<int, int>> queue{{ix, iy}};
      visited[idx(ix, iy)] = 1;
      while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& d : nbr) {
          int nx = cx + d[0], ny = cy + d[1];
          if (grid.periodic()) {
            nx = (nx + m) % m;
            ny = (ny + m) % m;
          } else if (nx < 0 || ny < 0 || nx >= m || ny >= m) {
            continue;
          }
          if (!visited[idx(nx, ny)] && value_at(nx, ny) > threshold) {
            visited[idx(nx, ny)] = 1;
            queue.emplace_back(nx, ny);
          }
        }
      }
    }
  return components;
}

namespace {

namespace fs = std::filesystem;

/// Output directory staging: everything is written into a temporary sibling
/// directory which is renamed into place on success.
class StagedOutput {
 public:
  StagedOutput(const fs::path& target, bool overwrite)
      : target_(target), overwrite_(overwrite) {
    if (fs::exists(target_) && !overwrite_)
      throw std::runtime_error("output directory exists: " + target_.string() +
                               " (use --overwrite)");
    tmp_ = target_;
    tmp_ += ".tmp";
    fs::remove_all(tmp_);
    fs::create_directories(tmp_);
  }
  ~StagedOutput() {
    if (!committed_) fs::remove_all(tmp_);
  }
  const fs::path& dir() const { return tmp_; }
  void commit() {
    if (overwrite_) fs::remove_all(target_);
    fs::rename(tmp_, target_);
    committed_ = true;
  }

 private:
  fs::path target_, tmp_;
  bool overwrite_;
  bool committed_ = false;
};

std::string frame_name(const char* stem, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d.png", stem, index);
  return buf;
}

void write_energy_report(const fs::path& path, const DiscretePath& path_data,
                         const EnergyBreakdown& aggregate) {
  std::ofstream out(path);
  out << "k,transport,source,viscous,total\n";
  char line[256];
  for (int k = 1; k <= path_data.K(); ++k) {
    const EnergyBreakdown& e = path_data.step_energies[k - 1];
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n", k,
                  e.transport, e.source, e.viscous, e.total());
    out << line;
  }
  std::snprintf(line, sizeof(line), "aggregate,%.17g,%.17g,%.17g,%.17g\n",
                aggregate.transport, aggregate.source, aggregate.viscous,
                aggregate.total());
  out << line;
}

void write_convergence(const fs::path& path,
                       const std::vector<StageLog>& stages) {
  std::ofstream out(path);
  out << "sweep,l2_delta,energy_total\n";
  char line[256];
  int sweep = 0;
  for (const StageLog& stage : stages)
    for (const SweepRecord& rec : stage.log.sweeps) {
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", ++sweep,
                    rec.image_delta, rec.energy.total());
      out << line;
    }
}

ModelParams params_from_config(const RunConfig& cfg) {
  ModelParams p;
  p.delta = cfg.delta;
  p.gamma = cfg.gamma;
  p.elastic = {cfg.lambda_elastic, cfg.mu_elastic};
  p.K = cfg.k_schedule.back();
  p.boundary = cfg.boundary;
  p.tol.ncg_grad_tol = cfg.ncg_grad_tol;
  p.tol.ncg_max_iters = cfg.ncg_max_iters;
  p.tol.pcg_rel_tol = cfg.pcg_rel_tol;
  p.tol.pcg_max_iters = cfg.pcg_max_iters;
  p.tol.outer_max_sweeps = cfg.sweeps;
  p.tol.outer_stall_tol = cfg.outer_stall_tol;
  p.threads = cfg.threads;
  p.validate();
  return p;
}

ImageField load_endpoint(const RunConfig& cfg, const std::string& path,
                         int target_level) {
  ImageField u = load_image(path, cfg.boundary, cfg.resample ? target_level : -1);
  if (u.grid().level() != target_level)
    throw std::runtime_error(path + ": grid level " +
                             std::to_string(u.grid().level()) +
                             " does not match requested level " +
                             std::to_string(target_level) +
                             " (pass --resample)");
  return u;
}

CascadicSchedule schedule_from_config(const RunConfig& cfg, int finest_level) {
  CascadicSchedule schedule;
  const std::size_t stages =
      std::max(cfg.k_schedule.size(), cfg.level_schedule.size());
  for (std::size_t s = 0; s < stages; ++s) {
    CascadicStage stage;
    stage.K = s < cfg.k_schedule.size() ? cfg.k_schedule[s]
                                        : cfg.k_schedule.back();
    stage.level = cfg.level_schedule.empty()
                      ? finest_level
                      : (s < cfg.level_schedule.size()
                             ? cfg.level_schedule[s]
                             : cfg.level_schedule.back());
    stage.sweeps = cfg.sweeps;
    schedule.stages.push_back(stage);
  }
  schedule.validate();
  return schedule;
}

ImageField source_term_image(const ImageField& u_prev, const ImageField& u_next,
                             const Deformation& phi) {
  const Grid& grid = u_prev.grid();
  ImageField z(grid);
  for (int node = 0; node < grid.node_count(); ++node) {
    const Vec2 x = grid.node_position(node);
    Vec2 y = phi.eval_position(x);
    if (grid.periodic()) {
      y.x -= std::floor(y.x);
      y.y -= std::floor(y.y);
    } else {
      y.x = std::clamp(y.x, 0.0, 1.0);
      y.y = std::clamp(y.y, 0.0, 1.0);
    }
    z[node] = phi.jacobian(x).det() * u_next.eval(y) - u_prev[node];
  }
  return z;
}

}  // namespace

int run_geodesic(const RunConfig& cfg) {
  const int target_level =
      cfg.level_schedule.empty() ? cfg.grid_level : cfg.level_schedule.back();
  const ImageField u_a = load_endpoint(cfg, cfg.inputs.at(0), target_level);
  const ImageField u_b = load_endpoint(cfg, cfg.inputs.at(1), target_level);
  const ModelParams params = params_from_config(cfg);
  const CascadicSchedule schedule = schedule_from_config(cfg, target_level);

  CascadicResult result = cascadic_solve(u_a, u_b, schedule, params);
  DiscretePath& path = result.path;
  const EnergyBreakdown aggregate = path_energy(path, params);

  StagedOutput staged(cfg.out_dir, cfg.overwrite);
  const SaveScaling scaling =
      cfg.rescale_output ? SaveScaling::Rescale : SaveScaling::Clamp;
  for (int k = 0; k <= path.K(); ++k)
    save_image(path.images[k], staged.dir() / frame_name("frame", k), scaling);
  write_energy_report(staged.dir() / "energy_report.csv", path, aggregate);
  write_convergence(staged.dir() / "convergence.csv", result.stages);
  if (cfg.emit_source)
    for (int k = 1; k <= path.K(); ++k)
      save_image(source_term_image(path.images[k - 1], path.images[k],
                                   path.deformations[k - 1]),
                 staged.dir() / frame_name("source", k), SaveScaling::Rescale);
  if (cfg.qp_check && path.K() >= 2) {
    // Diagnostic: compare the unconstrained solution sampled along the
    // transport paths with the nonnegativity-constrained QP values.
    const std::vector<ImageField> qp =
        pointwise_qp(u_a, u_b, path.deformations, params);
    double max_gap = 0.0;
    for (int k = 1; k <= path.K() - 1; ++k) {
      const Grid& grid = u_a.grid();
      for (int dof = 0; dof < grid.dof_count(); ++dof) {
        const int node = grid.node_of_dof(dof);
        const TransportPath tp =
            trace_transport_path(path.deformations, grid.node_position(node));
        const double sampled = path.images[k].eval(tp.positions[k]);
        max_gap = std::max(max_gap, std::abs(sampled - qp[k - 1][node]));
      }
    }
    std::ofstream out(staged.dir() / "qp_check.txt");
    out << "max |unconstrained path sample - QP value| = " << max_gap << "\n";
  }
  staged.commit();
  std::cout << "geodesic: energy " << aggregate.total() << " (transport "
            << aggregate.transport << ", source " << aggregate.source
            << ", viscous " << aggregate.viscous << ")\n";
  return 0;
}

int run_barycenter(const RunConfig& cfg) {
  const int target_level =
      cfg.level_schedule.empty() ? cfg.grid_level : cfg.level_schedule.back();
  BarycenterProblem problem;
  for (const std::string& input : cfg.inputs)
    problem.inputs.push_back(load_endpoint(cfg, input, target_level));
  problem.weights = cfg.weights;
  problem.params = params_from_config(cfg);
  problem.validate();

  StagedOutput staged(cfg.out_dir, cfg.overwrite);
  const SaveScaling scaling =
      cfg.rescale_output ? SaveScaling::Rescale : SaveScaling::Clamp;

  if (cfg.triangle_sweep) {
    if (problem.M() != 3)
      throw std::runtime_error("triangle sweep needs exactly 3 inputs");
    for (int i3 = 0; i3 <= 3; ++i3)
      for (int i2 = 0; i2 + i3 <= 3; ++i2) {
        const int i1 = 3 - i2 - i3;
        BarycenterProblem p = problem;
        p.weights = {i1 / 3.0, i2 / 3.0, i3 / 3.0};
        const BarycenterSolution sol = barycenter_descent(p);
        char name[64];
        std::snprintf(name, sizeof(name), "bary_%d_%d_%d.png", i1, i2, i3);
        save_image(sol.barycenter, staged.dir() / name, scaling);
      }
    staged.commit();
    std::cout << "barycenter: triangle sweep written\n";
    return 0;
  }

  const BarycenterSolution sol = barycenter_descent(problem);
  save_image(sol.barycenter, staged.dir() / "barycenter.png", scaling);
  for (int m = 0; m < problem.M(); ++m)
    for (int k = 0; k <= sol.paths[m].K(); ++k)
      save_image(sol.paths[m].images[k],
                 staged.dir() / frame_name(("path" + std::to_string(m)).c_str(), k),
                 scaling);
  {
    std::ofstream out(staged.dir() / "energy_variability.csv");
    out << "m,weight,transport,source,viscous,total\n";
    char line[256];
    for (int m = 0; m < problem.M(); ++m) {
      const EnergyBreakdown& e = sol.per_input_energy[m];
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    m, problem.weights[m], e.transport, e.source, e.viscous,
                    e.total());
      out << line;
    }
  }
  staged.commit();
  std::cout << "barycenter: weighted energy " << sol.weighted_energy.total()
            << "\n";
  return 0;
}

int run_bb(const RunConfig& cfg) {
  const int target_level =
      cfg.level_schedule.empty() ? cfg.grid_level : cfg.level_schedule.back();
  const ImageField u_a = load_endpoint(cfg, cfg.inputs.at(0), target_level);
  const ImageField u_b = load_endpoint(cfg, cfg.inputs.at(1), target_level);
  const SpaceTimeGrid grid(u_a.grid(), cfg.nt);
  const BBResult result = bb_geodesic(u_a, u_b, grid, cfg.r, cfg.delta,
                                      cfg.max_iters, cfg.bb_tol);

  StagedOutput staged(cfg.out_dir, cfg.overwrite);
  const SaveScaling scaling =
      cfg.rescale_output ? SaveScaling::Rescale : SaveScaling::Clamp;
  for (std::size_t i = 0; i < result.slices.size(); ++i)
    save_image(result.slices[i],
               staged.dir() / frame_name("slice", static_cast<int>(i)),
               scaling);
  {
    std::ofstream out(staged.dir() / "residual_log.csv");
    out << "iteration,primal_residual,transport_energy\n";
    char line[256];
    for (const BBIterRecord& rec : result.log) {
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", rec.iteration,
                    rec.primal_residual, rec.transport_energy);
      out << line;
    }
  }
  {
    std::ofstream out(staged.dir() / "bb_summary.csv");
    out << "transport,source,total,iterations,converged\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%d,%d\n",
                  result.energy.transport, result.energy.source,
                  result.energy.total(), result.iterations,
                  result.converged ? 1 : 0);
    out << line;
  }
  staged.commit();
  std::cout << "bb: squared distance estimate " << result.distance_sq << " ("
            << result.iterations << " iterations)\n";
  return 0;
}

int run_consistency(const RunConfig& cfg) {
  const Grid grid(cfg.grid_level, Boundary::Periodic);
  SmoothPath path;
  if (cfg.consistency_case == "linear") {
    // u = 1 + t g with bilinear g: discrete and continuous energies agree
    // exactly for every K.
    path.u = [](double t, Vec2 x) { return 1.0 + t * (0.25 + 0.5 * x.x * x.y); };
    path.v = [](double, Vec2) { return Vec2{0.0, 0.0}; };
    path.dv = [](double, Vec2) { return Mat2{}; };
    path.z = [](double, Vec2 x) { return 0.25 + 0.5 * x.x * x.y; };
  } else if (cfg.consistency_case == "bump") {
    path = translating_bump_path();
  } else {
    throw std::runtime_error("unknown consistency case: " +
                             cfg.consistency_case);
  }
  const ConsistencyTable table =
      consistency_check(path, grid, cfg.k_schedule, cfg.delta, cfg.gamma,
                        {cfg.lambda_elastic, cfg.mu_elastic});

  StagedOutput staged(cfg.out_dir, cfg.overwrite);
  {
    std::ofstream out(staged.dir() / "consistency.csv");
    out << "K,discrete_energy,continuous_energy,abs_error,error_vs_reference\n";
    char line[256];
    for (const ConsistencyRow& row : table.rows) {
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n", row.K,
                    row.discrete_energy, table.continuous_energy,
                    row.error_vs_continuous, row.error_vs_reference);
      out << line;
    }
  }
  staged.commit();
  std::cout << "consistency: continuous energy " << table.continuous_energy
            << "\n";
  for (const ConsistencyRow& row : table.rows)
    std::cout << "  K=" << row.K << " discrete " << row.discrete_energy
              << " |error| " << row.error_vs_continuous << "\n";
  if (!table.observed_orders.empty()) {
    std::cout << "  observed orders (vs K=" << table.reference_K << "):";
    for (double o : table.observed_orders) std::cout << " " << o;
    std::cout << "\n";
  }
  return 0;
}

SmoothPath translating_bump_path() {
  // Periodic bump B(x) = exp(kappa (cos(2 pi x1) - 1)) exp(kappa (...x2))
  // translated with acceleration plus a time-modulated amplitude and a
  // divergence-free shear; all three energy channels are active and z, Dv
  // have closed forms.
  constexpr double kappa = 4.0;
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  auto bump = [=](Vec2 p) {
    return std::exp(kappa * (std::cos(two_pi * p.x) - 1.0)) *
           std::exp(kappa * (std::cos(two_pi * p.y) - 1.0));
  };
  auto bump_grad = [=](Vec2 p) {
    const double b = bump(p);
    return Vec2{-kappa * two_pi * std::sin(two_pi * p.x) * b,
                -kappa * two_pi * std::sin(two_pi * p.y) * b};
  };
  auto center = [](double t) { return Vec2{0.3 + 0.25 * t * t, 0.5}; };
  auto center_dot = [](double t) { return Vec2{0.5 * t, 0.0}; };
  auto amp = [](double t) { return 1.0 + 0.3 * t; };
  auto amp_dot = [](double) { return 0.3; };
  constexpr double shear = 0.1;

  SmoothPath path;
  path.u = [=](double t, Vec2 x) {
    return amp(t) * bump({x.x - center(t).x, x.y - center(t).y});
  };
  path.v = [=](double t, Vec2 x) {
    return Vec2{center_dot(t).x + shear * std::sin(two_pi * x.y),
                center_dot(t).y};
  };
  path.dv = [=](double, Vec2 x) {
    return Mat2{0.0, shear * two_pi * std::cos(two_pi * x.y), 0.0, 0.0};
  };
  path.z = [=](double t, Vec2 x) {
    // z = du/dt + div(u v); div v = 0 so z = du/dt + v . grad u.
    const Vec2 rel{x.x - center(t).x, x.y - center(t).y};
    const double b = bump(rel);
    const Vec2 gb = bump_grad(rel);
    const double du_dt = amp_dot(t) * b - amp(t) * (gb.x * center_dot(t).x +
                                                    gb.y * center_dot(t).y);
    const Vec2 v = path.v(t, x);
    return du_dt + amp(t) * (gb.x * v.x + gb.y * v.y);
  };
  return path;
}

int run_oracle_check(const RunConfig& cfg) {
  std::mt19937_64 rng(20240707);
  int failures = 0;

  // PCG image solve vs dense direct solve on small random instances.
  for (int trial = 0; trial < 25; ++trial) {
    const Grid grid(2, trial % 2 == 0 ? Boundary::DirichletIdentity
                                      : Boundary::Periodic);
    ModelParams params;
    params.K = 2 + trial % 2;
    params.delta = 0.5;
    std::vector<Deformation> phis;
    for (int k = 0; k < params.K; ++k)
      phis.push_back(random_admissible_deformation(grid, rng, 0.05));
    const ImageField u_a = random_image(grid, rng);
    const ImageField u_b = random_image(grid, rng);
    const std::vector<ImageField> pcg_solution =
        solve_image_system(phis, u_a, u_b, params);
    const std::vector<ImageField> dense_solution =
        dense_image_solve(phis, u_a, u_b, params);
    double err = 0.0, scale = 0.0;
    for (int k = 0; k < params.K - 1; ++k)
      for (int node = 0; node < grid.node_count(); ++node) {
        err = std::max(err,
                       std::abs(pcg_solution[k][node] - dense_solution[k][node]));
        scale = std::max(scale, std::abs(dense_solution[k][node]));
      }
    if (err > 1e-8 * std::max(1.0, scale)) {
      ++failures;
      std::cout << "oracle-check FAIL pcg-vs-dense trial " << trial
                << " err " << err << "\n";
    }
  }

  // Pointwise QP vs brute force on random tridiagonal instances.
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Grid grid(2, Boundary::DirichletIdentity);
    const int K = 2 + trial % 3;
    std::vector<Deformation> phis;
    for (int k = 0; k < K; ++k)
      phis.push_back(random_admissible_deformation(grid, rng, 0.08));
    const Vec2 x{0.25 + 0.5 * unif(rng), 0.25 + 0.5 * unif(rng)};
    const TransportPath tp = trace_transport_path(phis, x);
    const PathQp qp =
        build_path_qp(tp, 0.02 * unif(rng), 0.02 * unif(rng), 0.05);
    const std::vector<double> fast = solve_path_qp_nonnegative(qp);
    // Dense Hessian for the oracle.
    const int n = K - 1;
    std::vector<double> h(n * n, 0.0);
    for (int i = 0; i < n; ++i) {
      h[i * n + i] = qp.h_diag[i];
      if (i + 1 < n) h[i * n + i + 1] = h[(i + 1) * n + i] = qp.h_off[i];
    }
    const std::vector<double> slow = oracles::brute_force_qp(n, h, qp.lin);
    for (int i = 0; i < n; ++i)
      if (std::abs(fast[i] - slow[i]) > 1e-10) {
        ++failures;
        std::cout << "oracle-check FAIL qp trial " << trial << "\n";
        break;
      }
  }

  std::cout << (failures == 0 ? "oracle-check: PASS" : "oracle-check: FAIL")
            << "\n";
  (void)cfg;
  return failures == 0 ? 0 : 1;
}

std::vector<ImageField> dense_image_solve(const std::vector<Deformation>& phis,
                                          const ImageField& u_a,
                                          const ImageField& u_b,
                                          const ModelParams& params) {
  const Grid& grid = u_a.grid();
  const ImageSystem system(grid, phis, params.delta);
  const int K = static_cast<int>(phis.size());
  const int n = system.block_size();
  const int total = system.unknowns();
  const ImageDofMap dof(grid);

  oracles::DenseSystem dense;
  dense.n = total;
  dense.matrix.assign(static_cast<std::size_t>(total) * total, 0.0);
  std::vector<double> unit(total, 0.0), column(total, 0.0);
  for (int j = 0; j < total; ++j) {
    unit[j] = 1.0;
    system.apply(unit, column);
    unit[j] = 0.0;
    for (int i = 0; i < total; ++i) dense.at(i, j) = column[i];
  }
  dense.rhs = system.rhs(dof.pack(u_a), dof.pack(u_b));
  const std::vector<double> x = oracles::dense_solve(dense);

  std::vector<ImageField> out;
  for (int k = 0; k < K - 1; ++k) {
    ImageField u(grid);
    dof.unpack(std::vector<double>(x.begin() + k * n, x.begin() + (k + 1) * n),
               u);
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace otm
