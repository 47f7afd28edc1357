#include "otm/matching.hpp"

#include <stdexcept>

#include "otm/quadrature.hpp"

namespace otm {

namespace {

struct Kernel {
  const ImageField* u = nullptr;
  const ImageField* u_next = nullptr;
  const Deformation* phi = nullptr;
  double delta = 1.0;
  double gamma = 0.0;
  ElasticParams elastic;
  bool want_transport = false;
  bool want_source = false;
  bool want_viscous = false;
  bool enforce_admissibility = false;  // det > 0 and in-domain composition
  std::vector<Vec2>* gradient = nullptr;

  bool run(EnergyBreakdown& out) const {
    const Grid& grid = phi->grid();
    const CellQuadrature quad(grid);
    const int n = grid.nodes_per_side();
    const auto& rule = quad.rule;
    const double inv_delta = 1.0 / delta;
    const bool need_jacobian =
        want_source || want_viscous || enforce_admissibility || gradient;
    const bool need_composition = want_source || enforce_admissibility;

    std::vector<double> tr(want_transport ? quad.cell_count() : 0, 0.0);
    std::vector<double> src(want_source ? quad.cell_count() : 0, 0.0);
    std::vector<double> vis(want_viscous ? quad.cell_count() : 0, 0.0);

    const std::vector<Vec2>& disp = phi->displacement();
    for (int cell = 0; cell < quad.cell_count(); ++cell) {
      const auto nodes = quad.cell_nodes(cell);
      double cell_tr = 0.0, cell_src = 0.0, cell_vis = 0.0;
      for (int q = 0; q < QuadratureRule::kPoints; ++q) {
        const double w = quad.world_weight(q);
        const auto& s = rule.shape[q];
        const Vec2 d0 = disp[nodes[0]], d1 = disp[nodes[1]],
                   d2 = disp[nodes[2]], d3 = disp[nodes[3]];
        const Vec2 dphi = s[0] * d0 + s[1] * d1 + s[2] * d2 + s[3] * d3;

        double u_val = 0.0;
        if (want_transport || want_source) {
          const double* uv = u->values().data();
          u_val = s[0] * uv[nodes[0]] + s[1] * uv[nodes[1]] +
                  s[2] * uv[nodes[2]] + s[3] * uv[nodes[3]];
        }
        if (want_transport) {
          cell_tr += w * dphi.norm_sq() * u_val;
          if (gradient) {
            const double c = 2.0 * w * u_val;
            for (int a = 0; a < 4; ++a)
              (*gradient)[nodes[a]] += (c * s[a]) * dphi;
          }
        }

        Mat2 f;
        double det = 1.0;
        if (need_jacobian) {
          Vec2 gx{0, 0}, gy{0, 0};
          for (int a = 0; a < 4; ++a) {
            const Vec2 g = quad.shape_grad(q, a);
            const Vec2 da = disp[nodes[a]];
            gx += da * g.x;
            gy += da * g.y;
          }
          f = {1.0 + gx.x, gy.x, gx.y, 1.0 + gy.y};
          det = f.det();
          if (enforce_admissibility && det <= kDetFloor) return false;
        }

        if (want_viscous) {
          const double wdens = hyperelastic_density(f, elastic);
          if (!std::isfinite(wdens)) return false;
          cell_vis += w * wdens;
          if (gradient) {
            const Mat2 dw = hyperelastic_derivative(f, elastic);
            const double c = w * gamma;
            for (int a = 0; a < 4; ++a)
              (*gradient)[nodes[a]] += c * dw.apply(quad.shape_grad(q, a));
          }
        }

        if (need_composition) {
          const Vec2 x = quad.world_point(cell, q);
          const BasisSample by = sample_basis(grid, x + dphi);
          if (!by.inside) return false;
          if (want_source) {
            const double* uv = u_next->values().data();
            const double uy = by.value[0] * uv[by.nodes[0]] +
                              by.value[1] * uv[by.nodes[1]] +
                              by.value[2] * uv[by.nodes[2]] +
                              by.value[3] * uv[by.nodes[3]];
            const double r = det * uy - u_val;
            cell_src += w * r * r;
            if (gradient) {
              // d/d(disp): det -> cof(F) grad(xi); u_next(phi) -> grad u_next.
              const Mat2 cof = f.cofactor();
              const double uy0 = uv[by.nodes[0]], uy1 = uv[by.nodes[1]],
                           uy2 = uv[by.nodes[2]], uy3 = uv[by.nodes[3]];
              const double inv_h = quad.inv_h;
              const double sx = by.value[1] + by.value[3];
              const double sy = by.value[2] + by.value[3];
              const Vec2 grad_uy{
                  ((1 - sy) * (uy1 - uy0) + sy * (uy3 - uy2)) * inv_h,
                  ((1 - sx) * (uy2 - uy0) + sx * (uy3 - uy1)) * inv_h};
              const double c = 2.0 * w * inv_delta * r;
              // source gradient on the transport-side nodes
              for (int a = 0; a < 4; ++a) {
                const Vec2 gdet = cof.apply(quad.shape_grad(q, a));
                (*gradient)[nodes[a]] +=
                    c * (uy * gdet + (det * s[a]) * grad_uy);
              }
            }
          }
        }
      }
      if (want_transport) tr[cell] = cell_tr;
      if (want_source) src[cell] = cell_src * inv_delta;
      if (want_viscous) vis[cell] = cell_vis * gamma;
    }

    if (want_transport) out.transport = pairwise_sum(tr);
    if (want_source) out.source = pairwise_sum(src);
    if (want_viscous) out.viscous = pairwise_sum(vis);
    out.finite = true;
    return true;
  }
};

void check_grids(const Grid& a, const Grid& b) {
  if (a != b) throw std::invalid_argument("matching energy: grid mismatch");
}

}  // namespace

double transport_cost(const ImageField& u, const Deformation& phi) {
  check_grids(u.grid(), phi.grid());
  Kernel k;
  k.u = &u;
  k.phi = &phi;
  k.want_transport = true;
  EnergyBreakdown e;
  k.run(e);
  return e.transport;
}

EnergyBreakdown source_cost_checked(const ImageField& u,
                                    const ImageField& u_next,
                                    const Deformation& phi, double delta) {
  check_grids(u.grid(), phi.grid());
  check_grids(u_next.grid(), phi.grid());
  if (delta <= 0.0) throw std::invalid_argument("source_cost: delta <= 0");
  Kernel k;
  k.u = &u;
  k.u_next = &u_next;
  k.phi = &phi;
  k.delta = delta;
  k.want_source = true;
  EnergyBreakdown e;
  if (!k.run(e)) return EnergyBreakdown::infinite();
  return e;
}

double source_cost(const ImageField& u, const ImageField& u_next,
                   const Deformation& phi, double delta) {
  return source_cost_checked(u, u_next, phi, delta).source;
}

EnergyBreakdown viscous_cost_checked(const Deformation& phi, double gamma,
                                     const ElasticParams& params) {
  if (gamma == 0.0) return {};
  Kernel k;
  k.phi = &phi;
  k.gamma = gamma;
  k.elastic = params;
  k.want_viscous = true;
  EnergyBreakdown e;
  if (!k.run(e)) return EnergyBreakdown::infinite();
  return e;
}

double viscous_cost(const Deformation& phi, double gamma,
                    const ElasticParams& params) {
  return viscous_cost_checked(phi, gamma, params).total();
}

EnergyBreakdown matching_energy(const ImageField& u, const ImageField& u_next,
                                const Deformation& phi, double delta,
                                double gamma, const ElasticParams& params) {
  check_grids(u.grid(), phi.grid());
  check_grids(u_next.grid(), phi.grid());
  if (delta <= 0.0) throw std::invalid_argument("matching_energy: delta <= 0");
  Kernel k;
  k.u = &u;
  k.u_next = &u_next;
  k.phi = &phi;
  k.delta = delta;
  k.gamma = gamma;
  k.elastic = params;
  k.want_transport = true;
  k.want_source = true;
  k.want_viscous = gamma > 0.0;
  k.enforce_admissibility = true;
  EnergyBreakdown e;
  if (!k.run(e)) return EnergyBreakdown::infinite();
  return e;
}

std::vector<Vec2> matching_gradient_deformation(const ImageField& u,
                                                const ImageField& u_next,
                                                const Deformation& phi,
                                                double delta, double gamma,
                                                const ElasticParams& params) {
  check_grids(u.grid(), phi.grid());
  check_grids(u_next.grid(), phi.grid());
  std::vector<Vec2> grad(phi.grid().node_count());
  Kernel k;
  k.u = &u;
  k.u_next = &u_next;
  k.phi = &phi;
  k.delta = delta;
  k.gamma = gamma;
  k.elastic = params;
  k.want_transport = true;
  k.want_source = true;
  k.want_viscous = gamma > 0.0;
  k.enforce_admissibility = true;
  k.gradient = &grad;
  EnergyBreakdown e;
  if (!k.run(e))
    throw std::domain_error(
        "matching_gradient_deformation: gradient undefined at an "
        "infinite-energy state");
  return grad;
}

}  // namespace otm
