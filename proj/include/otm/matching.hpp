#pragma once

#include <limits>
#include <vector>

#include "otm/elastic.hpp"
#include "otm/field.hpp"

namespace otm {

/// The three channels of the pairwise matching functional. An inadmissible
/// deformation (det D phi <= 0 at a quadrature point, or a point mapped out
/// of the domain) is reported through the `finite` flag rather than a
/// floating infinity so line searches can branch cleanly.
struct EnergyBreakdown {
  double transport = 0.0;
  double source = 0.0;
  double viscous = 0.0;
  bool finite = true;

  double total() const {
    return finite ? transport + source + viscous
                  : std::numeric_limits<double>::infinity();
  }

  EnergyBreakdown& operator+=(const EnergyBreakdown& o) {
    transport += o.transport;
    source += o.source;
    viscous += o.viscous;
    finite = finite && o.finite;
    return *this;
  }
  EnergyBreakdown& operator*=(double s) {
    transport *= s;
    source *= s;
    viscous *= s;
    return *this;
  }

  static EnergyBreakdown infinite() {
    EnergyBreakdown e;
    e.finite = false;
    return e;
  }
};

/// Transport channel: integral of |phi - id|^2 u.
double transport_cost(const ImageField& u, const Deformation& phi);

/// Source channel: (1/delta) integral of |det(D phi) u_next(phi) - u|^2.
/// Not finite when phi maps a quadrature point out of a Dirichlet domain.
EnergyBreakdown source_cost_checked(const ImageField& u,
                                    const ImageField& u_next,
                                    const Deformation& phi, double delta);
double source_cost(const ImageField& u, const ImageField& u_next,
                   const Deformation& phi, double delta);

/// Viscous channel: gamma * integral of W(D phi); infinite past the barrier.
EnergyBreakdown viscous_cost_checked(const Deformation& phi, double gamma,
                                     const ElasticParams& params);
double viscous_cost(const Deformation& phi, double gamma,
                    const ElasticParams& params);

/// All three channels in one quadrature pass.
EnergyBreakdown matching_energy(const ImageField& u, const ImageField& u_next,
                                const Deformation& phi, double delta,
                                double gamma, const ElasticParams& params);

/// Exact gradient of the quadrature-discretized matching energy with respect
/// to the nodal displacement of phi, as a full nodal field (no boundary
/// masking; callers restrict to free DOFs). Throws std::domain_error at an
/// infinite-energy state.
std::vector<Vec2> matching_gradient_deformation(const ImageField& u,
                                                const ImageField& u_next,
                                                const Deformation& phi,
                                                double delta, double gamma,
                                                const ElasticParams& params);

}  // namespace otm
