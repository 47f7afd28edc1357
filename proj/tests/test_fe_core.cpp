#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "otm/field.hpp"
#include "otm/mass_matrix.hpp"
#include "otm/quadrature.hpp"
#include "otm/synth.hpp"

using namespace otm;

namespace {

ImageField linear_x(const Grid& grid) {
  ImageField u(grid);
  for (int node = 0; node < grid.node_count(); ++node)
    u[node] = grid.node_position(node).x;
  return u;
}

}  // namespace

TEST_CASE("grid invariants") {
  const Grid grid(3, Boundary::DirichletIdentity);
  CHECK(grid.nodes_per_side() == 9);
  CHECK(grid.cell_width() * (grid.nodes_per_side() - 1) == 1.0);
  CHECK(grid.dof_count() == 81);
  const Grid periodic(3, Boundary::Periodic);
  CHECK(periodic.dof_count() == 64);
  CHECK(periodic.dof_of_node(periodic.node_index(8, 3)) ==
        periodic.dof_of_node(periodic.node_index(0, 3)));
}

TEST_CASE("bilinear evaluation reproduces bilinear fields") {
  const Grid grid(3, Boundary::DirichletIdentity);
  const ImageField u = linear_x(grid);
  CHECK(u.eval({0.25, 0.7}) == doctest::Approx(0.25).epsilon(1e-14));
  // nodal interpolation property
  CHECK(u.eval(grid.node_position(grid.node_index(3, 5))) ==
        doctest::Approx(grid.node_position(grid.node_index(3, 5)).x));
  const Vec2 g = u.eval_gradient({0.3, 0.3});
  CHECK(g.x == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(g.y == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("out-of-domain evaluation") {
  const Grid grid(2, Boundary::DirichletIdentity);
  const ImageField u = linear_x(grid);
  CHECK_NOTHROW(u.eval({1.0 + 0.5e-12, 0.5}));  // clamped
  CHECK_THROWS_AS(u.eval({1.0 + 1e-9, 0.5}), OutOfDomainError);
}

TEST_CASE("periodic wrap") {
  const Grid grid(3, Boundary::Periodic);
  std::mt19937_64 rng(7);
  ImageField u = random_image(grid, rng);
  for (double x = 0.03; x < 1.0; x += 0.17) {
    CHECK(u.eval({x, 0.41}) == doctest::Approx(u.eval({x + 1.0, 0.41})).epsilon(1e-14));
    CHECK(u.eval({x, 0.41}) == doctest::Approx(u.eval({x, 0.41 - 1.0})).epsilon(1e-14));
  }
}

TEST_CASE("jacobian determinant") {
  const Grid grid(3, Boundary::DirichletIdentity);
  SUBCASE("identity") {
    const Deformation id(grid);
    CHECK(jacobian_det(id, {0.33, 0.72}) == doctest::Approx(1.0));
  }
  SUBCASE("shear has unit determinant") {
    Deformation phi(grid);
    for (int node = 0; node < grid.node_count(); ++node)
      phi.displacement()[node] = {0.1 * grid.node_position(node).y, 0.0};
    CHECK(jacobian_det(phi, {0.4, 0.6}) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("uniform dilation") {
    Deformation phi(grid);
    for (int node = 0; node < grid.node_count(); ++node)
      phi.displacement()[node] = grid.node_position(node) * 0.05;
    CHECK(jacobian_det(phi, {0.4, 0.6}) ==
          doctest::Approx(1.1025).epsilon(1e-13));
  }
}

TEST_CASE("simpson rule integrates per-direction cubics exactly") {
  const QuadratureRule& rule = simpson_rule();
  double wsum = 0.0;
  for (int q = 0; q < QuadratureRule::kPoints; ++q) wsum += rule.weight[q];
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-15));
  // p(x, y) = x^3 y^2 - 2 x y^3 + 3; integral over [0,1]^2 = 1/12 - 1/4 + 3.
  double acc = 0.0;
  for (int q = 0; q < QuadratureRule::kPoints; ++q) {
    const double x = rule.point[q].x, y = rule.point[q].y;
    acc += rule.weight[q] * (x * x * x * y * y - 2.0 * x * y * y * y + 3.0);
  }
  const double exact = 1.0 / 12.0 - 0.25 + 3.0;
  CHECK(acc == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("single-cell mass matrix") {
  const Grid cell(0, Boundary::DirichletIdentity);
  const SparseMatrix m =
      assemble_mass_matrix(cell, unit_weights(cell), nullptr, nullptr);
  CHECK(m.coeff(0, 0) == doctest::Approx(1.0 / 9).epsilon(1e-14));
  CHECK(m.coeff(0, 1) == doctest::Approx(1.0 / 18).epsilon(1e-14));
  CHECK(m.coeff(0, 3) == doctest::Approx(1.0 / 36).epsilon(1e-14));
  CHECK(m.coeff(1, 2) == doctest::Approx(1.0 / 36).epsilon(1e-14));
}

TEST_CASE("mass matrix partition of unity and zero weight") {
  for (Boundary b : {Boundary::DirichletIdentity, Boundary::Periodic}) {
    const Grid grid(3, b);
    const SparseMatrix m =
        assemble_mass_matrix(grid, unit_weights(grid), nullptr, nullptr);
    CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m.symmetry_gap() < 1e-15);
    const SparseMatrix zero = assemble_mass_matrix(
        grid, QuadWeights(grid.cell_count() * 9, 0.0), nullptr, nullptr);
    CHECK(zero.sum() == 0.0);
  }
}

TEST_CASE("mass matrix positive definite for positive weights") {
  const Grid grid(2, Boundary::DirichletIdentity);
  const SparseMatrix m =
      assemble_mass_matrix(grid, unit_weights(grid), nullptr, nullptr);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(grid.dof_count()), y(grid.dof_count());
    double norm = 0.0;
    for (double& v : x) {
      v = dist(rng);
      norm += v * v;
    }
    if (norm == 0.0) continue;
    m.multiply(x, y);
    double quad = 0.0;
    for (int i = 0; i < grid.dof_count(); ++i) quad += x[i] * y[i];
    CHECK(quad > 0.0);
  }
}

TEST_CASE("non-finite weights are rejected") {
  const Grid grid(1, Boundary::DirichletIdentity);
  QuadWeights w = unit_weights(grid);
  w[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(assemble_mass_matrix(grid, w, nullptr, nullptr),
                  std::invalid_argument);
}

TEST_CASE("change of variables mass identity") {
  // integral of det(D phi) (u . phi) equals integral of u, with observed
  // quadrature order >= 3 across two levels.
  double errors[2];
  for (int i = 0; i < 2; ++i) {
    const Grid grid(4 + i, Boundary::DirichletIdentity);
    Deformation phi(grid);
    const int n = grid.nodes_per_side();
    for (int iy = 1; iy < n - 1; ++iy)
      for (int ix = 1; ix < n - 1; ++ix) {
        const Vec2 p = grid.node_position(grid.node_index(ix, iy));
        const double envelope = std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
        phi.displacement()[grid.node_index(ix, iy)] = {
            0.05 * envelope * std::sin(2 * M_PI * p.y),
            -0.04 * envelope * std::sin(2 * M_PI * p.x)};
      }
    ImageField u(grid);
    for (int node = 0; node < grid.node_count(); ++node) {
      const Vec2 p = grid.node_position(node);
      u[node] = 1.0 + 0.5 * std::cos(2 * M_PI * p.x) * std::sin(M_PI * p.y);
    }
    const CellQuadrature quad(grid);
    double lhs = 0.0, rhs = 0.0;
    for (int cell = 0; cell < quad.cell_count(); ++cell)
      for (int q = 0; q < QuadratureRule::kPoints; ++q) {
        const Vec2 x = quad.world_point(cell, q);
        const double w = quad.world_weight(q);
        lhs += w * phi.jacobian(x).det() * u.eval(phi.eval_position(x));
        rhs += w * u.eval(x);
      }
    errors[i] = std::abs(lhs - rhs);
  }
  CHECK(errors[0] < 1e-4);
  const double order = std::log2(errors[0] / errors[1]);
  CHECK(order >= 3.0);
}

TEST_CASE("prolongation") {
  const Grid coarse(2, Boundary::DirichletIdentity);
  const Grid fine(3, Boundary::DirichletIdentity);
  SUBCASE("constants stay constant") {
    const ImageField c = constant_image(coarse, 0.7);
    const ImageField f = prolongate(c, fine);
    for (double v : f.values()) CHECK(v == doctest::Approx(0.7));
  }
  SUBCASE("coincident nodes and edge midpoints") {
    std::mt19937_64 rng(3);
    const ImageField u = random_image(coarse, rng);
    const ImageField f = prolongate(u, fine);
    CHECK(f[fine.node_index(2, 4)] == u[coarse.node_index(1, 2)]);
    const double mid = 0.5 * (u[coarse.node_index(1, 2)] +
                              u[coarse.node_index(2, 2)]);
    CHECK(f[fine.node_index(3, 4)] == doctest::Approx(mid).epsilon(1e-15));
  }
  SUBCASE("level mismatch") {
    const Grid far(4, Boundary::DirichletIdentity);
    const ImageField u = constant_image(coarse, 1.0);
    CHECK_THROWS_AS(prolongate(u, far), std::invalid_argument);
  }
}

TEST_CASE("restriction subsamples nested nodes") {
  const Grid fine(3, Boundary::DirichletIdentity);
  const Grid coarse(2, Boundary::DirichletIdentity);
  std::mt19937_64 rng(5);
  const ImageField u = random_image(fine, rng);
  const ImageField c = restrict_to(u, coarse);
  CHECK(c[coarse.node_index(1, 3)] == u[fine.node_index(2, 6)]);
}
