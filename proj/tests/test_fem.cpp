#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "perfospec/errors.hpp"
#include "perfospec/fem.hpp"
#include "support/oracles.hpp"

using namespace perfospec;
using namespace perfospec::testing;

namespace {
constexpr double kPi = std::numbers::pi;

Mesh2D single_triangle() {
  Mesh2D m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.vertex_tag = {0, 0, 0};  // no Dirichlet tags: pure Neumann assembly
  m.vertex_param = {0, 0, 0};
  return m;
}

Mesh2D neumann_square(double h) {
  Mesh2D m = generate(OuterRect{1.0, 1.0}, std::nullopt, h, h, 0.3);
  std::fill(m.vertex_tag.begin(), m.vertex_tag.end(), 0);
  m.boundary_edges.clear();  // strip tags: assemble sees pure Neumann
  return m;
}

Eigen::MatrixXd to_dense(const CsrMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    for (std::int64_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k) {
      d(r, m.col_idx()[k]) = m.values()[k];
    }
  }
  return d;
}
}  // namespace

TEST_CASE("P1 element matrices on the unit right triangle") {
  const DiscreteOperator op = assemble(single_triangle(), 1);
  REQUIRE(op.stiffness.rows() == 3);
  const double expected_k[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  const double area = 0.5;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(op.stiffness.coeff(i, j) == doctest::Approx(expected_k[i][j]).epsilon(1e-14));
      const double expected_m = area / 12.0 * (i == j ? 2.0 : 1.0);
      CHECK(op.mass.coeff(i, j) == doctest::Approx(expected_m).epsilon(1e-14));
    }
  }
}

TEST_CASE("pure Neumann: constants are in the stiffness kernel") {
  for (int order : {1, 2}) {
    const DiscreteOperator op = assemble(neumann_square(0.3), order);
    const std::vector<double> ones(op.stiffness.rows(), 1.0);
    for (const double v : spmv(op.stiffness, ones)) CHECK(std::abs(v) <= 1e-12);
  }
}

TEST_CASE("assembled matrices match the dense reference on a small mesh") {
  const Mesh2D m = generate(OuterRect{1.0, 1.0}, std::nullopt, 0.4, 0.4, 0.3);
  REQUIRE(m.vertices.size() <= 50);
  const DiscreteOperator op = assemble(m, 1);

  Eigen::MatrixXd K, M;
  dense_p1_assembly(m, K, M);
  double worst = 0.0;
  for (std::size_t fi = 0; fi < op.free_map.size(); ++fi) {
    for (std::size_t fj = 0; fj < op.free_map.size(); ++fj) {
      worst = std::max(worst, std::abs(op.stiffness.coeff(fi, fj) -
                                       K(op.free_map[fi], op.free_map[fj])));
      worst = std::max(worst,
                       std::abs(op.mass.coeff(fi, fj) - M(op.free_map[fi], op.free_map[fj])));
    }
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("operator invariants: symmetry and positive definiteness") {
  HoleInstance hole{circle_shape(), 0.1, {0.5, 0.5}};
  const Mesh2D m = generate(OuterRect{1.0, 1.0}, hole, 0.15, 0.03, 0.3);
  for (int order : {1, 2}) {
    const DiscreteOperator op = assemble(m, order);
    CHECK(op.stiffness.symmetry_defect() <= 1e-14);
    CHECK(op.mass.symmetry_defect() <= 1e-14);
    // probe Cholesky on both (stiffness SPD after Dirichlet elimination)
    for (const CsrMatrix* mat : {&op.mass, &op.stiffness}) {
      for (int r = 0; r < mat->rows(); ++r) CHECK(mat->coeff(r, r) > 0.0);
      Eigen::LLT<Eigen::MatrixXd> llt(to_dense(*mat));
      CHECK(llt.info() == Eigen::Success);
    }
  }
}

TEST_CASE("evaluate: constants, linears, smooth interpolation error") {
  const Mesh2D m = neumann_square(0.2);
  const DiscreteOperator op = assemble(m, 1);
  const PointLocator loc(m);

  DiscreteField ones{std::vector<double>(op.free_map.size(), 1.0), op.id};
  CHECK(evaluate(ones, op, m, loc, {0.37, 0.81}) == doctest::Approx(1.0).epsilon(1e-14));

  DiscreteField linear{std::vector<double>(op.free_map.size()), op.id};
  for (std::size_t f = 0; f < op.free_map.size(); ++f) {
    linear.coefficients[f] = op.nodes[op.free_map[f]].x;
  }
  CHECK(evaluate(linear, op, m, loc, {0.3, 0.7}) == doctest::Approx(0.3).epsilon(1e-13));

  // nodal sin(pi x) sin(pi y) at the center: 1 + O(h^2)
  Mesh2D fine = m;
  for (int l = 0; l < 2; ++l) fine = refine_uniform(fine);
  const DiscreteOperator fop = assemble(fine, 1);
  DiscreteField sf{std::vector<double>(fop.free_map.size()), fop.id};
  for (std::size_t f = 0; f < fop.free_map.size(); ++f) {
    const Vec2& p = fop.nodes[fop.free_map[f]];
    sf.coefficients[f] = std::sin(kPi * p.x) * std::sin(kPi * p.y);
  }
  CHECK(evaluate(sf, fop, fine, {0.5, 0.5}) == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("evaluate outside the domain throws") {
  const Mesh2D m = neumann_square(0.3);
  const DiscreteOperator op = assemble(m, 1);
  DiscreteField f{std::vector<double>(op.free_map.size(), 0.0), op.id};
  CHECK_THROWS_AS(evaluate(f, op, m, {1.5, 0.5}), OutsideDomain);
}

TEST_CASE("recover_gradient: linear and quadratic fields are exact") {
  const Mesh2D m = neumann_square(0.15);
  const DiscreteOperator op = assemble(m, 1);

  DiscreteField lx{std::vector<double>(op.free_map.size()), op.id};
  DiscreteField quad{std::vector<double>(op.free_map.size()), op.id};
  for (std::size_t f = 0; f < op.free_map.size(); ++f) {
    const Vec2& p = op.nodes[op.free_map[f]];
    lx.coefficients[f] = p.x;
    quad.coefficients[f] = 0.5 * (p.x * p.x + p.y * p.y);
  }
  const Vec2 g1 = recover_gradient(lx, op, m, {0.5, 0.5}, 0.3);
  CHECK(g1.x == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(std::abs(g1.y) <= 1e-11);

  const Vec2 g2 = recover_gradient(quad, op, m, {0.4, 0.6}, 0.3);
  CHECK(g2.x == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(g2.y == doctest::Approx(0.6).epsilon(1e-10));

  CHECK_THROWS_AS(recover_gradient(lx, op, m, {0.5, 0.5}, 1e-4), InsufficientSamples);
}

TEST_CASE("parallel and serial assembly produce identical matrices") {
  HoleInstance hole{circle_shape(), 0.08, {0.5, 0.5}};
  const Mesh2D m = generate(OuterRect{1.0, 1.0}, hole, 0.1, 0.02, 0.3);
  for (int order : {1, 2}) {
    const DiscreteOperator a = assemble(m, order, ExecPolicy::Serial);
    const DiscreteOperator b = assemble(m, order, ExecPolicy::Parallel);
    CHECK(a.stiffness.values() == b.stiffness.values());
    CHECK(a.stiffness.col_idx() == b.stiffness.col_idx());
    CHECK(a.mass.values() == b.mass.values());
    CHECK(a.free_map == b.free_map);
  }
}

TEST_CASE("Poisson energy increases monotonically under refinement (f = 1)") {
  // discrete energy (f, u_h) increases to the exact energy from below
  Mesh2D m = generate(OuterRect{1.0, 1.0}, std::nullopt, 0.25, 0.25, 0.3);
  double prev = 0.0;
  for (int level = 0; level < 3; ++level) {
    if (level > 0) m = refine_uniform(m);
    const DiscreteOperator op = assemble(m, 1);
    const std::vector<double> f(op.stiffness.rows(), 1.0);
    const std::vector<double> rhs = spmv(op.mass, f);
    Eigen::MatrixXd K = to_dense(op.stiffness);
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), rhs.size());
    const Eigen::VectorXd u = Eigen::LLT<Eigen::MatrixXd>(K).solve(b);
    const double energy = b.dot(u);
    CHECK(energy > prev);
    prev = energy;
  }
  // exact energy sum_{m,n odd} 64/(pi^6 m^2 n^2 (m^2+n^2)) bounds from above
  double exact = 0.0;
  for (int mm = 1; mm < 200; mm += 2) {
    for (int nn = 1; nn < 200; nn += 2) {
      exact += 64.0 / (std::pow(kPi, 6) * mm * mm * nn * nn * (mm * mm + nn * nn));
    }
  }
  CHECK(prev < exact);
  CHECK(prev == doctest::Approx(exact).epsilon(2e-3));
}

TEST_CASE("P2 beats P1 at equal mesh on a smooth interpolation problem") {
  const Mesh2D m = neumann_square(0.25);
  const DiscreteOperator p2 = assemble(m, 2);
  // P2 has vertex + edge dofs
  CHECK(p2.nodes.size() > m.vertices.size());
  DiscreteField sf{std::vector<double>(p2.free_map.size()), p2.id};
  for (std::size_t f = 0; f < p2.free_map.size(); ++f) {
    const Vec2& p = p2.nodes[p2.free_map[f]];
    sf.coefficients[f] = std::sin(kPi * p.x) * std::sin(kPi * p.y);
  }
  const double err_p2 = std::abs(evaluate(sf, p2, m, {0.52, 0.47}) -
                                 std::sin(kPi * 0.52) * std::sin(kPi * 0.47));
  const DiscreteOperator p1 = assemble(m, 1);
  DiscreteField sf1{std::vector<double>(p1.free_map.size()), p1.id};
  for (std::size_t f = 0; f < p1.free_map.size(); ++f) {
    const Vec2& p = p1.nodes[p1.free_map[f]];
    sf1.coefficients[f] = std::sin(kPi * p.x) * std::sin(kPi * p.y);
  }
  const double err_p1 = std::abs(evaluate(sf1, p1, m, {0.52, 0.47}) -
                                 std::sin(kPi * 0.52) * std::sin(kPi * 0.47));
  CHECK(err_p2 < 0.2 * err_p1);
}

TEST_CASE("degenerate triangle raises SingularElement") {
  Mesh2D m = single_triangle();
  m.vertices[2] = {2.0, 0.0};  // collinear
  CHECK_THROWS_AS(assemble(m, 1), SingularElement);
}
