#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "perfospec/eigensolver.hpp"
#include "perfospec/errors.hpp"
#include "support/oracles.hpp"

using namespace perfospec;
using namespace perfospec::testing;

namespace {
constexpr double kPi = std::numbers::pi;

DiscreteOperator tiny_diag() {
  DiscreteOperator op;
  op.stiffness = CsrMatrix(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}});
  op.mass = CsrMatrix(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
  op.free_map = {0, 1};
  op.node_to_free = {0, 1};
  op.nodes = {{0, 0}, {1, 0}};
  op.id = 1;
  return op;
}

Mesh2D square_mesh(double h, int refinements = 0) {
  Mesh2D m = generate(OuterRect{1.0, 1.0}, std::nullopt, h, h, 0.3);
  for (int l = 0; l < refinements; ++l) m = refine_uniform(m);
  return m;
}
}  // namespace

TEST_CASE("2x2 diagonal system") {
  const Spectrum s = smallest_eigenpairs(tiny_diag(), 2, 1e-10);
  REQUIRE(s.eigenvalues.size() == 2);
  CHECK(s.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(s.eigenvectors[0].coefficients[0]) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(s.eigenvectors[0].coefficients[1]) <= 1e-10);
  CHECK(std::abs(s.eigenvectors[1].coefficients[1]) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.residuals[0] <= 1e-12);
}

TEST_CASE("residual operator") {
  const DiscreteOperator op = tiny_diag();
  DiscreteField v{{1.0, 0.0}, 1};
  CHECK(residual_norm(op, 2.0, v) == doctest::Approx(0.0));
  // perturbation grows the residual linearly to first order
  DiscreteField v1{{1.0, 1e-6}, 1};
  DiscreteField v2{{1.0, 2e-6}, 1};
  CHECK(residual_norm(op, 2.0, v2) == doctest::Approx(2.0 * residual_norm(op, 2.0, v1)).epsilon(1e-5));
}

TEST_CASE("unit square fundamental mode: upper bound within 0.5%") {
  const Mesh2D m = square_mesh(0.125, 2);  // h about 1/32
  const DiscreteOperator op = assemble(m, 1);
  const Spectrum s = smallest_eigenpairs(op, 1, 1e-9);
  const double exact = 2.0 * kPi * kPi;
  CHECK(s.eigenvalues[0] > exact);  // conforming FEM approaches from above
  CHECK((s.eigenvalues[0] - exact) / exact <= 0.005);
  CHECK(s.residuals[0] <= 1e-9);
}

TEST_CASE("unit square: degenerate pair ratios 5/2 within 1%") {
  const Mesh2D m = square_mesh(0.125, 1);
  const DiscreteOperator op = assemble(m, 1);
  const Spectrum s = smallest_eigenpairs(op, 3, 1e-9);
  REQUIRE(s.eigenvalues.size() == 3);
  CHECK(s.eigenvalues[1] / s.eigenvalues[0] == doctest::Approx(2.5).epsilon(0.01));
  CHECK(s.eigenvalues[2] / s.eigenvalues[0] == doctest::Approx(2.5).epsilon(0.01));
}

TEST_CASE("mass orthonormality of the returned eigenvectors") {
  const Mesh2D m = square_mesh(0.2, 1);
  const DiscreteOperator op = assemble(m, 1);
  const Spectrum s = smallest_eigenpairs(op, 4, 1e-9);
  for (std::size_t i = 0; i < s.eigenvectors.size(); ++i) {
    const std::vector<double> bv = spmv(op.mass, s.eigenvectors[i].coefficients);
    for (std::size_t j = 0; j < s.eigenvectors.size(); ++j) {
      const double g = dot(s.eigenvectors[j].coefficients, bv);
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-8);
    }
  }
}

TEST_CASE("agreement with the dense oracle on small systems") {
  const Mesh2D m = generate(OuterRect{1.0, 1.0}, std::nullopt, 0.18, 0.18, 0.3);
  const DiscreteOperator op = assemble(m, 1);
  REQUIRE(op.stiffness.rows() <= 200);
  const Spectrum s = smallest_eigenpairs(op, 5, 1e-10);
  const std::vector<double> dense = dense_generalized_eigenvalues(op);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(s.eigenvalues[i] - dense[i]) / dense[i] <= 1e-9);
  }
}

TEST_CASE("deterministic: repeated solves are bit-identical") {
  const Mesh2D m = square_mesh(0.2, 1);
  const DiscreteOperator op = assemble(m, 1);
  const Spectrum a = smallest_eigenpairs(op, 3, 1e-9);
  const Spectrum b = smallest_eigenpairs(op, 3, 1e-9);
  CHECK(a.eigenvalues == b.eigenvalues);
  for (std::size_t i = 0; i < a.eigenvectors.size(); ++i) {
    CHECK(a.eigenvectors[i].coefficients == b.eigenvectors[i].coefficients);
  }
}

TEST_CASE("monotone mesh convergence with error ratio near 4") {
  // P1 eigenvalue error is O(h^2): successive-error ratios about 4
  const double exact = 2.0 * kPi * kPi;
  std::vector<double> errs;
  Mesh2D m = square_mesh(0.2);
  for (int level = 0; level < 3; ++level) {
    if (level > 0) m = refine_uniform(m);
    const DiscreteOperator op = assemble(m, 1);
    const Spectrum s = smallest_eigenpairs(op, 1, 1e-10);
    errs.push_back(s.eigenvalues[0] - exact);
    CHECK(errs.back() > 0.0);
    if (level > 0) CHECK(errs[level] < errs[level - 1]);
  }
  for (std::size_t l = 1; l < errs.size(); ++l) {
    CHECK(errs[l - 1] / errs[l] == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("first five square eigenvalues converge to pi^2 {2,5,5,8,10}") {
  const Mesh2D m = square_mesh(0.125, 2);
  const DiscreteOperator op = assemble(m, 1);
  const Spectrum s = smallest_eigenpairs(op, 5, 1e-9);
  const double expected[] = {2, 5, 5, 8, 10};
  for (int i = 0; i < 5; ++i) {
    CHECK(s.eigenvalues[i] > expected[i] * kPi * kPi);
    CHECK((s.eigenvalues[i] - expected[i] * kPi * kPi) / (expected[i] * kPi * kPi) <= 0.01);
  }
}

TEST_CASE("P2 eigenvalues are far more accurate than P1") {
  const Mesh2D m = square_mesh(0.2, 0);
  const double exact = 2.0 * kPi * kPi;
  const Spectrum s1 = smallest_eigenpairs(assemble(m, 1), 1, 1e-10);
  const Spectrum s2 = smallest_eigenpairs(assemble(m, 2), 1, 1e-10);
  CHECK(s2.eigenvalues[0] - exact < 0.02 * (s1.eigenvalues[0] - exact));
  CHECK(s2.eigenvalues[0] > exact);
}

TEST_CASE("failure modes") {
  DiscreteOperator op = tiny_diag();
  CHECK_THROWS_AS(smallest_eigenpairs(op, 2, 1e-2), Error);  // tol out of range
  CHECK_THROWS_AS(smallest_eigenpairs(op, 5, 1e-9), Error);  // k > dofs
  // indefinite "stiffness" (a BC bug) trips the factorization
  DiscreteOperator bad = tiny_diag();
  bad.stiffness = CsrMatrix(2, 2, {{0, 0, 2.0}, {1, 1, -3.0}});
  CHECK_THROWS_AS(smallest_eigenpairs(bad, 1, 1e-9), FactorizationFailure);
}
