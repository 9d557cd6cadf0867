#pragma once

// Test-side oracles, independent of the implementation paths they check.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "perfospec/fem.hpp"
#include "perfospec/geometry.hpp"
#include "perfospec/mesh.hpp"

namespace perfospec::testing {

/// Deterministic 64-bit LCG for property-style tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed * 2862933555777941757ULL + 3037000493ULL) {}
  double uniform(double lo, double hi) {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    const double u = static_cast<double>(state_ >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform(0.0, 1.0) * (hi - lo + 1)) % (hi - lo + 1);
  }

 private:
  std::uint64_t state_;
};

/// Dense reference assembly (P1): direct nodal integration with no sparse
/// machinery shared with the implementation.
inline void dense_p1_assembly(const Mesh2D& mesh, Eigen::MatrixXd& K, Eigen::MatrixXd& M) {
  const int nv = static_cast<int>(mesh.vertices.size());
  K = Eigen::MatrixXd::Zero(nv, nv);
  M = Eigen::MatrixXd::Zero(nv, nv);
  for (const auto& t : mesh.triangles) {
    const Vec2& a = mesh.vertices[t[0]];
    const Vec2& b = mesh.vertices[t[1]];
    const Vec2& c = mesh.vertices[t[2]];
    const double area2 = (b - a).cross(c - a);
    const double area = 0.5 * area2;
    const Vec2 g[3] = {{(b.y - c.y) / area2, (c.x - b.x) / area2},
                       {(c.y - a.y) / area2, (a.x - c.x) / area2},
                       {(a.y - b.y) / area2, (b.x - a.x) / area2}};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        K(t[i], t[j]) += area * g[i].dot(g[j]);
        M(t[i], t[j]) += area / 12.0 * (i == j ? 2.0 : 1.0);
      }
    }
  }
}

/// Dense generalized symmetric eigensolver oracle over the free dofs.
inline std::vector<double> dense_generalized_eigenvalues(const DiscreteOperator& op) {
  const int n = op.stiffness.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    for (std::int64_t k = op.stiffness.row_ptr()[r]; k < op.stiffness.row_ptr()[r + 1]; ++k) {
      A(r, op.stiffness.col_idx()[k]) = op.stiffness.values()[k];
    }
    for (std::int64_t k = op.mass.row_ptr()[r]; k < op.mass.row_ptr()[r + 1]; ++k) {
      B(r, op.mass.col_idx()[k]) = op.mass.values()[k];
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  return {es.eigenvalues().data(), es.eigenvalues().data() + n};
}

inline StarShape circle_shape(double r = 1.0) {
  StarShape s;
  s.beta = AngularFunction::constant_fn(r);
  s.omega = AngularFunction::constant_fn(r);
  return s;
}

inline StarShape ellipse_shape(double a, double b) {
  StarShape s;
  s.beta = AngularFunction::constant_fn(a);
  s.omega = AngularFunction::constant_fn(b);
  return s;
}

/// The four-lobed example shape: beta = 2 + cos 4t,
/// omega = 34/15 + (8/15) cos 2t + (1/5) cos 4t.
inline StarShape flower_shape() {
  StarShape s;
  s.beta = AngularFunction{2.0, {0.0, 0.0, 0.0, 1.0}, {}};
  s.omega = AngularFunction{34.0 / 15.0, {0.0, 8.0 / 15.0, 0.0, 0.2}, {}};
  return s;
}

}  // namespace perfospec::testing
