#include <cmath>

#include "perfospec/asymptotics.hpp"
#include "perfospec/eigensolver.hpp"
#include "perfospec/errors.hpp"
#include "perfospec/fem.hpp"
#include "perfospec/mesh.hpp"

namespace perfospec {

UnperturbedData numeric_unperturbed(const Mesh2D& mesh, int i, const Vec2& center,
                                    double solver_tol) {
  if (i < 1) throw Error("numeric_unperturbed: mode index starts at 1");
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == BoundaryTag::Hole) {
      throw Error("numeric_unperturbed: mesh must be hole-free");
    }
  }
  const DiscreteOperator op = assemble(mesh, 1);
  const Spectrum spec = smallest_eigenpairs(op, i + 2, solver_tol);

  const double mu = spec.eigenvalues[i - 1];
  double gap = spec.eigenvalues[i] - mu;
  if (i >= 2) gap = std::min(gap, mu - spec.eigenvalues[i - 2]);
  if (!(gap > 10.0 * solver_tol * mu)) {
    throw DegenerateMode("numeric_unperturbed: discrete eigenvalue gap too small");
  }

  const DiscreteField& phi = spec.eigenvectors[i - 1];
  const PointLocator locator(mesh);
  double phi_c = evaluate(phi, op, mesh, locator, center);

  // patch radius from the local triangle size
  const int t = locator.locate(center);
  double local_h = 0.0;
  for (int j = 0; j < 3; ++j) {
    const Vec2& a = mesh.vertices[mesh.triangles[t][j]];
    const Vec2& b = mesh.vertices[mesh.triangles[t][(j + 1) % 3]];
    local_h = std::max(local_h, dist(a, b));
  }
  Vec2 grad = recover_gradient(phi, op, mesh, center, 4.0 * local_h);

  double sign = 1.0;
  if (std::abs(phi_c) > 1e-9) {
    sign = phi_c >= 0 ? 1.0 : -1.0;
  } else {
    const double lead = std::abs(grad.x) > std::abs(grad.y) ? grad.x : grad.y;
    sign = lead >= 0 ? 1.0 : -1.0;
  }

  UnperturbedData d;
  d.mu = mu;
  d.phi_at_center = sign * phi_c;
  d.grad_at_center = sign * grad;
  d.gap = gap;
  d.source = UnperturbedData::Source::Numeric;
  return d;
}

}  // namespace perfospec
