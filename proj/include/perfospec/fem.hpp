#pragma once

#include <vector>

#include "perfospec/mesh.hpp"
#include "perfospec/parallel.hpp"
#include "perfospec/sparse.hpp"
#include "perfospec/vec2.hpp"

namespace perfospec {

/// Assembled stiffness/mass pair over the free (non-Dirichlet) dofs.
/// Outer-tagged nodes are eliminated; the hole boundary carries the natural
/// (do-nothing) Neumann condition, so it contributes no terms.
struct DiscreteOperator {
  CsrMatrix stiffness;
  CsrMatrix mass;
  std::vector<int> free_map;      // free dof -> node
  std::vector<int> node_to_free;  // node -> free dof, -1 when eliminated
  std::vector<Vec2> nodes;        // vertices, then P2 edge nodes
  std::vector<std::array<int, 6>> element_dofs;  // per triangle; [3..5] = -1 for P1
  int order = 1;
  int id = 0;
};

struct DiscreteField {
  std::vector<double> coefficients;  // over free dofs
  int operator_id = 0;
};

/// P1 or P2 assembly. Element matrices are integrated exactly (3-point Gauss
/// for the P2 stiffness, a degree-4 rule for the P2 mass). The parallel path
/// computes element matrices concurrently and scatters them in element order,
/// so both policies produce bit-identical matrices.
DiscreteOperator assemble(const Mesh2D& mesh, int order,
                          ExecPolicy policy = ExecPolicy::Parallel);

/// Cached point-location structure (neighbor walk with warm start).
class PointLocator {
 public:
  explicit PointLocator(const Mesh2D& mesh);
  /// Containing triangle id; throws OutsideDomain.
  int locate(const Vec2& p) const;

 private:
  const Mesh2D& mesh_;
  std::vector<std::array<int, 3>> neighbors_;
  mutable int hint_ = 0;
};

/// Field value at p (binds eliminated dofs to zero).
double evaluate(const DiscreteField& field, const DiscreteOperator& op, const Mesh2D& mesh,
                const PointLocator& locator, const Vec2& p);
double evaluate(const DiscreteField& field, const DiscreteOperator& op, const Mesh2D& mesh,
                const Vec2& p);

/// Gradient at p from a least-squares quadratic fit over all nodes within
/// `radius`; exact on quadratics, O(h^2) on smooth fields. Throws
/// InsufficientSamples when fewer than 12 nodes fall in the patch.
Vec2 recover_gradient(const DiscreteField& field, const DiscreteOperator& op,
                      const Mesh2D& mesh, const Vec2& p, double radius);

/// Nodal values including eliminated (zero) dofs.
std::vector<double> scatter_to_nodes(const DiscreteField& field, const DiscreteOperator& op);

}  // namespace perfospec
