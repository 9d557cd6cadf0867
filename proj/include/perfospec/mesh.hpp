#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "perfospec/geometry.hpp"
#include "perfospec/vec2.hpp"

namespace perfospec {

enum class BoundaryTag : std::uint8_t { Outer, Hole };

struct BoundaryEdge {
  int a = -1;
  int b = -1;
  BoundaryTag tag = BoundaryTag::Outer;
};

struct MeshSizing {
  double h_far = 0.0;
  double h_near = 0.0;
  double grading = 1.0;
};

/// Rectangle (0,a) x (0,b).
struct OuterRect {
  double a = 1.0;
  double b = 1.0;
};

struct OuterDisk {
  Vec2 center;
  double R = 1.0;
};

using OuterDomain = std::variant<OuterRect, OuterDisk>;

/// Conforming triangulation of the (possibly perforated) outer domain.
/// Triangles are CCW; boundary edges carry Outer/Dirichlet vs Hole/Neumann
/// tags. Vertex tags and curve parameters are kept so refinement can snap
/// boundary midpoints back onto the exact curves.
struct Mesh2D {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  MeshSizing sizing;

  std::vector<std::uint8_t> vertex_tag;  // 0 interior, 1 outer, 2 hole
  std::vector<double> vertex_param;      // curve parameter, NaN when unsnapped

  std::optional<HoleInstance> hole;
  std::optional<OuterDisk> outer_disk;
};

struct QualityReport {
  double min_angle_deg = 0.0;
  double max_aspect = 0.0;
  int triangle_count = 0;
  double min_h = 0.0;
  double max_h = 0.0;
};

/// Constrained Delaunay (Bowyer-Watson) triangulation with Ruppert-style
/// refinement to a 20-degree angle bound and the sizing field
/// h(x) = min(h_far, h_near + grading * dist(x, hole boundary)).
/// Deterministic: sorted insertion order, no randomness.
Mesh2D generate(const OuterDomain& outer, const std::optional<HoleInstance>& hole,
                double h_far, double h_near, double grading);

/// 1:4 split at edge midpoints; hole / curved-outer midpoints snapped to the
/// exact curve. Triangle count exactly x4.
Mesh2D refine_uniform(const Mesh2D& mesh);

QualityReport quality(const Mesh2D& mesh);

/// Checks the structural invariants, throws Error with a description on the
/// first violation: positive areas, conformity, boundary loop counts, Euler
/// characteristic, angle bound, hole-vertex snap distance.
void validate_mesh(const Mesh2D& mesh);

double mesh_area(const Mesh2D& mesh);
double triangle_area(const Mesh2D& mesh, int t);

/// Plain-text serialization: $Vertices / $Triangles / $BoundaryEdges,
/// 1-based indices, tags as strings.
void save_mesh(const Mesh2D& mesh, const std::string& path);
Mesh2D load_mesh(const std::string& path);
std::string mesh_to_text(const Mesh2D& mesh);
Mesh2D mesh_from_text(const std::string& text);

}  // namespace perfospec
