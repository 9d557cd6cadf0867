#include "perfospec/fem.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "perfospec/errors.hpp"

namespace perfospec {

namespace {

std::atomic<int> g_operator_counter{0};

struct ElementMatrices {
  // up to 6 local dofs (P2); row-major
  std::array<double, 36> stiffness{};
  std::array<double, 36> mass{};
};

// degree-4 rule on the reference triangle (6 points), exact for P2 mass
struct QuadPoint {
  double l0, l1, l2, w;
};
constexpr std::array<QuadPoint, 6> kDegree4Rule = {{
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
}};

// 3-point Gauss (degree 2), exact for the P2 stiffness integrand
constexpr std::array<QuadPoint, 3> kDegree2Rule = {{
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0},
}};

void p2_shape(const double l[3], double n[6]) {
  n[0] = l[0] * (2.0 * l[0] - 1.0);
  n[1] = l[1] * (2.0 * l[1] - 1.0);
  n[2] = l[2] * (2.0 * l[2] - 1.0);
  n[3] = 4.0 * l[0] * l[1];
  n[4] = 4.0 * l[1] * l[2];
  n[5] = 4.0 * l[2] * l[0];
}

ElementMatrices element_matrices(const Vec2& a, const Vec2& b, const Vec2& c, int order) {
  const double area2 = (b - a).cross(c - a);
  if (area2 <= 0.0) throw SingularElement("assemble: degenerate triangle");
  const double area = 0.5 * area2;
  // grad of barycentric coordinates
  const Vec2 g[3] = {{(b.y - c.y) / area2, (c.x - b.x) / area2},
                     {(c.y - a.y) / area2, (a.x - c.x) / area2},
                     {(a.y - b.y) / area2, (b.x - a.x) / area2}};
  ElementMatrices em;
  if (order == 1) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        em.stiffness[i * 3 + j] = area * g[i].dot(g[j]);
        em.mass[i * 3 + j] = area / 12.0 * (i == j ? 2.0 : 1.0);
      }
    }
    return em;
  }
  // P2
  for (const auto& q : kDegree2Rule) {
    const double l[3] = {q.l0, q.l1, q.l2};
    Vec2 gn[6];
    for (int i = 0; i < 3; ++i) gn[i] = (4.0 * l[i] - 1.0) * g[i];
    gn[3] = 4.0 * (l[0] * g[1] + l[1] * g[0]);
    gn[4] = 4.0 * (l[1] * g[2] + l[2] * g[1]);
    gn[5] = 4.0 * (l[2] * g[0] + l[0] * g[2]);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        em.stiffness[i * 6 + j] += q.w * area * gn[i].dot(gn[j]);
      }
    }
  }
  for (const auto& q : kDegree4Rule) {
    const double l[3] = {q.l0, q.l1, q.l2};
    double n[6];
    p2_shape(l, n);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        em.mass[i * 6 + j] += q.w * area * n[i] * n[j];
      }
    }
  }
  return em;
}

}  // namespace

DiscreteOperator assemble(const Mesh2D& mesh, int order, ExecPolicy policy) {
  if (order != 1 && order != 2) throw Error("assemble: order must be 1 or 2");
  const int nv = static_cast<int>(mesh.vertices.size());
  const int nt = static_cast<int>(mesh.triangles.size());

  DiscreteOperator op;
  op.order = order;
  op.id = ++g_operator_counter;
  op.nodes = mesh.vertices;

  // P2 edge nodes in first-seen triangle order
  std::vector<std::array<int, 6>> elem_dofs(nt);
  std::map<std::pair<int, int>, int> edge_node;
  std::map<std::pair<int, int>, BoundaryTag> boundary_tag;
  for (const auto& e : mesh.boundary_edges) {
    boundary_tag[{std::min(e.a, e.b), std::max(e.a, e.b)}] = e.tag;
  }
  std::vector<std::uint8_t> node_tag(mesh.vertex_tag.begin(), mesh.vertex_tag.end());
  node_tag.resize(nv, 0);
  if (order == 2) {
    for (int t = 0; t < nt; ++t) {
      const auto& tri = mesh.triangles[t];
      for (int j = 0; j < 3; ++j) elem_dofs[t][j] = tri[j];
      const std::array<std::pair<int, int>, 3> edges = {
          std::pair{tri[0], tri[1]}, std::pair{tri[1], tri[2]}, std::pair{tri[2], tri[0]}};
      for (int j = 0; j < 3; ++j) {
        const auto k = std::make_pair(std::min(edges[j].first, edges[j].second),
                                      std::max(edges[j].first, edges[j].second));
        auto it = edge_node.find(k);
        int id;
        if (it == edge_node.end()) {
          id = static_cast<int>(op.nodes.size());
          op.nodes.push_back(0.5 * (mesh.vertices[k.first] + mesh.vertices[k.second]));
          auto bt = boundary_tag.find(k);
          node_tag.push_back(bt == boundary_tag.end()
                                 ? 0
                                 : (bt->second == BoundaryTag::Hole ? 2 : 1));
          edge_node[k] = id;
        } else {
          id = it->second;
        }
        elem_dofs[t][3 + j] = id;
      }
    }
  } else {
    for (int t = 0; t < nt; ++t) {
      const auto& tri = mesh.triangles[t];
      elem_dofs[t] = {tri[0], tri[1], tri[2], -1, -1, -1};
    }
  }

  const int n_nodes = static_cast<int>(op.nodes.size());
  op.node_to_free.assign(n_nodes, -1);
  for (int v = 0; v < n_nodes; ++v) {
    if (node_tag[v] != 1) {  // Outer nodes eliminated
      op.node_to_free[v] = static_cast<int>(op.free_map.size());
      op.free_map.push_back(v);
    }
  }
  const int n_free = static_cast<int>(op.free_map.size());

  // element matrices in parallel, deterministic element-order scatter
  std::vector<ElementMatrices> em(nt);
  std::atomic<bool> singular{false};
  parallel_for(
      nt,
      [&](std::int64_t t) {
        const auto& tri = mesh.triangles[t];
        try {
          em[t] = element_matrices(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                   mesh.vertices[tri[2]], order);
        } catch (const SingularElement&) {
          singular = true;
        }
      },
      policy);
  if (singular) throw SingularElement("assemble: degenerate triangle");

  const int ndofs = order == 1 ? 3 : 6;
  std::vector<Triplet> ka, ma;
  ka.reserve(static_cast<std::size_t>(nt) * ndofs * ndofs);
  ma.reserve(static_cast<std::size_t>(nt) * ndofs * ndofs);
  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < ndofs; ++i) {
      const int fi = op.node_to_free[elem_dofs[t][i]];
      if (fi < 0) continue;
      for (int j = 0; j < ndofs; ++j) {
        const int fj = op.node_to_free[elem_dofs[t][j]];
        if (fj < 0) continue;
        ka.push_back({fi, fj, em[t].stiffness[i * ndofs + j]});
        ma.push_back({fi, fj, em[t].mass[i * ndofs + j]});
      }
    }
  }
  op.stiffness = CsrMatrix(n_free, n_free, std::move(ka));
  op.mass = CsrMatrix(n_free, n_free, std::move(ma));
  op.element_dofs = std::move(elem_dofs);
  return op;
}

PointLocator::PointLocator(const Mesh2D& mesh) : mesh_(mesh) {
  const int nt = static_cast<int>(mesh.triangles.size());
  neighbors_.assign(nt, {-1, -1, -1});
  std::map<std::pair<int, int>, std::pair<int, int>> half;  // edge -> (tri, slot)
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int j = 0; j < 3; ++j) {
      const int u = tri[(j + 1) % 3];
      const int v = tri[(j + 2) % 3];
      const auto k = std::make_pair(std::min(u, v), std::max(u, v));
      auto it = half.find(k);
      if (it == half.end()) {
        half[k] = {t, j};
      } else {
        neighbors_[t][j] = it->second.first;
        neighbors_[it->second.first][it->second.second] = t;
      }
    }
  }
}

namespace {
double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b - a).cross(c - a);
}
}  // namespace

int PointLocator::locate(const Vec2& p) const {
  const int nt = static_cast<int>(mesh_.triangles.size());
  int t = hint_ >= 0 && hint_ < nt ? hint_ : 0;
  const double tol = -1e-13;
  for (int step = 0; step < 2 * nt + 16; ++step) {
    const auto& tri = mesh_.triangles[t];
    int cross = -1;
    double worst = tol;
    for (int j = 0; j < 3; ++j) {
      const double o = orient(mesh_.vertices[tri[(j + 1) % 3]], mesh_.vertices[tri[(j + 2) % 3]], p);
      if (o < worst) {
        worst = o;
        cross = j;
      }
    }
    if (cross < 0) {
      hint_ = t;
      return t;
    }
    const int next = neighbors_[t][cross];
    if (next < 0) break;  // walked into a boundary; exhaustive fallback below
    t = next;
  }
  for (int i = 0; i < nt; ++i) {
    const auto& tri = mesh_.triangles[i];
    bool inside = true;
    for (int j = 0; j < 3 && inside; ++j) {
      inside = orient(mesh_.vertices[tri[(j + 1) % 3]], mesh_.vertices[tri[(j + 2) % 3]], p) >= tol;
    }
    if (inside) {
      hint_ = i;
      return i;
    }
  }
  throw OutsideDomain("evaluate: point outside the meshed domain");
}

std::vector<double> scatter_to_nodes(const DiscreteField& field, const DiscreteOperator& op) {
  std::vector<double> full(op.nodes.size(), 0.0);
  for (std::size_t f = 0; f < op.free_map.size(); ++f) {
    full[op.free_map[f]] = field.coefficients[f];
  }
  return full;
}

double evaluate(const DiscreteField& field, const DiscreteOperator& op, const Mesh2D& mesh,
                const PointLocator& locator, const Vec2& p) {
  if (field.coefficients.size() != op.free_map.size()) {
    throw Error("evaluate: field does not match the operator");
  }
  const int t = locator.locate(p);
  const auto& tri = mesh.triangles[t];
  const Vec2& a = mesh.vertices[tri[0]];
  const Vec2& b = mesh.vertices[tri[1]];
  const Vec2& c = mesh.vertices[tri[2]];
  const double area2 = (b - a).cross(c - a);
  double l[3];
  l[0] = (b - p).cross(c - p) / area2;
  l[1] = (c - p).cross(a - p) / area2;
  l[2] = (a - p).cross(b - p) / area2;

  auto value_at = [&](int node) {
    const int f = op.node_to_free[node];
    return f >= 0 ? field.coefficients[f] : 0.0;
  };
  if (op.order == 1) {
    return l[0] * value_at(tri[0]) + l[1] * value_at(tri[1]) + l[2] * value_at(tri[2]);
  }
  double n[6];
  p2_shape(l, n);
  double v = 0.0;
  for (int j = 0; j < 6; ++j) v += n[j] * value_at(op.element_dofs[t][j]);
  return v;
}

double evaluate(const DiscreteField& field, const DiscreteOperator& op, const Mesh2D& mesh,
                const Vec2& p) {
  const PointLocator locator(mesh);
  return evaluate(field, op, mesh, locator, p);
}

Vec2 recover_gradient(const DiscreteField& field, const DiscreteOperator& op,
                      const Mesh2D& mesh, const Vec2& p, double radius) {
  (void)mesh;
  if (field.coefficients.size() != op.free_map.size()) {
    throw Error("recover_gradient: field does not match the operator");
  }
  const std::vector<double> full = scatter_to_nodes(field, op);
  std::vector<int> patch;
  for (int v = 0; v < static_cast<int>(op.nodes.size()); ++v) {
    if (dist(op.nodes[v], p) <= radius) patch.push_back(v);
  }
  if (static_cast<int>(patch.size()) < 12) {
    throw InsufficientSamples("recover_gradient: fewer than 12 nodes in the patch");
  }
  Eigen::MatrixXd A(patch.size(), 6);
  Eigen::VectorXd rhs(patch.size());
  for (std::size_t r = 0; r < patch.size(); ++r) {
    const double dx = (op.nodes[patch[r]].x - p.x) / radius;
    const double dy = (op.nodes[patch[r]].y - p.y) / radius;
    A(r, 0) = 1.0;
    A(r, 1) = dx;
    A(r, 2) = dy;
    A(r, 3) = dx * dx;
    A(r, 4) = dx * dy;
    A(r, 5) = dy * dy;
    rhs(r) = full[patch[r]];
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
  return {coef(1) / radius, coef(2) / radius};
}

}  // namespace perfospec
