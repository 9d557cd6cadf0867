#include "perfospec/mesh.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "perfospec/errors.hpp"

namespace perfospec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinAngleDeg = 20.0;
// circumradius / shortest-edge bound equivalent to the 20-degree angle bound
const double kRatioBound = 1.0 / (2.0 * std::sin(kMinAngleDeg * std::numbers::pi / 180.0));
constexpr std::int64_t kMaxInsertions = 400000;

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const long double acx = static_cast<long double>(a.x) - c.x;
  const long double acy = static_cast<long double>(a.y) - c.y;
  const long double bcx = static_cast<long double>(b.x) - c.x;
  const long double bcy = static_cast<long double>(b.y) - c.y;
  const long double det = acx * bcy - acy * bcx;
  const long double mag = std::abs(acx * bcy) + std::abs(acy * bcx);
  if (std::abs(det) <= 1e-18L * mag) return 0.0;
  return static_cast<double>(det);
}

// p strictly inside the circumcircle of CCW triangle (a,b,c)
bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
  const long double adx = static_cast<long double>(a.x) - p.x;
  const long double ady = static_cast<long double>(a.y) - p.y;
  const long double bdx = static_cast<long double>(b.x) - p.x;
  const long double bdy = static_cast<long double>(b.y) - p.y;
  const long double cdx = static_cast<long double>(c.x) - p.x;
  const long double cdy = static_cast<long double>(c.y) - p.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  const long double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                          ad * (bdx * cdy - bdy * cdx);
  const long double mag = std::abs(adx * bdy * cd) + std::abs(adx * bd * cdy) +
                          std::abs(ady * bdx * cd) + std::abs(ady * bd * cdx) +
                          std::abs(ad * bdx * cdy) + std::abs(ad * bdy * cdx);
  return det > 1e-17L * mag;
}

Vec2 circumcenter_of(const Vec2& a, const Vec2& b, const Vec2& c) {
  const long double ax = a.x, ay = a.y, bx = b.x, by = b.y, cx = c.x, cy = c.y;
  const long double d = 2.0L * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  const long double a2 = ax * ax + ay * ay;
  const long double b2 = bx * bx + by * by;
  const long double c2 = cx * cx + cy * cy;
  const long double ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
  const long double uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
  return {static_cast<double>(ux), static_cast<double>(uy)};
}

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp(ab.norm2() > 0 ? (p - a).dot(ab) / ab.norm2() : 0.0, 0.0, 1.0);
  return dist(p, a + t * ab);
}

struct DTri {
  std::array<int, 3> v{-1, -1, -1};   // CCW
  std::array<int, 3> nb{-1, -1, -1};  // nb[i] across the edge opposite v[i]
  bool alive = true;
  std::int8_t region = -1;  // -1 unknown, 0 outside, 1 domain, 2 hole interior
};

struct SplitPoint {
  Vec2 chord_mid;   // exact midpoint of the existing edge
  Vec2 snapped;     // position on the exact curve (== chord_mid for straight edges)
  double param = std::numeric_limits<double>::quiet_NaN();
};

class Triangulator {
 public:
  std::vector<Vec2> pts;
  std::vector<std::uint8_t> tag;  // 0 interior, 1 outer, 2 hole
  std::vector<double> param;
  std::vector<DTri> tris;
  std::vector<int> vert_tri;  // an alive incident triangle per vertex
  std::set<std::pair<int, int>> constraints;
  std::vector<int> last_created;
  std::int64_t insertions = 0;
  double snap_tol = 0.0;

  const HoleInstance* hole = nullptr;
  const OuterDisk* disk = nullptr;

  void init_super(const Vec2& lo, const Vec2& hi) {
    const Vec2 c = 0.5 * (lo + hi);
    const double s = 50.0 * std::max({hi.x - lo.x, hi.y - lo.y, 1e-3});
    snap_tol = 1e-12 * s;
    add_vertex({c.x - 2.0 * s, c.y - s}, 0, nan_());
    add_vertex({c.x + 2.0 * s, c.y - s}, 0, nan_());
    add_vertex({c.x, c.y + 2.0 * s}, 0, nan_());
    DTri t;
    t.v = {0, 1, 2};
    tris.push_back(t);
    vert_tri = {0, 0, 0};
  }

  static double nan_() { return std::numeric_limits<double>::quiet_NaN(); }

  int add_vertex(const Vec2& p, std::uint8_t tg, double prm) {
    pts.push_back(p);
    tag.push_back(tg);
    param.push_back(prm);
    vert_tri.push_back(-1);
    return static_cast<int>(pts.size()) - 1;
  }

  static std::pair<int, int> key(int u, int v) { return {std::min(u, v), std::max(u, v)}; }
  bool is_constrained(int u, int v) const { return constraints.count(key(u, v)) > 0; }

  int locate(const Vec2& p, int hint) const {
    int t = hint >= 0 && hint < static_cast<int>(tris.size()) && tris[hint].alive ? hint : -1;
    if (t < 0) {
      for (int i = static_cast<int>(tris.size()) - 1; i >= 0; --i) {
        if (tris[i].alive) {
          t = i;
          break;
        }
      }
    }
    const std::int64_t cap = 4 * static_cast<std::int64_t>(tris.size()) + 64;
    for (std::int64_t step = 0; step < cap; ++step) {
      const DTri& tr = tris[t];
      int cross = -1;
      for (int j = 0; j < 3; ++j) {
        const Vec2& u = pts[tr.v[(j + 1) % 3]];
        const Vec2& w = pts[tr.v[(j + 2) % 3]];
        if (orient2d(u, w, p) < 0.0) {
          cross = j;
          break;
        }
      }
      if (cross < 0) return t;
      const int next = tr.nb[cross];
      if (next < 0 || !tris[next].alive) break;  // walked off; fall through to scan
      t = next;
    }
    for (int i = 0; i < static_cast<int>(tris.size()); ++i) {
      if (!tris[i].alive) continue;
      const DTri& tr = tris[i];
      bool inside = true;
      for (int j = 0; j < 3 && inside; ++j) {
        inside = orient2d(pts[tr.v[(j + 1) % 3]], pts[tr.v[(j + 2) % 3]], p) >= 0.0;
      }
      if (inside) return i;
    }
    throw GeometryError("triangulation: point location failed");
  }

  // Bowyer-Watson insertion. When `blocked`, the cavity never crosses a
  // constrained edge, so new triangles inherit the region of the triangles
  // they replace. Returns the vertex id (an existing one if p snaps onto it);
  // created triangle ids are left in last_created.
  int insert(const Vec2& p, std::uint8_t tg, double prm, bool blocked, int hint = -1) {
    last_created.clear();
    const int t0 = locate(p, hint);
    for (int j = 0; j < 3; ++j) {
      const int vid = tris[t0].v[j];
      if (dist(pts[vid], p) <= snap_tol) return vid;
    }
    if (++insertions > kMaxInsertions) {
      throw RefinementStall("mesh generation exceeded the insertion budget");
    }

    // cavity BFS
    std::vector<int> cavity{t0};
    std::map<int, bool> in_cavity;
    in_cavity[t0] = true;
    for (std::size_t head = 0; head < cavity.size(); ++head) {
      const int t = cavity[head];
      for (int j = 0; j < 3; ++j) {
        const int n = tris[t].nb[j];
        if (n < 0 || in_cavity.count(n)) continue;
        const int u = tris[t].v[(j + 1) % 3];
        const int w = tris[t].v[(j + 2) % 3];
        if (blocked && is_constrained(u, w)) continue;
        const DTri& nt = tris[n];
        if (in_circumcircle(pts[nt.v[0]], pts[nt.v[1]], pts[nt.v[2]], p)) {
          in_cavity[n] = true;
          cavity.push_back(n);
        }
      }
    }

    // retraction: every cavity boundary edge must be strictly visible from p
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t idx = 0; idx < cavity.size(); ++idx) {
        const int t = cavity[idx];
        if (t == t0) continue;
        bool keep = true;
        for (int j = 0; j < 3 && keep; ++j) {
          const int n = tris[t].nb[j];
          if (n >= 0 && in_cavity.count(n) && in_cavity.at(n)) continue;
          const Vec2& u = pts[tris[t].v[(j + 1) % 3]];
          const Vec2& w = pts[tris[t].v[(j + 2) % 3]];
          if (orient2d(u, w, p) <= 0.0) keep = false;
        }
        if (!keep) {
          in_cavity.erase(t);
          cavity.erase(cavity.begin() + static_cast<std::ptrdiff_t>(idx));
          changed = true;
          break;
        }
      }
    }

    // collect boundary edges (u, w, outside tri, outside slot, inherited region)
    struct Bnd {
      int u, w, out_tri, out_slot;
      std::int8_t region;
    };
    std::vector<Bnd> boundary;
    for (const int t : cavity) {
      for (int j = 0; j < 3; ++j) {
        const int n = tris[t].nb[j];
        if (n >= 0 && in_cavity.count(n)) continue;
        const int u = tris[t].v[(j + 1) % 3];
        const int w = tris[t].v[(j + 2) % 3];
        int out_slot = -1;
        if (n >= 0) {
          for (int k = 0; k < 3; ++k) {
            if (tris[n].nb[k] == t) out_slot = k;
          }
        }
        boundary.push_back({u, w, n, out_slot, tris[t].region});
      }
    }

    const int pid = add_vertex(p, tg, prm);
    std::map<int, std::pair<int, int>> side;  // shared-vertex -> (tri, slot)
    for (const Bnd& e : boundary) {
      DTri nt;
      nt.v = {e.u, e.w, pid};
      nt.nb = {-1, -1, e.out_tri};
      nt.region = e.region;
      const int ti = static_cast<int>(tris.size());
      tris.push_back(nt);
      last_created.push_back(ti);
      if (e.out_tri >= 0) tris[e.out_tri].nb[e.out_slot] = ti;
      // side edge (w,pid) is opposite u (slot 0); (pid,u) is opposite w (slot 1)
      for (const auto& [vx, slot] : {std::pair{e.w, 0}, std::pair{e.u, 1}}) {
        auto it = side.find(vx);
        if (it == side.end()) {
          side[vx] = {ti, slot};
        } else {
          tris[ti].nb[slot] = it->second.first;
          tris[it->second.first].nb[it->second.second] = ti;
          side.erase(it);
        }
      }
      vert_tri[e.u] = ti;
      vert_tri[e.w] = ti;
      vert_tri[pid] = ti;
    }
    for (const int t : cavity) tris[t].alive = false;
    return pid;
  }

  // triangles incident to vertex u (BFS across edges containing u)
  std::vector<int> fan(int u) const {
    std::vector<int> out;
    if (vert_tri[u] < 0) return out;
    std::set<int> seen;
    std::vector<int> stack{vert_tri[u]};
    seen.insert(vert_tri[u]);
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      if (!tris[t].alive) continue;
      bool has_u = false;
      for (int j = 0; j < 3; ++j) has_u = has_u || tris[t].v[j] == u;
      if (!has_u) continue;
      out.push_back(t);
      for (int j = 0; j < 3; ++j) {
        if (tris[t].v[j] == u) continue;  // edge opposite u does not contain u
        const int n = tris[t].nb[j];
        if (n >= 0 && tris[n].alive && !seen.count(n)) {
          seen.insert(n);
          stack.push_back(n);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // (tri, slot) such that the edge opposite `slot` is {u,v}; (-1,-1) if absent
  std::pair<int, int> find_edge(int u, int v) const {
    for (const int t : fan(u)) {
      for (int j = 0; j < 3; ++j) {
        const int x = tris[t].v[(j + 1) % 3];
        const int y = tris[t].v[(j + 2) % 3];
        if ((x == u && y == v) || (x == v && y == u)) return {t, j};
      }
    }
    return {-1, -1};
  }

  SplitPoint split_point(int u, int v) const {
    SplitPoint sp;
    sp.chord_mid = 0.5 * (pts[u] + pts[v]);
    sp.snapped = sp.chord_mid;
    const bool hole_edge = tag[u] == 2 && tag[v] == 2 && hole != nullptr;
    const bool disk_edge = tag[u] == 1 && tag[v] == 1 && disk != nullptr;
    if (hole_edge && std::isfinite(param[u]) && std::isfinite(param[v])) {
      double d = std::fmod(param[v] - param[u], kTwoPi);
      if (d > std::numbers::pi) d -= kTwoPi;
      if (d <= -std::numbers::pi) d += kTwoPi;
      sp.param = param[u] + 0.5 * d;
      sp.snapped = hole->center + hole->epsilon * boundary_point(hole->shape, sp.param);
    } else if (disk_edge && std::isfinite(param[u]) && std::isfinite(param[v])) {
      double d = std::fmod(param[v] - param[u], kTwoPi);
      if (d > std::numbers::pi) d -= kTwoPi;
      if (d <= -std::numbers::pi) d += kTwoPi;
      sp.param = param[u] + 0.5 * d;
      sp.snapped = disk->center + Vec2{disk->R * std::cos(sp.param), disk->R * std::sin(sp.param)};
    }
    return sp;
  }

  // relocate a just-inserted vertex onto the exact curve when no incident
  // triangle inverts
  void try_move(int vid, const Vec2& to) {
    if (dist(pts[vid], to) == 0.0) return;
    const Vec2 old = pts[vid];
    pts[vid] = to;
    for (const int t : fan(vid)) {
      if (orient2d(pts[tris[t].v[0]], pts[tris[t].v[1]], pts[tris[t].v[2]]) <= 0.0) {
        pts[vid] = old;  // keep the chord midpoint
        return;
      }
    }
  }

  // Recover an input segment, splitting it (curve-aware) until every piece is
  // an edge of the triangulation; marks the pieces constrained.
  void ensure_segment(int u, int v, int depth = 0) {
    if (depth > 48) throw RefinementStall("segment recovery did not converge");
    if (find_edge(u, v).first >= 0) {
      constraints.insert(key(u, v));
      return;
    }
    const SplitPoint sp = split_point(u, v);
    const int pid = insert(sp.snapped, tag[u], sp.param, true, vert_tri[u]);
    if (pid == u || pid == v) throw GeometryError("degenerate boundary segment");
    ensure_segment(u, pid, depth + 1);
    ensure_segment(pid, v, depth + 1);
  }

  // Split an existing constrained edge at its midpoint (snapped afterwards for
  // curved chains). Returns the new vertex id.
  int split_constraint_edge(int u, int v) {
    constraints.erase(key(u, v));
    const SplitPoint sp = split_point(u, v);
    const int hint = find_edge(u, v).first;
    const int pid = insert(sp.chord_mid, tag[u], sp.param, true, hint);
    constraints.insert(key(u, pid));
    constraints.insert(key(pid, v));
    if (!(sp.snapped.x == sp.chord_mid.x && sp.snapped.y == sp.chord_mid.y)) {
      try_move(pid, sp.snapped);
    }
    return pid;
  }

  bool segment_encroached(int u, int v) const {
    const auto [t, slot] = find_edge(u, v);
    if (t < 0) return false;
    for (const auto& [tt, ss] : {std::pair{t, slot}, std::pair{tris[t].nb[slot], -1}}) {
      if (tt < 0 || !tris[tt].alive) continue;
      int apex = -1;
      for (int j = 0; j < 3; ++j) {
        if (tris[tt].v[j] != u && tris[tt].v[j] != v) apex = tris[tt].v[j];
      }
      if (apex >= 0 && point_encroaches(pts[apex], u, v)) return true;
    }
    return false;
  }

  bool point_encroaches(const Vec2& p, int u, int v) const {
    return (pts[u] - p).dot(pts[v] - p) < 0.0;
  }
};

double wrap_to_pi(double a) {
  while (a > std::numbers::pi) a -= kTwoPi;
  while (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

bool point_in_segments(const Vec2& p, const std::vector<std::array<Vec2, 2>>& segs) {
  // crossing-number test against an explicit segment soup
  int crossings = 0;
  for (const auto& s : segs) {
    const Vec2& a = s[0];
    const Vec2& b = s[1];
    if ((a.y > p.y) == (b.y > p.y)) continue;
    const double xc = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
    if (xc > p.x) ++crossings;
  }
  return (crossings & 1) == 1;
}

double tri_min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  auto corner = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Vec2 u = q - p;
    const Vec2 v = r - p;
    return std::atan2(std::abs(u.cross(v)), u.dot(v));
  };
  return std::min({corner(a, b, c), corner(b, c, a), corner(c, a, b)});
}

}  // namespace

double triangle_area(const Mesh2D& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Vec2& a = mesh.vertices[tri[0]];
  const Vec2& b = mesh.vertices[tri[1]];
  const Vec2& c = mesh.vertices[tri[2]];
  return 0.5 * (b - a).cross(c - a);
}

double mesh_area(const Mesh2D& mesh) {
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) s += triangle_area(mesh, t);
  return s;
}

Mesh2D generate(const OuterDomain& outer, const std::optional<HoleInstance>& hole,
                double h_far, double h_near, double grading) {
  if (!(h_far > 0.0) || !(h_near > 0.0) || h_near > h_far) {
    throw GeometryError("generate: need 0 < h_near <= h_far");
  }
  if (grading < 0.05 || grading > 1.0) throw GeometryError("generate: grading outside [0.05, 1]");

  struct BPoint {
    Vec2 p;
    std::uint8_t tg;
    double prm;
  };
  std::vector<BPoint> bpts;
  std::vector<std::pair<int, int>> segments;  // indices into bpts

  const OuterDisk* disk_ptr = nullptr;
  OuterDisk disk_store;
  Vec2 lo, hi;
  if (const auto* rect = std::get_if<OuterRect>(&outer)) {
    if (rect->a <= 0 || rect->b <= 0) throw GeometryError("generate: rectangle sides");
    const std::array<Vec2, 4> corners{Vec2{0, 0}, Vec2{rect->a, 0}, Vec2{rect->a, rect->b},
                                      Vec2{0, rect->b}};
    for (int s = 0; s < 4; ++s) {
      const Vec2 p0 = corners[s];
      const Vec2 p1 = corners[(s + 1) % 4];
      const int k = std::max(1, static_cast<int>(std::ceil(dist(p0, p1) / h_far)));
      for (int i = 0; i < k; ++i) {
        bpts.push_back({p0 + (static_cast<double>(i) / k) * (p1 - p0), 1,
                        std::numeric_limits<double>::quiet_NaN()});
      }
    }
    const int n = static_cast<int>(bpts.size());
    for (int i = 0; i < n; ++i) segments.push_back({i, (i + 1) % n});
    lo = {0, 0};
    hi = {rect->a, rect->b};
  } else {
    const auto& d = std::get<OuterDisk>(outer);
    if (d.R <= 0) throw GeometryError("generate: disk radius");
    disk_store = d;
    disk_ptr = &disk_store;
    const int n = std::max(16, static_cast<int>(std::ceil(kTwoPi * d.R / (0.5 * h_far))));
    for (int i = 0; i < n; ++i) {
      const double ang = kTwoPi * i / n;
      bpts.push_back({d.center + Vec2{d.R * std::cos(ang), d.R * std::sin(ang)}, 1, ang});
    }
    for (int i = 0; i < n; ++i) segments.push_back({i, (i + 1) % n});
    lo = d.center - Vec2{d.R, d.R};
    hi = d.center + Vec2{d.R, d.R};
  }
  const int outer_count = static_cast<int>(bpts.size());

  std::vector<std::array<Vec2, 2>> outer_polygon;
  for (const auto& [i, j] : segments) outer_polygon.push_back({bpts[i].p, bpts[j].p});

  std::vector<std::array<Vec2, 2>> hole_polygon;
  if (hole) {
    const AssumptionReport rep = check_assumptions(hole->shape, 1e30);
    if (!rep.beta_positive || !rep.omega_positive || !rep.simple_closed) {
      throw GeometryError("generate: hole shape is not a simple closed positive curve");
    }
    const auto [m_min, m_max] = radial_extremes(hole->shape);
    (void)m_min;
    const int n = std::max(64, static_cast<int>(std::ceil(kTwoPi * hole->epsilon * m_max / h_near)));
    const int base = static_cast<int>(bpts.size());
    for (int i = 0; i < n; ++i) {
      const double th = kTwoPi * i / n;
      bpts.push_back({hole->center + hole->epsilon * boundary_point(hole->shape, th), 2, th});
    }
    for (int i = 0; i < n; ++i) segments.push_back({base + i, base + (i + 1) % n});
    for (int i = 0; i < n; ++i) {
      hole_polygon.push_back({bpts[base + i].p, bpts[base + (i + 1) % n].p});
    }
    // clearance to the outer boundary
    double clearance = std::numeric_limits<double>::max();
    for (int i = base; i < static_cast<int>(bpts.size()); ++i) {
      for (const auto& s : outer_polygon) {
        clearance = std::min(clearance, point_segment_dist(bpts[i].p, s[0], s[1]));
      }
      if (!point_in_segments(bpts[i].p, outer_polygon)) {
        throw GeometryError("generate: hole is not inside the outer domain");
      }
    }
    if (clearance < 2.0 * h_far) {
      throw GeometryError("generate: hole clearance to the outer boundary is below 2*h_far");
    }
  }

  Triangulator tr;
  tr.hole = hole ? &*hole : nullptr;
  tr.disk = disk_ptr;
  tr.init_super(lo, hi);

  // lexicographic insertion order
  std::vector<int> order(bpts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return bpts[a].p.x != bpts[b].p.x ? bpts[a].p.x < bpts[b].p.x : bpts[a].p.y < bpts[b].p.y;
  });
  std::vector<int> vid(bpts.size(), -1);
  for (const int i : order) {
    vid[i] = tr.insert(bpts[i].p, bpts[i].tg, bpts[i].prm, false);
  }
  for (const auto& [i, j] : segments) {
    if (vid[i] == vid[j]) throw GeometryError("generate: duplicate boundary points");
    tr.ensure_segment(vid[i], vid[j]);
  }

  // region classification: flood from the super vertex, then one probe per
  // remaining component
  {
    std::vector<int> stack = tr.fan(0);
    for (const int t : stack) tr.tris[t].region = 0;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int j = 0; j < 3; ++j) {
        const int n = tr.tris[t].nb[j];
        if (n < 0 || !tr.tris[n].alive || tr.tris[n].region != -1) continue;
        const int u = tr.tris[t].v[(j + 1) % 3];
        const int w = tr.tris[t].v[(j + 2) % 3];
        if (tr.is_constrained(u, w)) continue;
        tr.tris[n].region = 0;
        stack.push_back(n);
      }
    }
    for (int t0 = 0; t0 < static_cast<int>(tr.tris.size()); ++t0) {
      if (!tr.tris[t0].alive || tr.tris[t0].region != -1) continue;
      const Vec2 cen = (tr.pts[tr.tris[t0].v[0]] + tr.pts[tr.tris[t0].v[1]] +
                        tr.pts[tr.tris[t0].v[2]]) / 3.0;
      std::int8_t region = 1;
      if (!hole_polygon.empty() && point_in_segments(cen, hole_polygon)) region = 2;
      tr.tris[t0].region = region;
      std::vector<int> st{t0};
      while (!st.empty()) {
        const int t = st.back();
        st.pop_back();
        for (int j = 0; j < 3; ++j) {
          const int n = tr.tris[t].nb[j];
          if (n < 0 || !tr.tris[n].alive || tr.tris[n].region != -1) continue;
          const int u = tr.tris[t].v[(j + 1) % 3];
          const int w = tr.tris[t].v[(j + 2) % 3];
          if (tr.is_constrained(u, w)) continue;
          tr.tris[n].region = region;
          st.push_back(n);
        }
      }
    }
  }

  // sizing field
  auto size_at = [&](const Vec2& p) {
    if (hole_polygon.empty()) return h_far;
    double d = std::numeric_limits<double>::max();
    for (const auto& s : hole_polygon) d = std::min(d, point_segment_dist(p, s[0], s[1]));
    return std::min(h_far, h_near + grading * d);
  };

  // Ruppert refinement
  auto tri_bad = [&](int t) {
    const DTri& tt = tr.tris[t];
    const Vec2& a = tr.pts[tt.v[0]];
    const Vec2& b = tr.pts[tt.v[1]];
    const Vec2& c = tr.pts[tt.v[2]];
    const double lab = dist(a, b), lbc = dist(b, c), lca = dist(c, a);
    const double shortest = std::min({lab, lbc, lca});
    const double longest = std::max({lab, lbc, lca});
    const double area2 = std::abs((b - a).cross(c - a));
    if (area2 <= 0) return true;
    const double circumradius = lab * lbc * lca / (2.0 * area2);
    if (circumradius / shortest > kRatioBound * (1.0 + 1e-12)) return true;
    return longest > size_at((a + b + c) / 3.0) * (1.0 + 1e-12);
  };

  std::deque<std::pair<int, int>> seg_q(tr.constraints.begin(), tr.constraints.end());
  std::deque<int> tri_q;
  for (int t = 0; t < static_cast<int>(tr.tris.size()); ++t) {
    if (tr.tris[t].alive && tr.tris[t].region == 1) tri_q.push_back(t);
  }

  auto after_insert = [&](int pid) {
    for (const int t : tr.last_created) {
      if (!tr.tris[t].alive) continue;
      if (tr.tris[t].region == 1) tri_q.push_back(t);
      for (int j = 0; j < 3; ++j) {
        const int u = tr.tris[t].v[(j + 1) % 3];
        const int w = tr.tris[t].v[(j + 2) % 3];
        if (tr.is_constrained(u, w)) seg_q.push_back(Triangulator::key(u, w));
      }
    }
    if (pid >= 0) {
      for (const auto& s : tr.constraints) {
        if (s.first == pid || s.second == pid) continue;
        if (tr.point_encroaches(tr.pts[pid], s.first, s.second)) seg_q.push_back(s);
      }
    }
  };

  while (!seg_q.empty() || !tri_q.empty()) {
    if (!seg_q.empty()) {
      const auto [u, v] = seg_q.front();
      seg_q.pop_front();
      if (!tr.is_constrained(u, v) || !tr.segment_encroached(u, v)) continue;
      const int pid = tr.split_constraint_edge(u, v);
      after_insert(pid);
      seg_q.push_back(Triangulator::key(u, pid));
      seg_q.push_back(Triangulator::key(pid, v));
      continue;
    }
    const int t = tri_q.front();
    tri_q.pop_front();
    if (!tr.tris[t].alive || tr.tris[t].region != 1 || !tri_bad(t)) continue;
    const Vec2 cc = circumcenter_of(tr.pts[tr.tris[t].v[0]], tr.pts[tr.tris[t].v[1]],
                                    tr.pts[tr.tris[t].v[2]]);
    std::vector<std::pair<int, int>> encroached;
    for (const auto& s : tr.constraints) {
      if (tr.point_encroaches(cc, s.first, s.second)) encroached.push_back(s);
    }
    if (!encroached.empty()) {
      for (const auto& s : encroached) {
        if (!tr.is_constrained(s.first, s.second)) continue;
        const int pid = tr.split_constraint_edge(s.first, s.second);
        after_insert(pid);
        seg_q.push_back(Triangulator::key(s.first, pid));
        seg_q.push_back(Triangulator::key(pid, s.second));
      }
      tri_q.push_back(t);  // re-examine once the splits settle
      continue;
    }
    const int loc = tr.locate(cc, t);
    if (tr.tris[loc].region == 1) {
      const int pid = tr.insert(cc, 0, Triangulator::nan_(), true, loc);
      if (tr.last_created.empty()) continue;  // snapped onto an existing vertex
      after_insert(pid);
    } else {
      // circumcenter escaped the domain without encroaching: split the
      // longest edge of the offending triangle instead
      int je = 0;
      double best = -1.0;
      for (int j = 0; j < 3; ++j) {
        const double len = dist(tr.pts[tr.tris[t].v[(j + 1) % 3]], tr.pts[tr.tris[t].v[(j + 2) % 3]]);
        if (len > best) {
          best = len;
          je = j;
        }
      }
      const int u = tr.tris[t].v[(je + 1) % 3];
      const int w = tr.tris[t].v[(je + 2) % 3];
      int pid;
      if (tr.is_constrained(u, w)) {
        pid = tr.split_constraint_edge(u, w);
        seg_q.push_back(Triangulator::key(u, pid));
        seg_q.push_back(Triangulator::key(pid, w));
      } else {
        pid = tr.insert(0.5 * (tr.pts[u] + tr.pts[w]), 0, Triangulator::nan_(), true, t);
        if (tr.last_created.empty()) continue;
      }
      after_insert(pid);
    }
  }

  // extraction
  Mesh2D mesh;
  mesh.sizing = {h_far, h_near, grading};
  mesh.hole = hole;
  if (disk_ptr) mesh.outer_disk = disk_store;
  std::vector<int> remap(tr.pts.size(), -1);
  for (int t = 0; t < static_cast<int>(tr.tris.size()); ++t) {
    const DTri& tt = tr.tris[t];
    if (!tt.alive || tt.region != 1) continue;
    std::array<int, 3> tv;
    for (int j = 0; j < 3; ++j) {
      const int v = tt.v[j];
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(tr.pts[v]);
        mesh.vertex_tag.push_back(tr.tag[v]);
        mesh.vertex_param.push_back(tr.param[v]);
      }
      tv[j] = remap[v];
    }
    mesh.triangles.push_back(tv);
    for (int j = 0; j < 3; ++j) {
      const int n = tt.nb[j];
      if (n >= 0 && tr.tris[n].alive && tr.tris[n].region == 1) continue;
      const int u = tt.v[(j + 1) % 3];
      const int w = tt.v[(j + 2) % 3];
      const BoundaryTag btag =
          (tr.tag[u] == 2 && tr.tag[w] == 2) ? BoundaryTag::Hole : BoundaryTag::Outer;
      mesh.boundary_edges.push_back({remap[u], remap[w], btag});
    }
  }
  if (mesh.triangles.empty()) throw GeometryError("generate: produced an empty mesh");
  return mesh;
}

Mesh2D refine_uniform(const Mesh2D& mesh) {
  Mesh2D out;
  out.sizing = {0.5 * mesh.sizing.h_far, 0.5 * mesh.sizing.h_near, mesh.sizing.grading};
  out.hole = mesh.hole;
  out.outer_disk = mesh.outer_disk;
  out.vertices = mesh.vertices;
  out.vertex_tag = mesh.vertex_tag;
  out.vertex_param = mesh.vertex_param;

  std::map<std::pair<int, int>, BoundaryTag> boundary_tag;
  for (const auto& e : mesh.boundary_edges) {
    boundary_tag[{std::min(e.a, e.b), std::max(e.a, e.b)}] = e.tag;
  }

  std::map<std::pair<int, int>, int> midpoint;
  auto mid_of = [&](int u, int v) {
    const auto k = std::make_pair(std::min(u, v), std::max(u, v));
    auto it = midpoint.find(k);
    if (it != midpoint.end()) return it->second;
    Vec2 p = 0.5 * (mesh.vertices[u] + mesh.vertices[v]);
    double prm = std::numeric_limits<double>::quiet_NaN();
    std::uint8_t tg = 0;
    auto bit = boundary_tag.find(k);
    if (bit != boundary_tag.end()) {
      tg = bit->second == BoundaryTag::Hole ? 2 : 1;
      const double pu = mesh.vertex_param[u];
      const double pv = mesh.vertex_param[v];
      if (std::isfinite(pu) && std::isfinite(pv)) {
        if (bit->second == BoundaryTag::Hole && mesh.hole) {
          prm = pu + 0.5 * wrap_to_pi(pv - pu);
          p = mesh.hole->center + mesh.hole->epsilon * boundary_point(mesh.hole->shape, prm);
        } else if (bit->second == BoundaryTag::Outer && mesh.outer_disk) {
          prm = pu + 0.5 * wrap_to_pi(pv - pu);
          p = mesh.outer_disk->center +
              Vec2{mesh.outer_disk->R * std::cos(prm), mesh.outer_disk->R * std::sin(prm)};
        }
      }
    }
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    out.vertex_tag.push_back(tg);
    out.vertex_param.push_back(prm);
    midpoint[k] = id;
    return id;
  };

  for (const auto& t : mesh.triangles) {
    const int m01 = mid_of(t[0], t[1]);
    const int m12 = mid_of(t[1], t[2]);
    const int m20 = mid_of(t[2], t[0]);
    out.triangles.push_back({t[0], m01, m20});
    out.triangles.push_back({t[1], m12, m01});
    out.triangles.push_back({t[2], m20, m12});
    out.triangles.push_back({m01, m12, m20});
  }
  for (const auto& e : mesh.boundary_edges) {
    const int m = mid_of(e.a, e.b);
    out.boundary_edges.push_back({e.a, m, e.tag});
    out.boundary_edges.push_back({m, e.b, e.tag});
  }
  return out;
}

QualityReport quality(const Mesh2D& mesh) {
  QualityReport q;
  q.triangle_count = static_cast<int>(mesh.triangles.size());
  q.min_angle_deg = 180.0;
  q.min_h = std::numeric_limits<double>::max();
  for (const auto& t : mesh.triangles) {
    const Vec2& a = mesh.vertices[t[0]];
    const Vec2& b = mesh.vertices[t[1]];
    const Vec2& c = mesh.vertices[t[2]];
    q.min_angle_deg = std::min(q.min_angle_deg, tri_min_angle(a, b, c) * 180.0 / std::numbers::pi);
    const double lab = dist(a, b), lbc = dist(b, c), lca = dist(c, a);
    const double longest = std::max({lab, lbc, lca});
    const double area = 0.5 * std::abs((b - a).cross(c - a));
    const double inradius = area / (0.5 * (lab + lbc + lca));
    q.max_aspect = std::max(q.max_aspect, longest / (2.0 * inradius));
    q.min_h = std::min(q.min_h, longest);
    q.max_h = std::max(q.max_h, longest);
  }
  return q;
}

void validate_mesh(const Mesh2D& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    for (const int v : mesh.triangles[t]) {
      if (v < 0 || v >= nv) throw Error("mesh: triangle vertex index out of range");
    }
    if (triangle_area(mesh, t) <= 0.0) {
      throw Error("mesh: non-positive triangle area at triangle " + std::to_string(t));
    }
  }

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : mesh.triangles) {
    for (int j = 0; j < 3; ++j) {
      const int u = t[j];
      const int v = t[(j + 1) % 3];
      ++edge_count[{std::min(u, v), std::max(u, v)}];
    }
  }
  std::set<std::pair<int, int>> boundary_set;
  for (const auto& e : mesh.boundary_edges) {
    boundary_set.insert({std::min(e.a, e.b), std::max(e.a, e.b)});
  }
  int boundary_edges_seen = 0;
  for (const auto& [e, c] : edge_count) {
    if (c == 1) {
      ++boundary_edges_seen;
      if (!boundary_set.count(e)) throw Error("mesh: untagged boundary edge");
    } else if (c == 2) {
      if (boundary_set.count(e)) throw Error("mesh: interior edge tagged as boundary");
    } else {
      throw Error("mesh: non-conforming edge shared by " + std::to_string(c) + " triangles");
    }
  }
  if (boundary_edges_seen != static_cast<int>(boundary_set.size())) {
    throw Error("mesh: boundary edge list does not match the triangulation");
  }

  // boundary loops: walk per tag
  std::map<int, std::vector<std::pair<int, BoundaryTag>>> adj;
  for (const auto& e : mesh.boundary_edges) {
    adj[e.a].push_back({e.b, e.tag});
    adj[e.b].push_back({e.a, e.tag});
  }
  for (const auto& [v, nbs] : adj) {
    if (nbs.size() != 2) throw Error("mesh: boundary vertex without exactly two boundary edges");
    if (nbs[0].second != nbs[1].second) throw Error("mesh: boundary loop mixes tags");
  }
  std::set<int> visited;
  int outer_loops = 0;
  int hole_loops = 0;
  for (const auto& [v0, nbs] : adj) {
    if (visited.count(v0)) continue;
    const BoundaryTag tag = nbs[0].second;
    int prev = v0;
    int cur = nbs[0].first;
    visited.insert(v0);
    while (cur != v0) {
      visited.insert(cur);
      const auto& nn = adj.at(cur);
      const int next = nn[0].first == prev ? nn[1].first : nn[0].first;
      prev = cur;
      cur = next;
    }
    if (tag == BoundaryTag::Outer) ++outer_loops;
    else ++hole_loops;
  }
  if (outer_loops != 1) throw Error("mesh: expected exactly one outer loop");
  if (hole_loops > 1) throw Error("mesh: more than one hole loop");

  // Euler characteristic V - E + T = 1 - #holes
  const int euler = nv - static_cast<int>(edge_count.size()) +
                    static_cast<int>(mesh.triangles.size());
  if (euler != 1 - hole_loops) {
    throw Error("mesh: Euler characteristic " + std::to_string(euler) + " != " +
                std::to_string(1 - hole_loops));
  }

  const QualityReport q = quality(mesh);
  if (q.min_angle_deg < kMinAngleDeg - 1e-6) {
    throw Error("mesh: minimum angle " + std::to_string(q.min_angle_deg) + " below bound");
  }

  if (mesh.hole && !mesh.vertex_param.empty()) {
    const double tol = std::max(mesh.sizing.h_near / 4.0, 1e-9);
    for (const auto& e : mesh.boundary_edges) {
      if (e.tag != BoundaryTag::Hole) continue;
      for (const int v : {e.a, e.b}) {
        const double prm = mesh.vertex_param[v];
        if (!std::isfinite(prm)) continue;
        const Vec2 exact =
            mesh.hole->center + mesh.hole->epsilon * boundary_point(mesh.hole->shape, prm);
        if (dist(exact, mesh.vertices[v]) > tol) {
          throw Error("mesh: hole vertex strays from the exact curve");
        }
      }
    }
  }
}

std::string mesh_to_text(const Mesh2D& mesh) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "$Vertices\n" << mesh.vertices.size() << "\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    os << i + 1 << " " << mesh.vertices[i].x << " " << mesh.vertices[i].y << "\n";
  }
  os << "$Triangles\n" << mesh.triangles.size() << "\n";
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    os << i + 1 << " " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  }
  os << "$BoundaryEdges\n" << mesh.boundary_edges.size() << "\n";
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    const auto& e = mesh.boundary_edges[i];
    os << i + 1 << " " << e.a + 1 << " " << e.b + 1 << " "
       << (e.tag == BoundaryTag::Outer ? "Outer" : "Hole") << "\n";
  }
  return os.str();
}

void save_mesh(const Mesh2D& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open mesh file for writing: " + path);
  out << mesh_to_text(mesh);
}

Mesh2D mesh_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string tok;
  Mesh2D mesh;
  auto expect = [&](const char* section) {
    if (!(is >> tok) || tok != section) throw Error(std::string("mesh parse: expected ") + section);
  };
  expect("$Vertices");
  std::size_t nv;
  is >> nv;
  mesh.vertices.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    std::size_t idx;
    is >> idx >> mesh.vertices[i].x >> mesh.vertices[i].y;
  }
  expect("$Triangles");
  std::size_t nt;
  is >> nt;
  mesh.triangles.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    std::size_t idx;
    int a, b, c;
    is >> idx >> a >> b >> c;
    mesh.triangles[i] = {a - 1, b - 1, c - 1};
  }
  expect("$BoundaryEdges");
  std::size_t ne;
  is >> ne;
  mesh.boundary_edges.resize(ne);
  mesh.vertex_tag.assign(nv, 0);
  mesh.vertex_param.assign(nv, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < ne; ++i) {
    std::size_t idx;
    int a, b;
    std::string tag;
    is >> idx >> a >> b >> tag;
    const BoundaryTag bt = tag == "Hole" ? BoundaryTag::Hole : BoundaryTag::Outer;
    mesh.boundary_edges[i] = {a - 1, b - 1, bt};
    mesh.vertex_tag[a - 1] = bt == BoundaryTag::Hole ? 2 : 1;
    mesh.vertex_tag[b - 1] = bt == BoundaryTag::Hole ? 2 : 1;
  }
  if (!is) throw Error("mesh parse: truncated file");
  return mesh;
}

Mesh2D load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return mesh_from_text(buf.str());
}

}  // namespace perfospec
