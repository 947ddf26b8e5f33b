#include "sdms/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace sdms {

const char* to_string(BoundaryMarker m) {
  switch (m) {
    case BoundaryMarker::stokes_lid: return "stokes_lid";
    case BoundaryMarker::stokes_wall: return "stokes_wall";
    case BoundaryMarker::darcy_exterior: return "darcy_exterior";
    case BoundaryMarker::interface: return "interface";
  }
  return "unknown";
}

namespace {
std::string describe(Point p) {
  std::ostringstream os;
  os.precision(17);
  os << "point (" << p.x << ", " << p.y << ") lies outside the mesh";
  return os.str();
}
}  // namespace

OutOfDomainError::OutOfDomainError(Point p) : MeshError(describe(p)), point(p) {}

std::array<double, 3> barycentric(const std::array<Point, 3>& t, Point p) {
  const double det = (t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (t[1].y - t[0].y);
  const double l1 = ((p.x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (p.y - t[0].y)) / det;
  const double l2 = ((t[1].x - t[0].x) * (p.y - t[0].y) - (p.x - t[0].x) * (t[1].y - t[0].y)) / det;
  return {1.0 - l1 - l2, l1, l2};
}

TriMesh build_structured(int n, const Rect& rect, const SideMarkers& markers, Diagonal diagonal) {
  if (n < 1) throw MeshError("build_structured: N must be >= 1");
  if (!(rect.width() > 0.0) || !(rect.height() > 0.0)) throw MeshError("build_structured: empty rectangle");
  TriMesh m;
  m.n_ = n;
  m.rect_ = rect;
  m.diagonal_ = diagonal;
  m.h_ = rect.width() / n;
  const int np = n + 1;
  m.vertices_.reserve(static_cast<std::size_t>(np) * np);
  for (int j = 0; j <= n; ++j) {
    // Exact end coordinates so meshes sharing a side agree bitwise.
    const double y = (j == n) ? rect.y1 : rect.y0 + rect.height() * j / n;
    for (int i = 0; i <= n; ++i) {
      const double x = (i == n) ? rect.x1 : rect.x0 + rect.width() * i / n;
      m.vertices_.push_back({x, y});
    }
  }
  auto vid = [np](int i, int j) { return j * np + i; };
  m.triangles_.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      if (diagonal == Diagonal::NE) {
        m.triangles_.push_back({v00, v10, v11});
        m.triangles_.push_back({v00, v11, v01});
      } else {
        m.triangles_.push_back({v00, v10, v01});
        m.triangles_.push_back({v10, v11, v01});
      }
    }
  }
  for (int i = 0; i < n; ++i) m.boundary_edges_.push_back({vid(i, 0), vid(i + 1, 0), markers.bottom});
  for (int j = 0; j < n; ++j) m.boundary_edges_.push_back({vid(n, j), vid(n, j + 1), markers.right});
  for (int i = n; i > 0; --i) m.boundary_edges_.push_back({vid(i, n), vid(i - 1, n), markers.top});
  for (int j = n; j > 0; --j) m.boundary_edges_.push_back({vid(0, j), vid(0, j - 1), markers.left});
  return m;
}

std::vector<bool> TriMesh::vertices_with_marker(BoundaryMarker marker) const {
  std::vector<bool> flag(vertices_.size(), false);
  for (const auto& e : boundary_edges_) {
    if (e.marker == marker) flag[e.a] = flag[e.b] = true;
  }
  return flag;
}

Location TriMesh::locate_brute_force(Point p, double tol) const {
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
    const auto b = barycentric(corners(t), p);
    if (b[0] >= -tol && b[1] >= -tol && b[2] >= -tol) return {t, b};
  }
  throw OutOfDomainError(p);
}

Location TriMesh::locate(Point p, double tol) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw OutOfDomainError(p);
  const double hx = rect_.width() / n_, hy = rect_.height() / n_;
  const int ci = std::clamp(static_cast<int>(std::floor((p.x - rect_.x0) / hx)), 0, n_ - 1);
  const int cj = std::clamp(static_cast<int>(std::floor((p.y - rect_.y0) / hy)), 0, n_ - 1);
  // Fast path: clearly interior to one triangle of the home cell.
  constexpr double kMargin = 1e-9;
  for (int k = 0; k < 2; ++k) {
    const int t = 2 * (cj * n_ + ci) + k;
    const auto b = barycentric(corners(t), p);
    if (b[0] > kMargin && b[1] > kMargin && b[2] > kMargin) return {t, b};
  }
  Location best;
  for (int j = std::max(0, cj - 1); j <= std::min(n_ - 1, cj + 1); ++j) {
    for (int i = std::max(0, ci - 1); i <= std::min(n_ - 1, ci + 1); ++i) {
      for (int k = 0; k < 2; ++k) {
        const int t = 2 * (j * n_ + i) + k;
        if (best.triangle >= 0 && t > best.triangle) continue;
        const auto b = barycentric(corners(t), p);
        if (b[0] >= -tol && b[1] >= -tol && b[2] >= -tol) best = {t, b};
      }
    }
  }
  if (best.triangle < 0) throw OutOfDomainError(p);
  return best;
}

void TriMesh::dump(std::ostream& os) const {
  os << vertices_.size() << " vertices " << triangles_.size() << " triangles " << boundary_edges_.size()
     << " boundary_edges\n";
  os.precision(17);
  for (const auto& v : vertices_) os << v.x << ' ' << v.y << '\n';
  for (const auto& t : triangles_) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : boundary_edges_) os << e.a << ' ' << e.b << ' ' << to_string(e.marker) << '\n';
}

FineSubmesh refine_triangle(const TriMesh& mesh, int tri_id, int m) {
  if (m < 1) throw MeshError("refine_triangle: M must be >= 1");
  if (tri_id < 0 || tri_id >= static_cast<int>(mesh.num_triangles())) throw MeshError("refine_triangle: bad triangle id");
  const auto c = mesh.corners(tri_id);
  FineSubmesh s;
  s.parent = tri_id;
  s.m = m;
  const int nv = FineSubmesh::vertex_count(m);
  s.vertices.resize(nv);
  s.bary.resize(nv);
  s.boundary.resize(nv);
  for (int b = 0; b <= m; ++b) {
    for (int a = 0; a + b <= m; ++a) {
      const int v = FineSubmesh::index(m, a, b);
      const int r = m - a - b;
      // Corners are copied exactly.
      if (r == m) s.vertices[v] = c[0];
      else if (a == m) s.vertices[v] = c[1];
      else if (b == m) s.vertices[v] = c[2];
      else {
        const double sa = static_cast<double>(a) / m, sb = static_cast<double>(b) / m;
        s.vertices[v] = {c[0].x + sa * (c[1].x - c[0].x) + sb * (c[2].x - c[0].x),
                         c[0].y + sa * (c[1].y - c[0].y) + sb * (c[2].y - c[0].y)};
      }
      s.bary[v] = {static_cast<double>(r) / m, static_cast<double>(a) / m, static_cast<double>(b) / m};
      std::uint8_t flag = 0;
      if (r == 0) flag |= 1;
      if (a == 0) flag |= 2;
      if (b == 0) flag |= 4;
      s.boundary[v] = flag;
    }
  }
  s.triangles.reserve(static_cast<std::size_t>(m) * m);
  for (int b = 0; b < m; ++b) {
    for (int a = 0; a + b < m; ++a) {
      s.triangles.push_back({FineSubmesh::index(m, a, b), FineSubmesh::index(m, a + 1, b), FineSubmesh::index(m, a, b + 1)});
      if (a + b + 1 < m) {
        s.triangles.push_back(
            {FineSubmesh::index(m, a + 1, b), FineSubmesh::index(m, a + 1, b + 1), FineSubmesh::index(m, a, b + 1)});
      }
    }
  }
  return s;
}

FineLocation locate_in_refinement(int m, const std::array<double, 3>& lam) {
  const double s = std::clamp(lam[1], 0.0, 1.0) * m;
  const double t = std::clamp(lam[2], 0.0, 1.0) * m;
  int a = std::clamp(static_cast<int>(std::floor(s)), 0, m - 1);
  int b = std::clamp(static_cast<int>(std::floor(t)), 0, m - 1);
  if (a + b > m - 1) {
    // Outside the lattice triangle due to rounding; pull back onto the last row.
    if (s - a > t - b) b = m - 1 - a;
    else a = m - 1 - b;
    if (a < 0) { a = 0; b = m - 1; }
    if (b < 0) { b = 0; a = m - 1; }
  }
  const double fs = s - a, ft = t - b;
  FineLocation out;
  if (fs + ft <= 1.0 || a + b + 1 >= m) {
    out.vertices = {FineSubmesh::index(m, a, b), FineSubmesh::index(m, a + 1, b), FineSubmesh::index(m, a, b + 1)};
    out.bary = {1.0 - fs - ft, fs, ft};
  } else {
    // Downward triangle (a+1,b), (a+1,b+1), (a,b+1).
    out.vertices = {FineSubmesh::index(m, a + 1, b), FineSubmesh::index(m, a + 1, b + 1), FineSubmesh::index(m, a, b + 1)};
    out.bary = {1.0 - ft, fs + ft - 1.0, 1.0 - fs};
    out.upward = false;
  }
  return out;
}

InterfaceTrace interface_trace(const TriMesh& mesh) {
  std::vector<int> verts;
  std::vector<std::array<int, 2>> edges_v;
  for (const auto& e : mesh.boundary_edges()) {
    if (e.marker != BoundaryMarker::interface) continue;
    verts.push_back(e.a);
    verts.push_back(e.b);
    edges_v.push_back({e.a, e.b});
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  const auto& xs = mesh.vertices();
  std::stable_sort(verts.begin(), verts.end(), [&](int a, int b) { return xs[a].x < xs[b].x; });
  InterfaceTrace tr;
  tr.vertices = verts;
  std::map<int, int> pos;
  for (std::size_t k = 0; k < verts.size(); ++k) {
    tr.coords.push_back(xs[verts[k]]);
    pos[verts[k]] = static_cast<int>(k);
  }
  for (const auto& e : edges_v) {
    int a = pos[e[0]], b = pos[e[1]];
    if (a > b) std::swap(a, b);
    tr.edges.push_back({a, b});
  }
  std::sort(tr.edges.begin(), tr.edges.end());
  return tr;
}

void require_matching(const InterfaceTrace& a, const InterfaceTrace& b) {
  if (a.size() != b.size()) throw MeshError("interface traces have different node counts");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.coords[k].x != b.coords[k].x || a.coords[k].y != b.coords[k].y) {
      throw MeshError("interface traces do not match at node " + std::to_string(k));
    }
  }
}

std::string audit_conformity(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  }
  std::map<std::pair<int, int>, int> boundary;
  for (const auto& e : mesh.boundary_edges()) {
    int a = e.a, b = e.b;
    if (a > b) std::swap(a, b);
    ++boundary[{a, b}];
  }
  for (const auto& [edge, c] : count) {
    const bool on_boundary = boundary.count(edge) > 0;
    if (on_boundary && c != 1) return "boundary edge shared by " + std::to_string(c) + " triangles";
    if (!on_boundary && c != 2) return "interior edge shared by " + std::to_string(c) + " triangles";
  }
  for (const auto& [edge, c] : boundary) {
    if (c != 1 || count.count(edge) == 0) return "boundary edge not owned by exactly one triangle";
  }
  return {};
}

P2DofMap build_p2_dofs(const TriMesh& mesh) {
  P2DofMap map;
  const auto nv = static_cast<std::int64_t>(mesh.num_vertices());
  const auto& tris = mesh.triangles();
  map.num_vertices = static_cast<int>(nv);
  map.cell.resize(tris.size());
  // Sort (edge key, slot) pairs so edge numbering follows the vertex order.
  std::vector<std::pair<std::int64_t, std::int64_t>> keys;
  keys.reserve(3 * tris.size());
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int e = 0; e < 3; ++e) {
      const int a = tris[t][e], b = tris[t][(e + 1) % 3];
      keys.emplace_back(std::min(a, b) * nv + std::max(a, b), static_cast<std::int64_t>(3 * t + e));
    }
  std::sort(keys.begin(), keys.end());
  map.coords = mesh.vertices();
  int next = static_cast<int>(nv);
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (k == 0 || keys[k].first != keys[k - 1].first) {
      const int a = static_cast<int>(keys[k].first / nv), b = static_cast<int>(keys[k].first % nv);
      const auto& va = mesh.vertices()[a];
      const auto& vb = mesh.vertices()[b];
      map.coords.push_back({0.5 * (va.x + vb.x), 0.5 * (va.y + vb.y)});
      ++next;
    }
    const auto slot = keys[k].second;
    map.cell[slot / 3][3 + slot % 3] = next - 1;
  }
  map.num_dofs = next;
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int i = 0; i < 3; ++i) map.cell[t][i] = tris[t][i];
  for (const auto& e : mesh.boundary_edges()) {
    const std::int64_t key = std::min(e.a, e.b) * nv + std::max(e.a, e.b);
    const auto it = std::lower_bound(keys.begin(), keys.end(), std::make_pair(key, std::int64_t{0}));
    if (it == keys.end() || it->first != key) throw MeshError("boundary edge is not a triangle edge");
    map.boundary_edge_dof.push_back(map.cell[it->second / 3][3 + it->second % 3]);
  }
  return map;
}

}  // namespace sdms
