#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdms {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool operator==(const Rect&) const = default;
};

enum class Diagonal : std::uint8_t { NE = 0, NW = 1 };

enum class BoundaryMarker : std::uint8_t {
  stokes_lid = 0,
  stokes_wall = 1,
  darcy_exterior = 2,
  interface = 3,
};

const char* to_string(BoundaryMarker m);

/// Markers for the four sides of a rectangle.
struct SideMarkers {
  BoundaryMarker bottom, right, top, left;
};

/// Stokes rectangle (0,1)x(1,2) and Darcy rectangle (0,1)x(0,1).
inline constexpr Rect kStokesRect{0.0, 1.0, 1.0, 2.0};
inline constexpr Rect kDarcyRect{0.0, 0.0, 1.0, 1.0};
inline constexpr SideMarkers kStokesMarkers{BoundaryMarker::interface, BoundaryMarker::stokes_wall,
                                            BoundaryMarker::stokes_lid, BoundaryMarker::stokes_wall};
inline constexpr SideMarkers kDarcyMarkers{BoundaryMarker::darcy_exterior, BoundaryMarker::darcy_exterior,
                                           BoundaryMarker::interface, BoundaryMarker::darcy_exterior};

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryMarker marker = BoundaryMarker::darcy_exterior;
};

using Triangle = std::array<int, 3>;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfDomainError : public MeshError {
 public:
  explicit OutOfDomainError(Point p);
  Point point;
};

struct Location {
  int triangle = -1;
  std::array<double, 3> bary{};
};

/// Conforming triangulation of an axis-aligned rectangle built on an N x N grid.
/// Immutable after construction.
class TriMesh {
 public:
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  double h() const { return h_; }
  int n() const { return n_; }
  const Rect& rect() const { return rect_; }
  Diagonal diagonal() const { return diagonal_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  std::array<Point, 3> corners(int tri) const {
    const auto& t = triangles_[tri];
    return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
  }

  /// Per-vertex flag: vertex lies on a boundary edge carrying `marker`.
  std::vector<bool> vertices_with_marker(BoundaryMarker marker) const;

  /// Locates `p` (tolerance `tol` on barycentric coordinates). Points on shared
  /// edges resolve to the lowest-index containing triangle.
  Location locate(Point p, double tol = 1e-12) const;

  /// Same as locate() but scans every triangle; used to cross-check the grid lookup.
  Location locate_brute_force(Point p, double tol = 1e-12) const;

  /// Plain-text dump: header `<V> vertices <T> triangles <B> boundary_edges`, then one line per entity.
  void dump(std::ostream& os) const;

  friend TriMesh build_structured(int n, const Rect& rect, const SideMarkers& markers, Diagonal diagonal);

 private:
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  Rect rect_;
  Diagonal diagonal_ = Diagonal::NE;
  int n_ = 0;
  double h_ = 0.0;
};

/// Structured N x N triangulation with (N+1)^2 vertices and 2N^2 triangles.
/// Vertex (i, j) has index j*(N+1)+i; cell (i, j) owns triangles 2*(j*N+i) and 2*(j*N+i)+1.
TriMesh build_structured(int n, const Rect& rect, const SideMarkers& markers, Diagonal diagonal = Diagonal::NE);

inline TriMesh build_stokes_mesh(int n, Diagonal d = Diagonal::NE) {
  return build_structured(n, kStokesRect, kStokesMarkers, d);
}
inline TriMesh build_darcy_mesh(int n, Diagonal d = Diagonal::NE) {
  return build_structured(n, kDarcyRect, kDarcyMarkers, d);
}

/// Barycentric coordinates of p in triangle (a, b, c).
std::array<double, 3> barycentric(const std::array<Point, 3>& tri, Point p);

/// Uniform M-fold subdivision of one parent triangle.
///
/// Fine vertex (a, b) with a + b <= M sits at P0 + (a/M)(P1-P0) + (b/M)(P2-P0) and
/// has index b*(M+1) - b*(b-1)/2 + a. Its parent barycentric coordinates are
/// ((M-a-b)/M, a/M, b/M), so the restriction of parent hat i to the boundary is exact.
struct FineSubmesh {
  int parent = -1;
  int m = 1;
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  /// Parent barycentric coordinates of each fine vertex.
  std::vector<std::array<double, 3>> bary;
  /// Bit k set when the vertex lies on the parent edge opposite corner k.
  std::vector<std::uint8_t> boundary;

  static int vertex_count(int m) { return (m + 1) * (m + 2) / 2; }
  static int index(int m, int a, int b) { return b * (m + 1) - b * (b - 1) / 2 + a; }
  bool on_boundary(int v) const { return boundary[v] != 0; }
};

FineSubmesh refine_triangle(const TriMesh& mesh, int tri_id, int m);

/// Fine triangle of an M-refinement containing parent barycentric point `bary`,
/// with its three fine vertex indices and local barycentric coordinates.
struct FineLocation {
  std::array<int, 3> vertices;
  std::array<double, 3> bary;
  /// Upward triangles are (a,b),(a+1,b),(a,b+1); downward ones (a+1,b),(a+1,b+1),(a,b+1).
  bool upward = true;
};
FineLocation locate_in_refinement(int m, const std::array<double, 3>& parent_bary);

/// Continuous P2 numbering: vertices keep their index, edge midpoints follow.
/// `cell[t]` lists the three vertices, then the edges (0,1), (1,2), (2,0).
struct P2DofMap {
  int num_vertices = 0;
  int num_dofs = 0;
  std::vector<std::array<int, 6>> cell;
  std::vector<Point> coords;
  /// Midpoint dof of each mesh boundary edge, parallel to TriMesh::boundary_edges().
  std::vector<int> boundary_edge_dof;
};
P2DofMap build_p2_dofs(const TriMesh& mesh);

/// Interface vertices of a mesh ordered by increasing x.
struct InterfaceTrace {
  std::vector<int> vertices;
  std::vector<Point> coords;
  std::vector<std::array<int, 2>> edges;  // positions into `vertices`
  std::size_t size() const { return vertices.size(); }
};

InterfaceTrace interface_trace(const TriMesh& mesh);

/// Throws MeshError unless both traces have identical node coordinates.
void require_matching(const InterfaceTrace& a, const InterfaceTrace& b);

/// Edge-incidence audit: every interior edge has two triangles, every boundary edge one.
/// Returns an empty string on success, otherwise a description of the first violation.
std::string audit_conformity(const TriMesh& mesh);

}  // namespace sdms
