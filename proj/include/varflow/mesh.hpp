#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varflow/geometry.hpp"

namespace varflow {

/// Triangle cell: vertex ids in counterclockwise order.
struct Tri {
  std::array<int, 3> v{-1, -1, -1};
};

/// Mesh edge with oriented two-sided topology.
///
/// Interior edges carry a "minus" and a "plus" element; by convention the
/// minus side is the incident element with the LOWER element index, and the
/// stored unit normal points from the minus element into the plus element.
/// Boundary edges have plus == -1 and the normal points out of the domain.
struct Edge {
  std::array<int, 2> v{-1, -1};  ///< endpoint vertex ids, v[0] < v[1]
  int minus = -1;                ///< element on the minus side
  int plus = -1;                 ///< element on the plus side, -1 on the boundary
  int local_minus = -1;          ///< local edge index (0..2) within the minus element
  int local_plus = -1;           ///< local edge index within the plus element, -1 on boundary
  Vec2 normal;                   ///< unit normal, minus -> plus (outward on boundary)
  double length = 0.0;

  bool is_boundary() const { return plus < 0; }
};

/// Summary statistics reported by the mesh-info tool and used by sanity checks.
struct MeshStats {
  int num_vertices = 0;
  int num_triangles = 0;
  int num_edges = 0;
  int num_interior_edges = 0;
  double h_max = 0.0;              ///< max element diameter
  double h_min = 0.0;              ///< min element diameter
  double shape_regularity = 0.0;   ///< max over elements of diameter / inradius
  double quasi_uniformity = 0.0;   ///< h_max / h_min
  double total_area = 0.0;
};

/// Conforming 2D simplicial mesh with precomputed oriented edge topology.
///
/// Construction normalizes every triangle to counterclockwise orientation and
/// rejects degenerate (zero-area) triangles and non-manifold connectivity
/// (any edge shared by more than two triangles). Edge ids are deterministic:
/// edges are numbered in lexicographic order of their (sorted) vertex pairs.
class Mesh {
 public:
  /// Structured triangulation of the rectangle [x0,x1] x [y0,y1] with nx*ny
  /// cells, each split by the lower-left -> upper-right diagonal.
  static Mesh uniform_rectangle(double x0, double y0, double x1, double y1, int nx, int ny);

  /// Patch of unit-side equilateral triangles tiling a parallelogram,
  /// nx columns and ny rows of up/down pairs. Used by tests that need
  /// regular (equilateral) elements.
  static Mesh equilateral_patch(int nx, int ny, double side = 1.0);

  /// Plain-text mesh: header "nv nt", then nv lines "x y", then nt lines
  /// "i j k" with 0-based vertex indices.
  static Mesh from_text(std::istream& in);
  static Mesh from_text_file(const std::string& path);

  /// Assemble from raw arrays (also the backend of the builders above).
  static Mesh from_arrays(std::vector<Vec2> vertices, std::vector<Tri> triangles);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(tris_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_interior_edges() const { return num_interior_edges_; }

  const Vec2& vertex(int i) const { return vertices_[i]; }
  const Tri& triangle(int t) const { return tris_[t]; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Edge ids of triangle t; entry l is the edge opposite local vertex l
  /// (i.e. connecting local vertices (l+1)%3 and (l+2)%3).
  const std::array<int, 3>& tri_edges(int t) const { return tri_edges_[t]; }

  double area(int t) const { return areas_[t]; }
  Vec2 barycenter(int t) const;
  double diameter(int t) const;
  double inradius(int t) const;

  /// Outward unit normal of triangle t on its local edge l.
  Vec2 outward_normal(int t, int l) const;

  /// Affine map from the reference triangle {(0,0),(1,0),(0,1)} to t.
  Vec2 map_from_reference(int t, const Vec2& ref) const;
  /// Inverse of map_from_reference.
  Vec2 map_to_reference(int t, const Vec2& phys) const;
  /// Jacobian of the reference map (constant per element).
  Mat2 jacobian(int t) const;

  /// Element containing p, or nullopt if outside. O(1) for structured
  /// rectangle meshes, linear scan otherwise. Points on shared boundaries
  /// resolve deterministically (lowest matching element id for the scan,
  /// diagonal-sign rule for structured meshes).
  std::optional<int> locate(const Vec2& p) const;

  MeshStats stats() const;

 private:
  void build_edges();

  std::vector<Vec2> vertices_;
  std::vector<Tri> tris_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<double> areas_;
  int num_interior_edges_ = 0;

  // Structured-grid metadata for O(1) point location (empty otherwise).
  struct GridInfo {
    double x0 = 0, y0 = 0, dx = 0, dy = 0;
    int nx = 0, ny = 0;
  };
  std::optional<GridInfo> grid_;
};

}  // namespace varflow
