#include "varflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace varflow {

Mesh Mesh::uniform_rectangle(double x0, double y0, double x1, double y1, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("uniform_rectangle: need nx, ny >= 1");
  if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("uniform_rectangle: empty box");

  const double dx = (x1 - x0) / nx;
  const double dy = (y1 - y0) / ny;

  std::vector<Vec2> verts;
  verts.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) verts.push_back({x0 + i * dx, y0 + j * dy});

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  // Each cell is split along the lower-left -> upper-right diagonal; the
  // lower triangle comes first so element ids are deterministic.
  std::vector<Tri> tris;
  tris.reserve(static_cast<size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({{vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)}});
      tris.push_back({{vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)}});
    }
  }

  Mesh m = from_arrays(std::move(verts), std::move(tris));
  m.grid_ = GridInfo{x0, y0, dx, dy, nx, ny};
  return m;
}

Mesh Mesh::equilateral_patch(int nx, int ny, double side) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("equilateral_patch: need nx, ny >= 1");
  const double s = side;
  const double hy = s * std::sqrt(3.0) / 2.0;

  std::vector<Vec2> verts;
  verts.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) verts.push_back({(i + 0.5 * j) * s, j * hy});

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<Tri> tris;
  tris.reserve(static_cast<size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({{vid(i, j), vid(i + 1, j), vid(i, j + 1)}});
      tris.push_back({{vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)}});
    }
  }
  return from_arrays(std::move(verts), std::move(tris));
}

Mesh Mesh::from_text(std::istream& in) {
  int nv = 0, nt = 0;
  if (!(in >> nv >> nt)) throw std::runtime_error("mesh text: bad header, expected 'nv nt'");
  if (nv < 3 || nt < 1) throw std::runtime_error("mesh text: need at least 3 vertices, 1 triangle");

  std::vector<Vec2> verts(nv);
  for (int i = 0; i < nv; ++i)
    if (!(in >> verts[i].x >> verts[i].y))
      throw std::runtime_error("mesh text: bad vertex line " + std::to_string(i));

  std::vector<Tri> tris(nt);
  for (int t = 0; t < nt; ++t) {
    if (!(in >> tris[t].v[0] >> tris[t].v[1] >> tris[t].v[2]))
      throw std::runtime_error("mesh text: bad triangle line " + std::to_string(t));
    for (int k = 0; k < 3; ++k)
      if (tris[t].v[k] < 0 || tris[t].v[k] >= nv)
        throw std::runtime_error("mesh text: vertex index out of range in triangle " +
                                 std::to_string(t));
  }
  return from_arrays(std::move(verts), std::move(tris));
}

Mesh Mesh::from_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  return from_text(in);
}

Mesh Mesh::from_arrays(std::vector<Vec2> vertices, std::vector<Tri> triangles) {
  Mesh m;
  m.vertices_ = std::move(vertices);
  m.tris_ = std::move(triangles);

  m.areas_.resize(m.tris_.size());
  for (size_t t = 0; t < m.tris_.size(); ++t) {
    Tri& tri = m.tris_[t];
    const Vec2 &a = m.vertices_[tri.v[0]], &b = m.vertices_[tri.v[1]], &c = m.vertices_[tri.v[2]];
    double signed_area = 0.5 * cross(b - a, c - a);
    if (signed_area < 0.0) {  // normalize to counterclockwise
      std::swap(tri.v[1], tri.v[2]);
      signed_area = -signed_area;
    }
    if (!(signed_area > 0.0))
      throw std::runtime_error("degenerate triangle " + std::to_string(t));
    m.areas_[t] = signed_area;
  }

  m.build_edges();
  return m;
}

void Mesh::build_edges() {
  // Keyed by sorted vertex pair; std::map gives deterministic edge numbering
  // (lexicographic in the vertex pair).
  std::map<std::array<int, 2>, std::vector<std::array<int, 2>>> incidence;  // -> {tri, local}
  for (int t = 0; t < num_triangles(); ++t) {
    for (int l = 0; l < 3; ++l) {
      int a = tris_[t].v[(l + 1) % 3];
      int b = tris_[t].v[(l + 2) % 3];
      std::array<int, 2> key{std::min(a, b), std::max(a, b)};
      incidence[key].push_back({t, l});
    }
  }

  edges_.clear();
  edges_.reserve(incidence.size());
  tri_edges_.assign(tris_.size(), {-1, -1, -1});
  num_interior_edges_ = 0;

  for (const auto& [key, inc] : incidence) {
    if (inc.size() > 2)
      throw std::runtime_error("non-manifold mesh: edge shared by " + std::to_string(inc.size()) +
                               " triangles");
    Edge e;
    e.v = key;
    const Vec2 &va = vertices_[key[0]], &vb = vertices_[key[1]];
    e.length = norm(vb - va);
    if (!(e.length > 0.0)) throw std::runtime_error("zero-length edge");

    if (inc.size() == 2) {
      // minus side = lower element index
      auto lo = inc[0], hi = inc[1];
      if (lo[0] > hi[0]) std::swap(lo, hi);
      e.minus = lo[0];
      e.local_minus = lo[1];
      e.plus = hi[0];
      e.local_plus = hi[1];
      ++num_interior_edges_;
    } else {
      e.minus = inc[0][0];
      e.local_minus = inc[0][1];
    }

    // Unit normal pointing out of the minus element. The vertex opposite the
    // local edge tells us which side the element lies on.
    Vec2 tangent = (vb - va) / e.length;
    Vec2 n = perp(tangent);
    const Vec2& opp = vertices_[tris_[e.minus].v[e.local_minus]];
    if (dot(n, opp - va) > 0.0) n = -n;
    e.normal = n;

    int id = static_cast<int>(edges_.size());
    edges_.push_back(e);
    tri_edges_[e.minus][e.local_minus] = id;
    if (e.plus >= 0) tri_edges_[e.plus][e.local_plus] = id;
  }

  for (int t = 0; t < num_triangles(); ++t)
    for (int l = 0; l < 3; ++l)
      if (tri_edges_[t][l] < 0) throw std::runtime_error("internal error: missing edge");
}

Vec2 Mesh::barycenter(int t) const {
  const Tri& tri = tris_[t];
  return (vertices_[tri.v[0]] + vertices_[tri.v[1]] + vertices_[tri.v[2]]) / 3.0;
}

double Mesh::diameter(int t) const {
  const Tri& tri = tris_[t];
  double d = 0.0;
  for (int l = 0; l < 3; ++l)
    d = std::max(d, norm(vertices_[tri.v[(l + 1) % 3]] - vertices_[tri.v[(l + 2) % 3]]));
  return d;
}

double Mesh::inradius(int t) const {
  const Tri& tri = tris_[t];
  double per = 0.0;
  for (int l = 0; l < 3; ++l)
    per += norm(vertices_[tri.v[(l + 1) % 3]] - vertices_[tri.v[(l + 2) % 3]]);
  return 2.0 * areas_[t] / per;
}

Vec2 Mesh::outward_normal(int t, int l) const {
  const Edge& e = edges_[tri_edges_[t][l]];
  return (e.minus == t) ? e.normal : -e.normal;
}

Vec2 Mesh::map_from_reference(int t, const Vec2& ref) const {
  const Tri& tri = tris_[t];
  const Vec2 &a = vertices_[tri.v[0]], &b = vertices_[tri.v[1]], &c = vertices_[tri.v[2]];
  return a + (b - a) * ref.x + (c - a) * ref.y;
}

Vec2 Mesh::map_to_reference(int t, const Vec2& phys) const {
  const Tri& tri = tris_[t];
  return jacobian(t).inverse().apply(phys - vertices_[tri.v[0]]);
}

Mat2 Mesh::jacobian(int t) const {
  const Tri& tri = tris_[t];
  const Vec2 &a = vertices_[tri.v[0]], &b = vertices_[tri.v[1]], &c = vertices_[tri.v[2]];
  return {b.x - a.x, c.x - a.x, b.y - a.y, c.y - a.y};
}

std::optional<int> Mesh::locate(const Vec2& p) const {
  if (grid_) {
    const GridInfo& g = *grid_;
    const double fx = (p.x - g.x0) / g.dx;
    const double fy = (p.y - g.y0) / g.dy;
    if (fx < -1e-12 || fy < -1e-12 || fx > g.nx + 1e-12 || fy > g.ny + 1e-12) return std::nullopt;
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 1);
    int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 1);
    // Which side of the cell's LL->UR diagonal? Below (or on it) -> lower tri.
    const double lx = fx - i, ly = fy - j;
    int t = 2 * (j * g.nx + i) + ((ly <= lx) ? 0 : 1);
    return t;
  }

  for (int t = 0; t < num_triangles(); ++t) {
    const Tri& tri = tris_[t];
    const Vec2 &a = vertices_[tri.v[0]], &b = vertices_[tri.v[1]], &c = vertices_[tri.v[2]];
    const double tol = -1e-12 * areas_[t];
    if (cross(b - a, p - a) >= tol && cross(c - b, p - b) >= tol && cross(a - c, p - c) >= tol)
      return t;
  }
  return std::nullopt;
}

MeshStats Mesh::stats() const {
  MeshStats s;
  s.num_vertices = num_vertices();
  s.num_triangles = num_triangles();
  s.num_edges = num_edges();
  s.num_interior_edges = num_interior_edges();
  s.h_min = std::numeric_limits<double>::max();
  for (int t = 0; t < num_triangles(); ++t) {
    const double d = diameter(t);
    s.h_max = std::max(s.h_max, d);
    s.h_min = std::min(s.h_min, d);
    s.shape_regularity = std::max(s.shape_regularity, d / inradius(t));
    s.total_area += area(t);
  }
  s.quasi_uniformity = s.h_max / s.h_min;
  return s;
}

}  // namespace varflow
