#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "varflow/mesh.hpp"
#include "varflow/quadrature.hpp"
#include "varflow/spaces.hpp"

using namespace varflow;

namespace {

Mesh two_triangle_square() {
  std::vector<Vec2> vs = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  std::vector<Tri> ts(2);
  ts[0].v = {0, 1, 2};
  ts[1].v = {0, 2, 3};
  return Mesh::from_arrays(std::move(vs), std::move(ts));
}

Eigen::VectorXd random_coeffs(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

}  // namespace

TEST_CASE("DG basis is orthonormal under independent physical quadrature") {
  const Mesh mesh = Mesh::uniform_rectangle(-1.0, 0.0, 2.0, 2.0, 2, 2);
  for (int r = 0; r <= 3; ++r) {
    const DgSpace dg(mesh, r);
    CHECK(dg.ndof_cell() == (r + 1) * (r + 2) / 2);
    CHECK(dg.dim() == dg.ndof_cell() * mesh.num_triangles());
    const QuadRule rule = triangle_rule(2 * r + 2);  // above the minimum degree
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const Eigen::MatrixXd phi = dg.ref_values(rule.points);
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dg.ndof_cell(), dg.ndof_cell());
      const double sc = dg.value_scale(t);
      for (int q = 0; q < rule.size(); ++q)
        G += (2.0 * mesh.area(t) * rule.weights[q] * sc * sc) * phi.row(q).transpose() *
             phi.row(q);
      CHECK((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("DG projection reproduces polynomials of the space's degree") {
  const Mesh mesh = Mesh::uniform_rectangle(0.0, 0.0, 1.0, 1.0, 3, 3);
  for (int r = 1; r <= 2; ++r) {
    const DgSpace dg(mesh, r);
    auto f = [r](Vec2 p) {
      return r == 1 ? 0.5 - 2.0 * p.x + 0.75 * p.y
                    : 0.5 - 2.0 * p.x + 0.75 * p.y + p.x * p.y - 0.3 * p.x * p.x;
    };
    const Eigen::VectorXd c = dg.project(f, 2 * r + 2);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const Vec2 ref{0.3, 0.5};
      const Vec2 x = mesh.map_from_reference(t, ref);
      CHECK(dg.eval(c, t, ref) == doctest::Approx(f(x)).epsilon(1e-12));
      // Gradient of the projected field matches the analytic gradient.
      const Vec2 g = dg.eval_gradient(c, t, ref);
      const Vec2 gexact =
          r == 1 ? Vec2{-2.0, 0.75} : Vec2{-2.0 + x.y - 0.6 * x.x, 0.75 + x.x};
      CHECK(norm(g - gexact) < 1e-11);
    }
  }
}

TEST_CASE("integral of a DG field equals the mass-coefficient formula") {
  const Mesh mesh = Mesh::uniform_rectangle(0.0, 0.0, 2.0, 1.0, 3, 2);
  const DgSpace dg(mesh, 2);
  auto f = [](Vec2 p) { return 1.0 + p.x * p.y - p.y * p.y; };
  const Eigen::VectorXd c = dg.project(f, 6);
  // Exact integral over the rectangle [0,2]x[0,1]: 2 + 1 - 2/3.
  double total = 0.0;
  const QuadRule rule = triangle_rule(4);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 x = mesh.map_from_reference(t, rule.points[q]);
      total += 2.0 * mesh.area(t) * rule.weights[q] * f(x);
    }
  CHECK(total == doctest::Approx(2.0 + 1.0 - 2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("hand-computed lowest-order Raviart-Thomas basis on the split square") {
  const Mesh mesh = two_triangle_square();
  const HdivSpace V(mesh, HdivFamily::RT, 0);
  // H0(div): boundary edges carry no DOFs, so only the diagonal edge remains.
  REQUIRE(V.dim() == 1);
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(1);
  e0[0] = 1.0;
  const double s2 = std::sqrt(2.0);
  // On K0 = {(0,0),(1,0),(1,1)} the basis function is sqrt(2) (x-1, y): unit
  // normal trace on the diagonal, zero on the two boundary edges.
  const Vec2 b0 = mesh.barycenter(0);  // (2/3, 1/3)
  const Vec2 v0 = V.eval(e0, 0, b0);
  CHECK(v0.x == doctest::Approx(-s2 / 3.0).epsilon(1e-13));
  CHECK(v0.y == doctest::Approx(s2 / 3.0).epsilon(1e-13));
  // On K1 = {(0,0),(1,1),(0,1)} it is -sqrt(2) (x, y-1).
  const Vec2 b1 = mesh.barycenter(1);  // (1/3, 2/3)
  const Vec2 v1 = V.eval(e0, 1, b1);
  CHECK(v1.x == doctest::Approx(-s2 / 3.0).epsilon(1e-13));
  CHECK(v1.y == doctest::Approx(s2 / 3.0).epsilon(1e-13));
  // Constant divergences +-2 sqrt(2) (flux sqrt(2) over area 1/2).
  CHECK(V.eval_divergence(e0, 0, b0) == doctest::Approx(2.0 * s2).epsilon(1e-13));
  CHECK(V.eval_divergence(e0, 1, b1) == doctest::Approx(-2.0 * s2).epsilon(1e-13));
  // Unit normal trace along the diagonal, zero trace on the boundary edges.
  for (const Edge& e : mesh.edges()) {
    const Vec2 mid = 0.5 * (mesh.vertex(e.v[0]) + mesh.vertex(e.v[1]));
    const double un = dot(V.eval(e0, e.minus, mid), e.normal);
    CHECK(un == doctest::Approx(e.is_boundary() ? 0.0 : 1.0).epsilon(1e-13));
  }
}

TEST_CASE("edge DOF blocks expose the documented Legendre normal traces") {
  const Mesh mesh = Mesh::uniform_rectangle(0.0, 0.0, 1.0, 1.0, 2, 2);
  const HdivSpace V(mesh, HdivFamily::BDM, 2);
  int eid = -1;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (!mesh.edge(e).is_boundary()) eid = e;
  REQUIRE(eid >= 0);
  const Edge& e = mesh.edge(eid);
  const int base = V.edge_dof_base(eid);
  REQUIRE(base >= 0);
  auto legendre = [](int j, double s) {
    const double x = 2.0 * s - 1.0;
    return j == 0 ? 1.0 : (j == 1 ? x : 0.5 * (3.0 * x * x - 1.0));
  };
  for (int j = 0; j <= 2; ++j) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(V.dim());
    c[base + j] = 1.0;
    for (double s : {0.2, 0.5, 0.9}) {
      const Vec2 x = mesh.vertex(e.v[0]) + s * (mesh.vertex(e.v[1]) - mesh.vertex(e.v[0]));
      const double un = dot(V.eval(c, e.minus, x), e.normal);
      CHECK(un == doctest::Approx((2.0 * j + 1.0) * legendre(j, s)).epsilon(1e-12));
    }
  }
  // Boundary edges expose no DOFs.
  for (int b = 0; b < mesh.num_edges(); ++b)
    if (mesh.edge(b).is_boundary()) CHECK(V.edge_dof_base(b) == -1);
}

TEST_CASE("space dimensions follow the element counts") {
  const Mesh mesh = Mesh::uniform_rectangle(0.0, 0.0, 1.0, 1.0, 3, 3);
  const int ei = mesh.num_interior_edges();
  const int nt = mesh.num_triangles();
  CHECK(HdivSpace(mesh, HdivFamily::RT, 0).dim() == ei);
  CHECK(HdivSpace(mesh, HdivFamily::RT, 1).dim() == 2 * ei + 2 * nt);
  CHECK(HdivSpace(mesh, HdivFamily::RT, 2).dim() == 3 * ei + 6 * nt);
  CHECK(HdivSpace(mesh, HdivFamily::BDM, 1).dim() == 2 * ei);
  CHECK(HdivSpace(mesh, HdivFamily::BDM, 2).dim() == 3 * ei + 3 * nt);
  CHECK(HdivSpace(mesh, HdivFamily::RT, 1).component_degree() == 2);
  CHECK(HdivSpace(mesh, HdivFamily::BDM, 2).component_degree() == 2);
}

TEST_CASE("interpolation reproduces space members exactly") {
  const Mesh mesh = Mesh::uniform_rectangle(-1.0, -1.0, 1.0, 1.0, 2, 2);
  struct Case {
    HdivFamily fam;
    int k;
  };
  for (const auto& [fam, k] : {Case{HdivFamily::RT, 1}, Case{HdivFamily::BDM, 2}}) {
    const HdivSpace V(mesh, fam, k);
    const Eigen::VectorXd c = random_coeffs(V.dim(), 7u);
    auto field = [&](int t, Vec2 x) { return V.eval(c, t, x); };
    const Eigen::VectorXd back = V.interpolate(field, 2 * k + 3, 2 * k + 2);
    CHECK((back - c).lpNorm<Eigen::Infinity>() < 1e-11);
    CHECK(V.interpolation_moment_residual(field, c, 2 * k + 3, 2 * k + 2) < 1e-12);
  }
}

TEST_CASE("gradient evaluation matches finite differences") {
  const Mesh mesh = Mesh::uniform_rectangle(0.0, 0.0, 1.0, 1.0, 2, 2);
  const HdivSpace V(mesh, HdivFamily::RT, 1);
  const Eigen::VectorXd c = random_coeffs(V.dim(), 11u);
  const int t = 3;
  const Vec2 x = mesh.barycenter(t);
  const double h = 1e-6;
  const Mat2 J = V.eval_gradient(c, t, x);
  const Vec2 dx = (V.eval(c, t, {x.x + h, x.y}) - V.eval(c, t, {x.x - h, x.y})) / (2.0 * h);
  const Vec2 dy = (V.eval(c, t, {x.x, x.y + h}) - V.eval(c, t, {x.x, x.y - h})) / (2.0 * h);
  CHECK(J.a00 == doctest::Approx(dx.x).epsilon(1e-6));
  CHECK(J.a10 == doctest::Approx(dx.y).epsilon(1e-6));
  CHECK(J.a01 == doctest::Approx(dy.x).epsilon(1e-6));
  CHECK(J.a11 == doctest::Approx(dy.y).epsilon(1e-6));
  // Divergence is the trace of the gradient.
  CHECK(V.eval_divergence(c, t, x) == doctest::Approx(J.a00 + J.a11).epsilon(1e-9));
}
