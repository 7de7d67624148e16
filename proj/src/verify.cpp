#include "varflow/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "varflow/cayley.hpp"
#include "varflow/config.hpp"
#include "varflow/dynamics.hpp"
#include "varflow/geometry.hpp"
#include "varflow/harness.hpp"
#include "varflow/io.hpp"
#include "varflow/mesh.hpp"
#include "varflow/operators.hpp"
#include "varflow/physics.hpp"
#include "varflow/quadrature.hpp"
#include "varflow/scenarios.hpp"
#include "varflow/spaces.hpp"

namespace varflow {
namespace {

// ---------------------------------------------------------------------------
// Check plumbing
// ---------------------------------------------------------------------------

struct CheckContext {
  bool ok = true;
  std::ostringstream notes;

  void fail(const std::string& what) {
    if (!ok) notes << "; ";
    ok = false;
    notes << what;
  }
  void require(bool cond, const std::string& what) {
    if (!cond) fail(what);
  }
  void require_small(double value, double tol, const std::string& what) {
    if (!(std::abs(value) <= tol)) {
      std::ostringstream os;
      os << what << " = " << value << " exceeds " << tol;
      fail(os.str());
    }
  }
  void require_near(double a, double b, double tol, const std::string& what) {
    require_small(a - b, tol, what);
  }
};

struct CheckDef {
  std::string name;
  std::function<void(CheckContext&)> fn;
};

template <class F>
bool throws_exception(F&& fn) {
  try {
    fn();
  } catch (const std::exception&) {
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Fixtures and small helpers
// ---------------------------------------------------------------------------

Eigen::VectorXd random_coeffs(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

Mesh square_mesh(int n) { return Mesh::uniform_rectangle(-1.0, -1.0, 1.0, 1.0, n, n); }

/// Small irregular patch: a fan of four triangles around an off-center vertex.
Mesh skewed_patch() {
  std::vector<Vec2> vs = {{0.0, 0.0}, {1.1, 0.0}, {1.4, 1.0}, {0.2, 0.9}, {0.55, 0.45}};
  std::vector<Tri> ts(4);
  ts[0].v = {0, 1, 4};
  ts[1].v = {1, 2, 4};
  ts[2].v = {2, 3, 4};
  ts[3].v = {3, 0, 4};
  return Mesh::from_arrays(std::move(vs), std::move(ts));
}

Mesh single_triangle() {
  std::vector<Vec2> vs = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  std::vector<Tri> ts(1);
  ts[0].v = {0, 1, 2};
  return Mesh::from_arrays(std::move(vs), std::move(ts));
}

/// Wraps an elementwise callable as a velocity field (minus-trace on edges).
class ElementwiseVelocity final : public VelocityField {
 public:
  explicit ElementwiseVelocity(std::function<Vec2(int, const Vec2&)> f) : f_(std::move(f)) {}
  Vec2 value(int t, const Vec2& phys) const override { return f_(t, phys); }

 private:
  std::function<Vec2(int, const Vec2&)> f_;
};

double max_abs(const SpMat& A) {
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double max_abs(const Eigen::MatrixXd& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

double dg_at(const DgSpace& dg, const Eigen::VectorXd& c, int t, const Vec2& phys) {
  return dg.eval(c, t, dg.mesh().map_to_reference(t, phys));
}

Vec2 dgvec_at(const DgSpace& dg, const DgVec2& w, int t, const Vec2& phys) {
  const Vec2 ref = dg.mesh().map_to_reference(t, phys);
  return {dg.eval(w.x, t, ref), dg.eval(w.y, t, ref)};
}

/// Values of every DG basis function of element t at physical points,
/// including the orthonormal scaling (rows = points, cols = local dofs).
Eigen::MatrixXd dg_values_at(const DgSpace& dg, int t, const std::vector<Vec2>& phys) {
  std::vector<Vec2> ref(phys.size());
  for (std::size_t i = 0; i < phys.size(); ++i) ref[i] = dg.mesh().map_to_reference(t, phys[i]);
  return dg.ref_values(ref) * dg.value_scale(t);
}

struct EdgeSample {
  std::vector<Vec2> points;
  std::vector<double> weights;  // includes the edge length
};

EdgeSample sample_edge(const Mesh& mesh, const Edge& e, int degree) {
  const EdgeRule rule = edge_rule(degree);
  EdgeSample s;
  const Vec2 a = mesh.vertex(e.v[0]);
  const Vec2 b = mesh.vertex(e.v[1]);
  for (int q = 0; q < rule.size(); ++q) {
    s.points.push_back(a + rule.points[q] * (b - a));
    s.weights.push_back(e.length * rule.weights[q]);
  }
  return s;
}

/// Fixed interior sample points on the reference triangle.
const std::vector<Vec2>& ref_samples() {
  static const std::vector<Vec2> pts = {{0.2, 0.3}, {0.5, 0.25}, {0.15, 0.6}, {1.0 / 3, 1.0 / 3}};
  return pts;
}

State advance(const FlowSolver& solver, State s, double dt, int nsteps, const StepperOptions& opt,
              StepStats* last = nullptr) {
  for (int k = 0; k < nsteps; ++k) {
    StepStats st;
    s = solver.step(s, dt, opt, &st);
    if (!st.converged) throw std::runtime_error("advance: step did not converge");
    if (last) *last = st;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

void check_quadrature_exactness(CheckContext& c) {
  for (int d = 0; d <= kMaxQuadDegree; ++d) {
    std::string why;
    const QuadRule rule = triangle_rule(d);
    c.require(triangle_rule_is_exact(rule, d, 1e-13, &why),
              "triangle rule degree " + std::to_string(d) + ": " + why);
    double wsum = 0.0;
    bool positive = true;
    for (double w : rule.weights) {
      wsum += w;
      positive = positive && w > 0.0;
    }
    c.require(positive, "nonpositive weight in triangle rule " + std::to_string(d));
    c.require_small(wsum - 0.5, 1e-14, "triangle rule " + std::to_string(d) + " weight sum");
    const EdgeRule er = edge_rule(d);
    c.require(edge_rule_is_exact(er, d, 1e-14, &why),
              "edge rule degree " + std::to_string(d) + ": " + why);
  }
}

void check_quadrature_fault_injection(CheckContext& c) {
  // The exactness checker must flag a perturbed rule; this guards the checker
  // itself (a checker that accepts everything would mask real regressions).
  QuadRule bad = triangle_rule(4);
  bad.weights[0] += 1e-6;
  c.require(!triangle_rule_is_exact(bad, 4, 1e-13), "perturbed triangle weight not detected");
  EdgeRule bade = edge_rule(5);
  bade.points[0] += 1e-7;
  c.require(!edge_rule_is_exact(bade, 5, 1e-13), "perturbed edge node not detected");
}

// ---------------------------------------------------------------------------
// DG space
// ---------------------------------------------------------------------------

void check_dg_orthonormality(CheckContext& c) {
  const Mesh meshes[] = {square_mesh(3), skewed_patch()};
  for (const Mesh& mesh : meshes) {
    for (int r = 0; r <= 3; ++r) {
      const DgSpace dg(mesh, r);
      const QuadRule rule = triangle_rule(2 * r);
      const Eigen::MatrixXd phi = dg.ref_values(rule.points);
      for (int t = 0; t < mesh.num_triangles(); ++t) {
        // With the 1/sqrt(2|K|) scaling the local Gram reduces to the
        // reference-rule Gram of the reference values.
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dg.ndof_cell(), dg.ndof_cell());
        for (int q = 0; q < rule.size(); ++q)
          G += rule.weights[q] * phi.row(q).transpose() * phi.row(q);
        G -= Eigen::MatrixXd::Identity(dg.ndof_cell(), dg.ndof_cell());
        c.require_small(max_abs(G), 1e-12, "basis Gram (r=" + std::to_string(r) + ")");
      }
      // Projection reproduces degree-r polynomials pointwise.
      auto f = [r](Vec2 p) { return std::pow(0.4 + 0.3 * p.x - 0.25 * p.y, r); };
      const Eigen::VectorXd proj = dg.project(f, 2 * r + 2);
      for (int t = 0; t < mesh.num_triangles(); ++t)
        for (const Vec2& ref : ref_samples()) {
          const Vec2 x = mesh.map_from_reference(t, ref);
          c.require_small(dg.eval(proj, t, ref) - f(x), 1e-12,
                          "projection reproduction (r=" + std::to_string(r) + ")");
        }
    }
  }
}

// ---------------------------------------------------------------------------
// H(div) spaces
// ---------------------------------------------------------------------------

void check_hdiv_interpolation(CheckContext& c) {
  struct Case {
    HdivFamily fam;
    int k;
  };
  const Case cases[] = {{HdivFamily::RT, 0},  {HdivFamily::RT, 1},  {HdivFamily::RT, 2},
                        {HdivFamily::BDM, 1}, {HdivFamily::BDM, 2}};
  const Mesh meshes[] = {square_mesh(2), skewed_patch()};
  for (const Mesh& mesh : meshes) {
    for (const Case& cs : cases) {
      const HdivSpace V(mesh, cs.fam, cs.k);
      const std::string tag =
          (cs.fam == HdivFamily::RT ? "RT_" : "BDM_") + std::to_string(cs.k);
      const int eq = 2 * cs.k + 3, vq = 2 * cs.k + 2;
      // Interpolating a basis function must return its unit coefficient
      // vector (duality of the degrees of freedom).
      for (int i = 0; i < V.dim(); ++i) {
        Eigen::VectorXd ei = Eigen::VectorXd::Zero(V.dim());
        ei[i] = 1.0;
        auto field = [&](int t, Vec2 x) { return V.eval(ei, t, x); };
        const Eigen::VectorXd back = V.interpolate(field, eq, vq);
        c.require_small((back - ei).lpNorm<Eigen::Infinity>(), 1e-11,
                        tag + " dof duality, basis " + std::to_string(i));
      }
      // Moment residual of a generic smooth field vanishes by construction.
      auto u = [](Vec2 p) {
        return Vec2{std::sin(p.x) + 0.3 * p.y * p.y, std::cos(0.7 * p.y) - 0.2 * p.x};
      };
      auto uelt = [&u](int, Vec2 x) { return u(x); };
      const Eigen::VectorXd coeffs = V.interpolate(u, 10, 10);
      c.require_small(V.interpolation_moment_residual(uelt, coeffs, 10, 10), 1e-11,
                      tag + " moment residual");
    }
  }
  const Mesh mesh = square_mesh(2);
  c.require(HdivSpace(mesh, HdivFamily::RT, 0).contained_in_dg(1), "RT_0 embeds in r=1");
  c.require(!HdivSpace(mesh, HdivFamily::RT, 0).contained_in_dg(0), "RT_0 does not embed in r=0");
  c.require(HdivSpace(mesh, HdivFamily::BDM, 1).contained_in_dg(1), "BDM_1 embeds in r=1");
}

void check_hdiv_conformity(CheckContext& c) {
  const Mesh meshes[] = {square_mesh(3), skewed_patch()};
  for (const Mesh& mesh : meshes) {
    for (int k = 0; k <= 2; ++k) {
      const HdivSpace V(mesh, HdivFamily::RT, k);
      const Eigen::VectorXd u = random_coeffs(V.dim(), 17u + static_cast<unsigned>(k));
      const double scale = 1.0 + u.lpNorm<Eigen::Infinity>();
      for (const Edge& e : mesh.edges()) {
        const EdgeSample s = sample_edge(mesh, e, 3);
        for (const Vec2& x : s.points) {
          if (e.is_boundary()) {
            c.require_small(dot(V.eval(u, e.minus, x), e.normal), 1e-11 * scale,
                            "boundary normal trace (k=" + std::to_string(k) + ")");
          } else {
            const double un_m = dot(V.eval(u, e.minus, x), e.normal);
            const double un_p = dot(V.eval(u, e.plus, x), e.normal);
            c.require_small(un_m - un_p, 1e-11 * scale,
                            "normal continuity (k=" + std::to_string(k) + ")");
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Advection operator basics
// ---------------------------------------------------------------------------

void check_advection_constants(CheckContext& c) {
  const Mesh meshes[] = {square_mesh(3), Mesh::equilateral_patch(2, 2), skewed_patch()};
  for (const Mesh& mesh : meshes) {
    for (int r = 0; r <= 2; ++r) {
      const DgSpace dg(mesh, r);
      const AnalyticVelocity u(
          [](Vec2 p) { return Vec2{std::sin(1.3 * p.x + 0.2), std::exp(0.3 * p.y)}; });
      const AuQuadrature quad = recommended_au_quadrature(dg, 3);
      const SpMat A = assemble_advection(dg, u, quad);
      const Eigen::VectorXd ones = dg.project([](Vec2) { return 1.0; }, 2 * r + 2);
      const double scale = 1.0 + max_abs(A) * ones.lpNorm<Eigen::Infinity>();
      c.require_small((A * ones).lpNorm<Eigen::Infinity>(), 1e-12 * scale,
                      "A_u 1 (r=" + std::to_string(r) + ")");
    }
  }
}

void check_transport_adjoint(CheckContext& c) {
  const Mesh mesh = square_mesh(3);
  for (int r = 0; r <= 2; ++r) {
    const DgSpace dg(mesh, r);
    const HdivSpace V(mesh, HdivFamily::RT, 1);
    const Eigen::VectorXd uc = random_coeffs(V.dim(), 23u + static_cast<unsigned>(r));
    const HdivVelocity u(V, uc);
    const AuQuadrature quad = recommended_au_quadrature(dg, V.component_degree());
    const SpMat A = assemble_advection(dg, u, quad);
    const SpMat T = assemble_transport(dg, u, quad);
    const Eigen::MatrixXd diff = Eigen::MatrixXd(T) - Eigen::MatrixXd(A).transpose();
    c.require_small(max_abs(diff), 1e-13 * (1.0 + max_abs(A)),
                    "T = A^T (r=" + std::to_string(r) + ")");
    // Total-mass rate vanishes: pairing the density ODE with the constant.
    const Eigen::VectorXd ones = dg.project([](Vec2) { return 1.0; }, 2);
    const Eigen::VectorXd rho = random_coeffs(dg.dim(), 29u);
    c.require_small(ones.dot(T * rho), 1e-11 * (1.0 + max_abs(T) * rho.norm()),
                    "mass rate (r=" + std::to_string(r) + ")");
    // Zero velocity gives the zero operator.
    const AnalyticVelocity zero([](Vec2) { return Vec2{0.0, 0.0}; });
    c.require_small(max_abs(assemble_transport(dg, zero, quad)), 0.0, "T(0)");
  }
}

void check_skew_divergence(CheckContext& c) {
  const Mesh meshes[] = {square_mesh(2), skewed_patch()};
  for (const Mesh& mesh : meshes) {
    for (int r = 0; r <= 2; ++r) {
      const DgSpace dg(mesh, r);
      const HdivSpace V(mesh, HdivFamily::RT, 1);
      const Eigen::VectorXd uc = random_coeffs(V.dim(), 31u + static_cast<unsigned>(r));
      const HdivVelocity u(V, uc);
      const AuQuadrature quad = recommended_au_quadrature(dg, V.component_degree());
      const Eigen::MatrixXd A = Eigen::MatrixXd(assemble_advection(dg, u, quad));
      // Divergence-weighted mass matrix, exact rule (div u in P_1 here).
      const QuadRule rule = triangle_rule(std::min(kMaxQuadDegree, 1 + 2 * r));
      const Eigen::MatrixXd phi = dg.ref_values(rule.points);
      Eigen::MatrixXd D = Eigen::MatrixXd::Zero(dg.dim(), dg.dim());
      for (int t = 0; t < mesh.num_triangles(); ++t)
        for (int q = 0; q < rule.size(); ++q) {
          const Vec2 x = mesh.map_from_reference(t, rule.points[q]);
          const double w = rule.weights[q] * V.eval_divergence(uc, t, x);
          for (int i = 0; i < dg.ndof_cell(); ++i)
            for (int j = 0; j < dg.ndof_cell(); ++j)
              D(dg.global_index(t, i), dg.global_index(t, j)) += w * phi(q, i) * phi(q, j);
        }
      const double scale = 1.0 + max_abs(A) + max_abs(D);
      c.require_small(max_abs(Eigen::MatrixXd(A + A.transpose() + D)), 1e-11 * scale,
                      "A + A^T + M_div (r=" + std::to_string(r) + ")");
    }
  }
}

void check_r0_stencil(CheckContext& c) {
  const Mesh meshes[] = {square_mesh(3), Mesh::equilateral_patch(3, 2)};
  for (const Mesh& mesh : meshes) {
    const DgSpace dg(mesh, 0);
    const HdivSpace V(mesh, HdivFamily::RT, 1);
    const Eigen::VectorXd uc = random_coeffs(V.dim(), 37u);
    const HdivVelocity u(V, uc);
    const AuQuadrature quad = recommended_au_quadrature(dg, V.component_degree());
    const Eigen::MatrixXd M = Eigen::MatrixXd(assemble_advection(dg, u, quad));
    // Representation on the unscaled indicator basis: psi_j = sqrt(|K_j|) phi_j.
    const int T = mesh.num_triangles();
    Eigen::MatrixXd rep(T, T);
    for (int i = 0; i < T; ++i)
      for (int j = 0; j < T; ++j)
        rep(i, j) = M(i, j) * std::sqrt(mesh.area(j) / mesh.area(i));
    // Expected stencil: off-diagonal (1/2|K_i|) int_e u.n_i^out for each
    // neighbour, diagonal -(1/2|K_i|) int_K div u.  (These signs make the
    // rows annihilate constants together with the zero-row-sum property.)
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(T, T);
    const QuadRule vrule = triangle_rule(1);
    for (int t = 0; t < T; ++t) {
      double divint = 0.0;
      for (int q = 0; q < vrule.size(); ++q)
        divint += 2.0 * mesh.area(t) * vrule.weights[q] *
                  V.eval_divergence(uc, t, mesh.map_from_reference(t, vrule.points[q]));
      expected(t, t) = -divint / (2.0 * mesh.area(t));
    }
    for (const Edge& e : mesh.edges()) {
      if (e.is_boundary()) continue;
      const EdgeSample s = sample_edge(mesh, e, 3);
      double flux = 0.0;  // int_e u . n with n = minus -> plus
      for (std::size_t q = 0; q < s.points.size(); ++q)
        flux += s.weights[q] * dot(V.eval(uc, e.minus, s.points[q]), e.normal);
      expected(e.minus, e.plus) += flux / (2.0 * mesh.area(e.minus));
      expected(e.plus, e.minus) += -flux / (2.0 * mesh.area(e.plus));
    }
    c.require_small(max_abs(Eigen::MatrixXd(rep - expected)), 1e-10 * (1.0 + max_abs(expected)),
                    "lowest-order stencil");
  }
}

// ---------------------------------------------------------------------------
// Hat map
// ---------------------------------------------------------------------------

void check_hat_projection(CheckContext& c) {
  const Mesh meshes[] = {square_mesh(2), skewed_patch()};
  for (const Mesh& mesh : meshes) {
    for (int r = 1; r <= 2; ++r) {
      const DgSpace dg(mesh, r);
      const DgVec2 coords = coordinate_field(dg, r + 2);
      const HdivFamily fams[] = {HdivFamily::RT, HdivFamily::BDM};
      for (HdivFamily fam : fams) {
        const HdivSpace V(mesh, fam, r);
        const Eigen::VectorXd uc = random_coeffs(V.dim(), 41u + static_cast<unsigned>(r));
        const HdivVelocity u(V, uc);
        const SpMat A = assemble_advection(dg, u, recommended_au_quadrature(dg, V.component_degree()));
        const DgVec2 hat = hat_map(A, coords);
        const DgVec2 ih = hat_velocity(dg, u, V.component_degree() + r + 1);
        const double scale = 1.0 + ih.x.lpNorm<Eigen::Infinity>() + ih.y.lpNorm<Eigen::Infinity>();
        c.require_small((hat.x - ih.x).lpNorm<Eigen::Infinity>(), 1e-10 * scale,
                        "hat = componentwise projection, x (r=" + std::to_string(r) + ")");
        c.require_small((hat.y - ih.y).lpNorm<Eigen::Infinity>(), 1e-10 * scale,
                        "hat = componentwise projection, y (r=" + std::to_string(r) + ")");
      }
    }
  }
}

void check_hat_equilateral(CheckContext& c) {
  const Mesh mesh = Mesh::equilateral_patch(3, 2);
  const DgSpace dg(mesh, 0);
  const HdivSpace V(mesh, HdivFamily::RT, 0);
  const Eigen::VectorXd uc = random_coeffs(V.dim(), 43u);
  const AuQuadrature quad = recommended_au_quadrature(dg, V.component_degree());
  const SpMat A = assemble_advection(dg, HdivVelocity(V, uc), quad);
  const DgVec2 coords = coordinate_field(dg, 2);
  const DgVec2 hat = hat_map(A, coords);
  const double scale = 1.0 + uc.lpNorm<Eigen::Infinity>();
  // On a patch of regular triangles the lowest-order hat recovers the field's
  // cell values: hat(A_u)|_K = u(barycenter_K) for every u in RT_0.
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Vec2 hv = dgvec_at(dg, hat, t, mesh.barycenter(t));
    const Vec2 uv = V.eval(uc, t, mesh.barycenter(t));
    c.require_small(norm(hv - uv), 1e-10 * scale, "hat vs cell value, element " + std::to_string(t));
  }
  // For divergence-free members of RT_0 (elementwise constant fields) the
  // recovery is exact pointwise.
  const int T = mesh.num_triangles();
  Eigen::MatrixXd C(T, V.dim());
  for (int j = 0; j < V.dim(); ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Zero(V.dim());
    ej[j] = 1.0;
    for (int t = 0; t < T; ++t)
      C(t, j) = mesh.area(t) * V.eval_divergence(ej, t, mesh.barycenter(t));
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
  const Eigen::MatrixXd ker = lu.kernel();
  c.require(ker.cols() >= 1 && ker.col(0).norm() > 1e-12, "divergence-free subspace nonempty");
  if (ker.cols() >= 1 && ker.col(0).norm() > 1e-12) {
    const Eigen::VectorXd w = ker.col(0) / ker.col(0).norm();
    const SpMat Aw = assemble_advection(dg, HdivVelocity(V, w), quad);
    const DgVec2 hatw = hat_map(Aw, coords);
    for (int t = 0; t < T; ++t)
      for (const Vec2& ref : ref_samples()) {
        const Vec2 x = mesh.map_from_reference(t, ref);
        c.require_small(norm(dgvec_at(dg, hatw, t, x) - V.eval(w, t, x)), 1e-10,
                        "pointwise recovery of a divergence-free field");
      }
  }
}

// ---------------------------------------------------------------------------
// Commutator bracket formulas
// ---------------------------------------------------------------------------

/// Quadrature assembly of the bracket pairing right-hand side
///   g -> sum_K int (grad vbar^k . u - grad ubar^k . v) g
///        - sum_{interior e} int (u.n [vbar^k] - v.n [ubar^k]) {g}
/// with [x] = x_minus - x_plus and n oriented minus -> plus, returned as the
/// coefficient vectors of both components over the (orthonormal) DG basis.
DgVec2 bracket_rhs(const DgSpace& dg, const HdivSpace& V, const Eigen::VectorXd& u,
                   const Eigen::VectorXd& v, const DgVec2& ubar, const DgVec2& vbar, int vol_deg,
                   int edge_deg) {
  const Mesh& mesh = dg.mesh();
  DgVec2 rhs(dg.dim());
  const QuadRule rule = triangle_rule(vol_deg);
  const Eigen::MatrixXd phi = dg.ref_values(rule.points);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double jac = 2.0 * mesh.area(t);
    const double sc = dg.value_scale(t);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 ref = rule.points[q];
      const Vec2 x = mesh.map_from_reference(t, ref);
      const Vec2 uu = V.eval(u, t, x);
      const Vec2 vv = V.eval(v, t, x);
      const double fx = dot(dg.eval_gradient(vbar.x, t, ref), uu) -
                        dot(dg.eval_gradient(ubar.x, t, ref), vv);
      const double fy = dot(dg.eval_gradient(vbar.y, t, ref), uu) -
                        dot(dg.eval_gradient(ubar.y, t, ref), vv);
      const double w = jac * rule.weights[q];
      for (int i = 0; i < dg.ndof_cell(); ++i) {
        const double g = phi(q, i) * sc;
        rhs.x[dg.global_index(t, i)] += w * fx * g;
        rhs.y[dg.global_index(t, i)] += w * fy * g;
      }
    }
  }
  for (const Edge& e : mesh.edges()) {
    if (e.is_boundary()) continue;
    const EdgeSample s = sample_edge(mesh, e, edge_deg);
    const Eigen::MatrixXd gm = dg_values_at(dg, e.minus, s.points);
    const Eigen::MatrixXd gp = dg_values_at(dg, e.plus, s.points);
    for (std::size_t q = 0; q < s.points.size(); ++q) {
      const Vec2& x = s.points[q];
      const double un = dot(V.eval(u, e.minus, x), e.normal);
      const double vn = dot(V.eval(v, e.minus, x), e.normal);
      const Vec2 rm = mesh.map_to_reference(e.minus, x);
      const Vec2 rp = mesh.map_to_reference(e.plus, x);
      const double jux = dg.eval(ubar.x, e.minus, rm) - dg.eval(ubar.x, e.plus, rp);
      const double juy = dg.eval(ubar.y, e.minus, rm) - dg.eval(ubar.y, e.plus, rp);
      const double jvx = dg.eval(vbar.x, e.minus, rm) - dg.eval(vbar.x, e.plus, rp);
      const double jvy = dg.eval(vbar.y, e.minus, rm) - dg.eval(vbar.y, e.plus, rp);
      const double tx = un * jvx - vn * jux;
      const double ty = un * jvy - vn * juy;
      const double w = s.weights[q];
      for (int i = 0; i < dg.ndof_cell(); ++i) {
        rhs.x[dg.global_index(e.minus, i)] -= w * tx * 0.5 * gm(static_cast<int>(q), i);
        rhs.y[dg.global_index(e.minus, i)] -= w * ty * 0.5 * gm(static_cast<int>(q), i);
        rhs.x[dg.global_index(e.plus, i)] -= w * tx * 0.5 * gp(static_cast<int>(q), i);
        rhs.y[dg.global_index(e.plus, i)] -= w * ty * 0.5 * gp(static_cast<int>(q), i);
      }
    }
  }
  return rhs;
}

void check_bracket_cell_edge(CheckContext& c) {
  // General fields: hats of the commutator against the interpolated-component
  // formula, u and v normal-continuous with zero boundary trace.
  const Mesh meshes[] = {square_mesh(2), skewed_patch()};
  for (const Mesh& mesh : meshes) {
    for (int r = 1; r <= 2; ++r) {
      const DgSpace dg(mesh, r);
      const DgVec2 coords = coordinate_field(dg, r + 2);
      const HdivSpace V(mesh, HdivFamily::RT, r);
      const Eigen::VectorXd uc = random_coeffs(V.dim(), 47u + static_cast<unsigned>(r));
      const Eigen::VectorXd vc = random_coeffs(V.dim(), 53u + static_cast<unsigned>(r));
      const AuQuadrature quad = recommended_au_quadrature(dg, V.component_degree());
      const SpMat Au = assemble_advection(dg, HdivVelocity(V, uc), quad);
      const SpMat Av = assemble_advection(dg, HdivVelocity(V, vc), quad);
      const DgVec2 lhs = hat_map(commutator(Au, Av), coords);
      const int pd = V.component_degree() + r;
      const DgVec2 ubar = hat_velocity(dg, HdivVelocity(V, uc), pd + 1);
      const DgVec2 vbar = hat_velocity(dg, HdivVelocity(V, vc), pd + 1);
      const DgVec2 rhs = bracket_rhs(dg, V, uc, vc, ubar, vbar, 3 * r + 2, 3 * r + 2);
      const double scale =
          1.0 + rhs.x.lpNorm<Eigen::Infinity>() + rhs.y.lpNorm<Eigen::Infinity>();
      c.require_small((lhs.x - rhs.x).lpNorm<Eigen::Infinity>(), 1e-10 * scale,
                      "x component (r=" + std::to_string(r) + ")");
      c.require_small((lhs.y - rhs.y).lpNorm<Eigen::Infinity>(), 1e-10 * scale,
                      "y component (r=" + std::to_string(r) + ")");
    }
  }
}

void check_bracket_piecewise(CheckContext& c) {
  // Piecewise-P_r specialization: the bars drop and the volume integrand is
  // the elementwise Lie bracket of the fields themselves, evaluated here
  // straight from the H(div) fields (jumps from two-sided traces).
  const Mesh mesh = square_mesh(2);
  for (int r = 1; r <= 2; ++r) {
    const DgSpace dg(mesh, r);
    const DgVec2 coords = coordinate_field(dg, r + 2);
    const HdivSpace V(mesh, HdivFamily::BDM, r);  // piecewise P_r, normal-continuous
    const Eigen::VectorXd uc = random_coeffs(V.dim(), 59u + static_cast<unsigned>(r));
    const Eigen::VectorXd vc = random_coeffs(V.dim(), 61u + static_cast<unsigned>(r));
    const AuQuadrature quad = recommended_au_quadrature(dg, V.component_degree());
    const SpMat Au = assemble_advection(dg, HdivVelocity(V, uc), quad);
    const SpMat Av = assemble_advection(dg, HdivVelocity(V, vc), quad);
    const DgVec2 lhs = hat_map(commutator(Au, Av), coords);

    DgVec2 rhs(dg.dim());
    const QuadRule rule = triangle_rule(3 * r);
    const Eigen::MatrixXd phi = dg.ref_values(rule.points);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const double jac = 2.0 * mesh.area(t);
      const double sc = dg.value_scale(t);
      for (int q = 0; q < rule.size(); ++q) {
        const Vec2 x = mesh.map_from_reference(t, rule.points[q]);
        const Vec2 uu = V.eval(uc, t, x);
        const Vec2 vv = V.eval(vc, t, x);
        const Mat2 Ju = V.eval_gradient(uc, t, x);
        const Mat2 Jv = V.eval_gradient(vc, t, x);
        const Vec2 br = Jv.apply(uu) - Ju.apply(vv);  // [u,v] elementwise
        const double w = jac * rule.weights[q];
        for (int i = 0; i < dg.ndof_cell(); ++i) {
          const double g = phi(q, i) * sc;
          rhs.x[dg.global_index(t, i)] += w * br.x * g;
          rhs.y[dg.global_index(t, i)] += w * br.y * g;
        }
      }
    }
    for (const Edge& e : mesh.edges()) {
      if (e.is_boundary()) continue;
      const EdgeSample s = sample_edge(mesh, e, 3 * r + 1);
      const Eigen::MatrixXd gm = dg_values_at(dg, e.minus, s.points);
      const Eigen::MatrixXd gp = dg_values_at(dg, e.plus, s.points);
      for (std::size_t q = 0; q < s.points.size(); ++q) {
        const Vec2& x = s.points[q];
        const Vec2 um = V.eval(uc, e.minus, x), up = V.eval(uc, e.plus, x);
        const Vec2 vm = V.eval(vc, e.minus, x), vp = V.eval(vc, e.plus, x);
        const double un = 0.5 * dot(um + up, e.normal);
        const double vn = 0.5 * dot(vm + vp, e.normal);
        const Vec2 ju = um - up, jv = vm - vp;
        const double tx = un * jv.x - vn * ju.x;
        const double ty = un * jv.y - vn * ju.y;
        const double w = s.weights[q];
        for (int i = 0; i < dg.ndof_cell(); ++i) {
          rhs.x[dg.global_index(e.minus, i)] -= w * tx * 0.5 * gm(static_cast<int>(q), i);
          rhs.y[dg.global_index(e.minus, i)] -= w * ty * 0.5 * gm(static_cast<int>(q), i);
          rhs.x[dg.global_index(e.plus, i)] -= w * tx * 0.5 * gp(static_cast<int>(q), i);
          rhs.y[dg.global_index(e.plus, i)] -= w * ty * 0.5 * gp(static_cast<int>(q), i);
        }
      }
    }
    const double scale = 1.0 + rhs.x.lpNorm<Eigen::Infinity>() + rhs.y.lpNorm<Eigen::Infinity>();
    c.require_small((lhs.x - rhs.x).lpNorm<Eigen::Infinity>(), 1e-10 * scale,
                    "x component (r=" + std::to_string(r) + ")");
    c.require_small((lhs.y - rhs.y).lpNorm<Eigen::Infinity>(), 1e-10 * scale,
                    "y component (r=" + std::to_string(r) + ")");
  }
}

void check_bracket_triple(CheckContext& c) {
  // Triple pairing: int hat([A_u,A_v]) . hat(A_w) against the cell/edge
  // cross-product formula with [u x v] = {u} x [v] + [u] x {v}.
  const Mesh meshes[] = {square_mesh(2), skewed_patch()};
  for (const Mesh& mesh : meshes) {
    for (int r = 1; r <= 2; ++r) {
      const DgSpace dg(mesh, r);
      const DgVec2 coords = coordinate_field(dg, r + 2);
      const HdivSpace V(mesh, HdivFamily::BDM, r);
      const Eigen::VectorXd uc = random_coeffs(V.dim(), 67u + static_cast<unsigned>(r));
      const Eigen::VectorXd vc = random_coeffs(V.dim(), 71u + static_cast<unsigned>(r));
      const Eigen::VectorXd wc = random_coeffs(V.dim(), 73u + static_cast<unsigned>(r));
      const AuQuadrature quad = recommended_au_quadrature(dg, V.component_degree());
      const SpMat Au = assemble_advection(dg, HdivVelocity(V, uc), quad);
      const SpMat Av = assemble_advection(dg, HdivVelocity(V, vc), quad);
      const SpMat Aw = assemble_advection(dg, HdivVelocity(V, wc), quad);
      const DgVec2 hatC = hat_map(commutator(Au, Av), coords);
      const DgVec2 hatW = hat_map(Aw, coords);
      const double lhs = hatC.x.dot(hatW.x) + hatC.y.dot(hatW.y);

      double vol = 0.0;
      const QuadRule rule = triangle_rule(3 * r);
      for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area(t);
        for (int q = 0; q < rule.size(); ++q) {
          const Vec2 x = mesh.map_from_reference(t, rule.points[q]);
          const Vec2 uu = V.eval(uc, t, x);
          const Vec2 vv = V.eval(vc, t, x);
          const Vec2 ww = V.eval(wc, t, x);
          const Vec2 br = V.eval_gradient(vc, t, x).apply(uu) - V.eval_gradient(uc, t, x).apply(vv);
          vol += jac * rule.weights[q] * dot(br, ww);
        }
      }
      double edge = 0.0;
      for (const Edge& e : mesh.edges()) {
        if (e.is_boundary()) continue;
        const EdgeSample s = sample_edge(mesh, e, 3 * r + 1);
        for (std::size_t q = 0; q < s.points.size(); ++q) {
          const Vec2& x = s.points[q];
          const Vec2 um = V.eval(uc, e.minus, x), up = V.eval(uc, e.plus, x);
          const Vec2 vm = V.eval(vc, e.minus, x), vp = V.eval(vc, e.plus, x);
          const Vec2 wm = V.eval(wc, e.minus, x), wp = V.eval(wc, e.plus, x);
          const Vec2 uavg = 0.5 * (um + up), vavg = 0.5 * (vm + vp), wavg = 0.5 * (wm + wp);
          const Vec2 ujmp = um - up, vjmp = vm - vp;
          const double uxv = cross(uavg, vjmp) + cross(ujmp, vavg);  // [u x v]
          edge += s.weights[q] * cross(e.normal, wavg) * uxv;
        }
      }
      const double rhs = vol - edge;
      c.require_small(lhs - rhs, 1e-10 * (1.0 + std::abs(vol) + std::abs(edge)),
                      "triple pairing (r=" + std::to_string(r) + ")");
    }
  }
}

// ---------------------------------------------------------------------------
// Kernel and rank of u -> A_u
// ---------------------------------------------------------------------------

void check_kernel_interpolation(CheckContext& c) {
  const Mesh mesh = square_mesh(2);
  for (int r = 0; r <= 1; ++r) {
    const DgSpace dg(mesh, r);
    const HdivSpace Pi(mesh, HdivFamily::RT, 2 * r);
    // A polynomial field of component degree 2r+1 outside RT_{2r}: its
    // interpolation defect v - Pi(v) has vanishing interior-edge and volume
    // moments, so its advection operator is zero.
    auto vf = (r == 0) ? std::function<Vec2(Vec2)>([](Vec2 p) { return Vec2{p.y, 0.3 * p.x}; })
                       : std::function<Vec2(Vec2)>([](Vec2 p) {
                           return Vec2{p.x * p.x * p.x, p.y * p.y * p.y};
                         });
    const int vdeg = 2 * r + 1;
    const Eigen::VectorXd pv = Pi.interpolate(vf, 2 * vdeg + 3, 2 * vdeg + 2);
    const ElementwiseVelocity defect(
        [&](int t, const Vec2& x) { return vf(x) - Pi.eval(pv, t, x); });
    const AuQuadrature quad = recommended_au_quadrature(dg, vdeg);
    const SpMat Ad = assemble_advection(dg, defect, quad);
    const AnalyticVelocity vfield(vf);
    const double scale = 1.0 + max_abs(assemble_advection(dg, vfield, quad));
    c.require_small(max_abs(Ad), 1e-10 * scale,
                    "interpolation defect annihilated (r=" + std::to_string(r) + ")");
    // Fields the interpolation sees must not be annihilated.
    if (r == 0) {
      int eid = -1;
      for (int e = 0; e < mesh.num_edges(); ++e)
        if (!mesh.edge(e).is_boundary()) {
          eid = e;
          break;
        }
      Eigen::VectorXd ec = Eigen::VectorXd::Zero(Pi.dim());
      ec[Pi.edge_dof_base(eid)] = 1.0;
      const SpMat Ab = assemble_advection(dg, HdivVelocity(Pi, ec), quad);
      c.require(max_abs(Ab) > 1e-6, "edge mode not annihilated (r=0)");
    } else {
      const ElementwiseVelocity bubble([&](int t, const Vec2& x) {
        if (t != 0) return Vec2{0.0, 0.0};
        const Vec2 ref = mesh.map_to_reference(0, x);
        const double b = (1.0 - ref.x - ref.y) * ref.x * ref.y;
        return Vec2{0.7 * b, -0.4 * b};
      });
      const SpMat Ab = assemble_advection(dg, bubble, recommended_au_quadrature(dg, 3));
      c.require(max_abs(Ab) > 1e-8, "interior bubble not annihilated (r=1)");
    }
  }
}

void check_rank_isomorphism(CheckContext& c) {
  for (int r = 0; r <= 1; ++r) {
    for (int nx = 4; nx <= 8; nx *= 2) {
      const Mesh mesh = square_mesh(nx);
      const DgSpace dg(mesh, r);
      const HdivSpace V(mesh, HdivFamily::RT, 2 * r);
      const AuQuadrature quad = recommended_au_quadrature(dg, V.component_degree());
      // Column layout for the advection sparsity pattern: one slot per
      // diagonal block entry and per neighbour-pair block entry.
      const int npc = dg.ndof_cell();
      std::unordered_map<std::int64_t, int> col_of;
      auto key = [&](int i, int j) {
        return static_cast<std::int64_t>(i) * dg.dim() + j;
      };
      auto add_block = [&](int ta, int tb) {
        for (int a = 0; a < npc; ++a)
          for (int b = 0; b < npc; ++b)
            col_of.emplace(key(dg.global_index(ta, a), dg.global_index(tb, b)),
                           static_cast<int>(col_of.size()));
      };
      for (int t = 0; t < mesh.num_triangles(); ++t) add_block(t, t);
      for (const Edge& e : mesh.edges())
        if (!e.is_boundary()) {
          add_block(e.minus, e.plus);
          add_block(e.plus, e.minus);
        }
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(V.dim(), static_cast<int>(col_of.size()));
      for (int i = 0; i < V.dim(); ++i) {
        Eigen::VectorXd ei = Eigen::VectorXd::Zero(V.dim());
        ei[i] = 1.0;
        const SpMat A = assemble_advection(dg, HdivVelocity(V, ei), quad);
        for (int k = 0; k < A.outerSize(); ++k)
          for (SpMat::InnerIterator it(A, k); it; ++it)
            B(i, col_of.at(key(static_cast<int>(it.row()), static_cast<int>(it.col())))) =
                it.value();
      }
      const Eigen::MatrixXd G = B * B.transpose();
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
      const double emax = es.eigenvalues().maxCoeff();
      int rank = 0;
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > 1e-10 * emax) ++rank;
      std::ostringstream what;
      what << "rank " << rank << " != dim " << V.dim() << " (r=" << r << ", nx=" << nx << ")";
      c.require(rank == V.dim(), what.str());
    }
  }
}

// ---------------------------------------------------------------------------
// Span lemmas behind the kernel characterization
// ---------------------------------------------------------------------------

int numeric_rank(const Eigen::MatrixXd& M, double rel_tol) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * sv[0]) ++rank;
  return rank;
}

void check_span_products(CheckContext& c) {
  const Mesh mesh = single_triangle();
  for (int r = 1; r <= 2; ++r) {
    const DgSpace dgr(mesh, r);
    const DgSpace dg2(mesh, 2 * r);
    const int n = dgr.ndof_cell();
    Eigen::MatrixXd P(n * n, dg2.ndof_cell());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd ei = Eigen::VectorXd::Zero(n), ej = Eigen::VectorXd::Zero(n);
        ei[i] = 1.0;
        ej[j] = 1.0;
        const Eigen::VectorXd coeffs = dg2.project(
            [&](Vec2 p) {
              const Vec2 ref = mesh.map_to_reference(0, p);
              return dgr.eval(ei, 0, ref) * dgr.eval(ej, 0, ref);
            },
            4 * r);
        P.row(i * n + j) = coeffs.transpose();
      }
    const int expected = (2 * r + 1) * (2 * r + 2) / 2;
    const int rank = numeric_rank(P, 1e-10);
    std::ostringstream what;
    what << "product span rank " << rank << " != dim " << expected << " (r=" << r << ")";
    c.require(rank == expected, what.str());
  }
}

void check_span_gradients(CheckContext& c) {
  const Mesh mesh = single_triangle();
  for (int r = 1; r <= 2; ++r) {
    const DgSpace dgr(mesh, r);
    const DgSpace dglo(mesh, 2 * r - 1);
    const int n = dgr.ndof_cell();
    const int m = dglo.ndof_cell();
    Eigen::MatrixXd G(n * n, 2 * m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd ei = Eigen::VectorXd::Zero(n), ej = Eigen::VectorXd::Zero(n);
        ei[i] = 1.0;
        ej[j] = 1.0;
        auto field = [&](Vec2 p) {
          const Vec2 ref = mesh.map_to_reference(0, p);
          return dgr.eval(ei, 0, ref) * dgr.eval_gradient(ej, 0, ref);
        };
        const Eigen::VectorXd gx = dglo.project([&](Vec2 p) { return field(p).x; }, 4 * r);
        const Eigen::VectorXd gy = dglo.project([&](Vec2 p) { return field(p).y; }, 4 * r);
        G.row(i * n + j).head(m) = gx.transpose();
        G.row(i * n + j).tail(m) = gy.transpose();
        // Containment: the projection reproduces p grad q pointwise, so the
        // field really lies in the lower-degree space.
        for (const Vec2& ref : ref_samples()) {
          const Vec2 x = mesh.map_from_reference(0, ref);
          const Vec2 diff = field(x) - Vec2{dglo.eval(gx, 0, ref), dglo.eval(gy, 0, ref)};
          c.require_small(norm(diff), 1e-11, "containment in the lower-degree space");
        }
      }
    const int expected = 2 * r * (2 * r + 1);
    const int rank = numeric_rank(G, 1e-10);
    std::ostringstream what;
    what << "gradient span rank " << rank << " != dim " << expected << " (r=" << r << ")";
    c.require(rank == expected, what.str());
  }
}

// ---------------------------------------------------------------------------
// Trilinear forms
// ---------------------------------------------------------------------------

void check_ah_antisymmetry(CheckContext& c) {
  const Mesh meshes[] = {square_mesh(2), skewed_patch()};
  for (const Mesh& mesh : meshes) {
    for (int r = 0; r <= 1; ++r) {
      const DgSpace dg(mesh, r);
      const HdivSpace V(mesh, HdivFamily::RT, r);
      const AhQuadrature quad = recommended_ah_quadrature(dg, V);
      const Eigen::VectorXd uc = random_coeffs(V.dim(), 79u + static_cast<unsigned>(r));
      const Eigen::VectorXd vc = random_coeffs(V.dim(), 83u + static_cast<unsigned>(r));
      DgVec2 w(dg.dim());
      w.x = random_coeffs(dg.dim(), 89u);
      w.y = random_coeffs(dg.dim(), 97u);
      const double auv = a_h_value(dg, w, V, uc, vc, quad);
      const double avu = a_h_value(dg, w, V, vc, uc, quad);
      const double scale = 1.0 + std::abs(auv);
      c.require_small(auv + avu, 1e-12 * scale, "a(w,u,v) = -a(w,v,u)");
      c.require_small(a_h_value(dg, w, V, uc, uc, quad), 1e-12 * scale, "a(w,u,u) = 0");
      const Eigen::MatrixXd Am = Eigen::MatrixXd(a_h_matrix(dg, w, V, quad));
      c.require_small(max_abs(Eigen::MatrixXd(Am + Am.transpose())), 1e-13 * (1.0 + max_abs(Am)),
                      "matrix skewness");
      // Matrix entries agree with the scalar form.
      for (int i : {0, V.dim() / 2, V.dim() - 1})
        for (int j : {1, V.dim() / 3}) {
          Eigen::VectorXd ei = Eigen::VectorXd::Zero(V.dim()), ej = Eigen::VectorXd::Zero(V.dim());
          ei[i] = 1.0;
          ej[j] = 1.0;
          c.require_small(Am(i, j) - a_h_value(dg, w, V, ej, ei, quad),
                          1e-12 * (1.0 + max_abs(Am)), "matrix vs scalar entry");
        }
    }
  }
}

void check_ah_dual_route(CheckContext& c) {
  // Splits a_h into its volume and edge parts by independent quadrature and
  // cross-checks both against the commutator pairing <w, hat([A_u,A_v])>.
  // For piecewise-P_r normal-continuous fields the pairing carries the same
  // edge term but the opposite volume sign, so the two routes combine as
  //   a_h - pairing = 2 VOL   and   a_h + pairing = 2 EDGE.
  const Mesh mesh = square_mesh(2);
  for (int r = 1; r <= 2; ++r) {
    const DgSpace dg(mesh, r);
    const DgVec2 coords = coordinate_field(dg, r + 2);
    const HdivSpace V(mesh, HdivFamily::BDM, r);
    const Eigen::VectorXd uc = random_coeffs(V.dim(), 101u + static_cast<unsigned>(r));
    const Eigen::VectorXd vc = random_coeffs(V.dim(), 103u + static_cast<unsigned>(r));
    DgVec2 w(dg.dim());
    w.x = random_coeffs(dg.dim(), 107u);
    w.y = random_coeffs(dg.dim(), 109u);
    const AuQuadrature aq = recommended_au_quadrature(dg, V.component_degree());
    const SpMat Au = assemble_advection(dg, HdivVelocity(V, uc), aq);
    const SpMat Av = assemble_advection(dg, HdivVelocity(V, vc), aq);
    const DgVec2 hatC = hat_map(commutator(Au, Av), coords);
    const double pairing = w.x.dot(hatC.x) + w.y.dot(hatC.y);
    const double ah = a_h_value(dg, w, V, uc, vc, recommended_ah_quadrature(dg, V));

    double vol = 0.0;
    const QuadRule rule = triangle_rule(3 * r);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const double jac = 2.0 * mesh.area(t);
      for (int q = 0; q < rule.size(); ++q) {
        const Vec2 x = mesh.map_from_reference(t, rule.points[q]);
        const Vec2 uu = V.eval(uc, t, x);
        const Vec2 vv = V.eval(vc, t, x);
        const Vec2 ww = dgvec_at(dg, w, t, x);
        const Vec2 adv = V.eval_gradient(uc, t, x).apply(vv) - V.eval_gradient(vc, t, x).apply(uu);
        vol += jac * rule.weights[q] * dot(ww, adv);  // w . ((v.grad)u - (u.grad)v)
      }
    }
    double edge = 0.0;
    for (const Edge& e : mesh.edges()) {
      if (e.is_boundary()) continue;
      const EdgeSample s = sample_edge(mesh, e, 3 * r + 1);
      for (std::size_t q = 0; q < s.points.size(); ++q) {
        const Vec2& x = s.points[q];
        const Vec2 um = V.eval(uc, e.minus, x), up = V.eval(uc, e.plus, x);
        const Vec2 vm = V.eval(vc, e.minus, x), vp = V.eval(vc, e.plus, x);
        const double un = 0.5 * dot(um + up, e.normal);
        const double vn = 0.5 * dot(vm + vp, e.normal);
        const Vec2 wavg = 0.5 * (dgvec_at(dg, w, e.minus, x) + dgvec_at(dg, w, e.plus, x));
        edge += s.weights[q] * dot(vn * (um - up) - un * (vm - vp), wavg);
      }
    }
    const double scale = 1.0 + std::abs(vol) + std::abs(edge);
    c.require_small(ah - (vol + edge), 1e-10 * scale, "a_h = VOL + EDGE (r=" + std::to_string(r) + ")");
    c.require_small(ah - pairing - 2.0 * vol, 1e-10 * scale,
                    "a_h - pairing = 2 VOL (r=" + std::to_string(r) + ")");
    c.require_small(ah + pairing - 2.0 * edge, 1e-10 * scale,
                    "a_h + pairing = 2 EDGE (r=" + std::to_string(r) + ")");
  }
}

void check_bh_consistency(CheckContext& c) {
  const Mesh mesh = square_mesh(3);
  for (int r = 0; r <= 2; ++r) {
    const DgSpace dg(mesh, r);
    const HdivSpace V(mesh, HdivFamily::RT, 1);
    const Eigen::VectorXd wc = random_coeffs(V.dim(), 113u + static_cast<unsigned>(r));
    const HdivVelocity w(V, wc);
    const AuQuadrature quad = recommended_au_quadrature(dg, V.component_degree());
    const Eigen::VectorXd f = random_coeffs(dg.dim(), 127u);
    const Eigen::VectorXd g = random_coeffs(dg.dim(), 131u);
    const SpMat A = assemble_advection(dg, w, quad);
    const double scale = 1.0 + max_abs(A) * f.norm() * g.norm();
    c.require_small(b_h_value(dg, w, f, g, quad) - g.dot(A * f), 1e-12 * scale,
                    "b_h = <A_w f, g> (r=" + std::to_string(r) + ")");
    const Eigen::VectorXd L = b_h_velocity_vector(dg, V, f, g, quad);
    for (int i : {0, V.dim() / 2, V.dim() - 1}) {
      Eigen::VectorXd ei = Eigen::VectorXd::Zero(V.dim());
      ei[i] = 1.0;
      c.require_small(L[i] - b_h_value(dg, HdivVelocity(V, ei), f, g, quad), 1e-12 * scale,
                      "load vector entry " + std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------------------
// Discrete derivatives of the internal energy
// ---------------------------------------------------------------------------

void check_discrete_gradient(CheckContext& c) {
  const EquationOfState sw = EquationOfState::shallow_water();
  c.require_near(sw.discrete_dD(2.0, 2.0, 0.0), 2.0, 1e-14, "limit value at x=y=2");
  c.require_near(sw.discrete_dD(1.0, 3.0, 0.0), 2.0, 1e-14, "secant value at (1,3)");
  std::mt19937 gen(137u);
  std::uniform_real_distribution<double> dist(0.2, 3.0);
  for (int k = 0; k < 40; ++k) {
    const double x = dist(gen), y = dist(gen);
    const double f = sw.discrete_dD(x, y, 0.0);
    c.require_small(f * (y - x) - (sw.U(y, 0.0) - sw.U(x, 0.0)), 1e-13, "chain identity");
  }
  // Near-coincident arguments switch to the analytic midpoint derivative.
  c.require_small(sw.discrete_dD(1.0, 1.0 + 1e-13, 0.0) - sw.dU_dD(1.0, 0.0), 1e-9,
                  "removable singularity");

  const EquationOfState pg = EquationOfState::perfect_gas(5.0 / 3.0, 1.0, 1.0);
  c.require_near(pg.discrete_dD(1.0, 2.0, 0.0), std::pow(2.0, 5.0 / 3.0) - 1.0, 1e-13,
                 "perfect-gas secant");
  c.require_near(pg.discrete_dD(1.4, 1.4, 0.2), pg.dU_dD(1.4, 0.2), 1e-13, "coincident density");
  c.require_near(pg.discrete_dS(0.3, 0.3, 1.4), pg.dU_dS(1.4, 0.3), 1e-13, "coincident entropy");
  for (int k = 0; k < 40; ++k) {
    const double D0 = dist(gen), D1 = dist(gen);
    const double S0 = dist(gen) - 1.5, S1 = dist(gen) - 1.5;
    // Telescoping reconstruction of the energy difference from the averaged
    // partial discrete derivatives.
    const double fpair = 0.5 * (pg.discrete_dD(D0, D1, S0) + pg.discrete_dD(D0, D1, S1));
    const double gpair = 0.5 * (pg.discrete_dS(S0, S1, D0) + pg.discrete_dS(S0, S1, D1));
    const double lhs = fpair * (D1 - D0) + gpair * (S1 - S0);
    const double rhs = pg.U(D1, S1) - pg.U(D0, S0);
    c.require_small(lhs - rhs, 1e-12 * (1.0 + std::abs(rhs)), "telescoping identity");
  }
  c.require(throws_exception([&] { (void)pg.discrete_dD(-1.0, 2.0, 0.0); }),
            "nonpositive density rejected (dD)");
  c.require(throws_exception([&] { (void)pg.discrete_dS(0.1, 0.2, -1.0); }),
            "nonpositive density rejected (dS)");
}

// ---------------------------------------------------------------------------
// Time stepping
// ---------------------------------------------------------------------------

void check_steady_state(CheckContext& c) {
  const Mesh mesh = square_mesh(4);
  const DgSpace dg(mesh, 0);
  const HdivSpace V(mesh, HdivFamily::RT, 0);
  const EquationOfState eos = EquationOfState::shallow_water();
  const FlowSolver solver(dg, V, eos, [](Vec2 p) { return Vec2{-p.y, p.x}; });
  const State s0 = solver.initial_state([](Vec2) { return Vec2{0.0, 0.0}; },
                                        [](Vec2) { return 2.0; });
  StepperOptions opt;
  const State s = advance(solver, s0, 0.01, 10, opt);
  c.require_small(s.u.lpNorm<Eigen::Infinity>(), 1e-11, "velocity stays zero");
  c.require_small((s.rho - s0.rho).lpNorm<Eigen::Infinity>(), 1e-11, "density stays constant");
  c.require_small(solver.energy(s) / solver.energy(s0) - 1.0, 1e-11, "energy drift");
}

void check_conservation_barotropic(CheckContext& c) {
  RunConfig cfg = default_config(Scenario::RotatingShallowWater);
  cfg.nx = cfg.ny = 4;
  Simulation sim = Simulation::create(cfg);
  const StepperOptions opt = sim.stepper_options();
  const double E0 = sim.solver->energy(sim.state);
  const double m0 = sim.solver->mass(sim.state);
  const int nsteps = 50;
  double max_drift = 0.0, max_mass = 0.0;
  State s = sim.state;
  for (int k = 1; k <= nsteps; ++k) {
    s = advance(*sim.solver, s, cfg.dt, 1, opt);
    max_drift = std::max(max_drift, std::abs(sim.solver->energy(s) / E0 - 1.0));
    max_mass = std::max(max_mass, std::abs(sim.solver->mass(s) / m0 - 1.0));
  }
  c.require_small(max_drift, 10.0 * 1e-12 * nsteps, "relative energy drift");
  c.require_small(max_mass, 1e-12, "relative mass drift");
}

void check_conservation_baroclinic(CheckContext& c) {
  RunConfig cfg = default_config(Scenario::RayleighTaylor);
  cfg.nx = 4;
  cfg.ny = 16;
  Simulation sim = Simulation::create(cfg);
  const StepperOptions opt = sim.stepper_options();
  const double E0 = sim.solver->energy(sim.state);
  const double m0 = sim.solver->mass(sim.state);
  const double s0 = sim.solver->entropy(sim.state);
  const int nsteps = 20;
  State s = sim.state;
  double max_e = 0.0, max_m = 0.0, max_s = 0.0;
  for (int k = 1; k <= nsteps; ++k) {
    s = advance(*sim.solver, s, cfg.dt, 1, opt);
    max_e = std::max(max_e, std::abs(sim.solver->energy(s) / E0 - 1.0));
    max_m = std::max(max_m, std::abs(sim.solver->mass(s) / m0 - 1.0));
    max_s = std::max(max_s, std::abs(sim.solver->entropy(s) / s0 - 1.0));
  }
  c.require_small(max_e, 10.0 * 1e-12 * nsteps, "relative energy drift");
  c.require_small(max_m, 5e-12, "relative mass drift");
  c.require_small(max_s, 5e-12, "relative entropy drift");
}

void check_time_reversal(CheckContext& c) {
  RunConfig cfg = default_config(Scenario::RotatingShallowWater);
  cfg.nx = cfg.ny = 4;
  Simulation sim = Simulation::create(cfg);
  const StepperOptions opt = sim.stepper_options();
  const State fwd = advance(*sim.solver, sim.state, 0.01, 5, opt);
  const State back = advance(*sim.solver, fwd, -0.01, 5, opt);
  const double su = 1.0 + sim.state.u.lpNorm<Eigen::Infinity>();
  const double sr = 1.0 + sim.state.rho.lpNorm<Eigen::Infinity>();
  c.require_small((back.u - sim.state.u).lpNorm<Eigen::Infinity>(), 1e-9 * su, "velocity restored");
  c.require_small((back.rho - sim.state.rho).lpNorm<Eigen::Infinity>(), 1e-9 * sr,
                  "density restored");
}

void check_scheme_residuals(CheckContext& c) {
  RunConfig cfg = default_config(Scenario::RotatingShallowWater);
  cfg.nx = cfg.ny = 4;
  cfg.dg_degree = 1;
  Simulation sim = Simulation::create(cfg);
  const StepperOptions opt = sim.stepper_options();
  const State s1 = advance(*sim.solver, sim.state, cfg.dt, 1, opt);
  Eigen::VectorXd mom, den, ent;
  sim.solver->scheme_residuals(sim.state, s1, cfg.dt, mom, den, ent);
  const double scale = 1.0 + s1.u.norm() + s1.rho.norm();
  c.require_small(mom.lpNorm<Eigen::Infinity>(), 1e-9 * scale, "momentum residual");
  c.require_small(den.lpNorm<Eigen::Infinity>(), 1e-9 * scale, "density residual");
}

void check_newton_fallback(CheckContext& c) {
  RunConfig cfg = default_config(Scenario::RotatingShallowWater);
  cfg.nx = cfg.ny = 3;
  Simulation sim = Simulation::create(cfg);
  StepperOptions picard = sim.stepper_options();
  StepperOptions newton = picard;
  newton.picard_first = false;  // pure Newton path
  StepStats st_p, st_n;
  const State sp = sim.solver->step(sim.state, cfg.dt, picard, &st_p);
  const State sn = sim.solver->step(sim.state, cfg.dt, newton, &st_n);
  c.require(st_p.converged, "picard converged");
  c.require(st_n.converged && st_n.used_newton, "newton converged");
  c.require_small((sp.u - sn.u).lpNorm<Eigen::Infinity>(), 1e-9 * (1.0 + sp.u.norm()),
                  "methods agree on velocity");
  c.require_small((sp.rho - sn.rho).lpNorm<Eigen::Infinity>(), 1e-9 * (1.0 + sp.rho.norm()),
                  "methods agree on density");
}

// ---------------------------------------------------------------------------
// Lagrangian difference identity (discrete-gradient structure of the scheme)
// ---------------------------------------------------------------------------

void check_lagrangian_difference(CheckContext& c) {
  for (int r = 0; r <= 1; ++r) {
    const Mesh mesh = square_mesh(3);
    const DgSpace dg(mesh, r);
    const HdivSpace V(mesh, HdivFamily::RT, r);
    const EquationOfState eos = EquationOfState::shallow_water();
    auto rot = [](Vec2 p) { return Vec2{-p.y, p.x}; };
    auto pot = [](Vec2 p) { return 0.25 * p.y; };
    const FlowSolver solver(dg, V, eos, rot, pot);
    const State s0 = solver.initial_state(
        [](Vec2 p) {
          const double pi = 3.14159265358979323846;
          const double a = 0.2 * pi;
          return Vec2{a * std::sin(pi * p.x) * std::cos(pi * p.y),
                      -a * std::cos(pi * p.x) * std::sin(pi * p.y)};
        },
        [](Vec2 p) {
          const double pi = 3.14159265358979323846;
          return 2.0 + 0.3 * std::cos(0.5 * pi * p.x) * std::cos(0.5 * pi * p.y);
        });
    StepperOptions opt;
    const State s1 = advance(solver, s0, 0.01, 1, opt);

    const int qd = solver.physics_quad_degree();
    const DgVec2 coords = coordinate_field(dg, qd);
    const AuQuadrature aq = solver.advection_quadrature();
    const DgVec2 hat0 = hat_map(assemble_advection(dg, HdivVelocity(V, s0.u), aq), coords);
    const DgVec2 hat1 = hat_map(assemble_advection(dg, HdivVelocity(V, s1.u), aq), coords);

    auto lagrangian = [&](const State& s, const DgVec2& hat) {
      return integrate_elementwise(
          mesh,
          [&](int t, Vec2 x) {
            const double D = dg_at(dg, s.rho, t, x);
            const Vec2 A = dgvec_at(dg, hat, t, x);
            return 0.5 * D * dot(A, A) + D * dot(A, rot(x)) - eos.U(D, 0.0) - D * pot(x);
          },
          qd);
    };
    const double diff = lagrangian(s1, hat1) - lagrangian(s0, hat0);

    // Discrete-gradient decomposition of the difference: a momentum pairing
    // against the hat increment plus the density discrete derivative against
    // the density increment, all under the shared physics rule.
    const double term1 = integrate_elementwise(
        mesh,
        [&](int t, Vec2 x) {
          const double D0 = dg_at(dg, s0.rho, t, x), D1 = dg_at(dg, s1.rho, t, x);
          const Vec2 A0 = dgvec_at(dg, hat0, t, x), A1 = dgvec_at(dg, hat1, t, x);
          const Vec2 R = rot(x);
          return 0.5 * dot(D0 * (A0 + R) + D1 * (A1 + R), A1 - A0);
        },
        qd);
    const double term2 = integrate_elementwise(
        mesh,
        [&](int t, Vec2 x) {
          const double D0 = dg_at(dg, s0.rho, t, x), D1 = dg_at(dg, s1.rho, t, x);
          const Vec2 A0 = dgvec_at(dg, hat0, t, x), A1 = dgvec_at(dg, hat1, t, x);
          const Vec2 R = rot(x);
          const double F = 0.5 * dot(A0, A1) + 0.5 * dot(A0 + A1, R) -
                           eos.discrete_dD(D0, D1, 0.0) - pot(x);
          return F * (D1 - D0);
        },
        qd);
    const double scale = 1.0 + std::abs(lagrangian(s0, hat0)) + std::abs(lagrangian(s1, hat1));
    c.require_small(diff - term1 - term2, 1e-10 * scale,
                    "difference identity (r=" + std::to_string(r) + ")");
  }
}

// ---------------------------------------------------------------------------
// Operator-variable (Cayley) integrator
// ---------------------------------------------------------------------------

void check_cayley_tau(CheckContext& c) {
  const Mesh mesh = square_mesh(3);
  const DgSpace dg(mesh, 1);
  const HdivSpace V(mesh, HdivFamily::RT, 0);
  const CayleyIntegrator integ(dg, V, EquationOfState::shallow_water());
  const Eigen::VectorXd uc = random_coeffs(V.dim(), 139u);
  const SpMat A = integ.operator_of(uc);
  const SpMat nA = -A;
  const Eigen::VectorXd x = random_coeffs(dg.dim(), 149u);
  const Eigen::VectorXd y = integ.apply_tau(nA, integ.apply_tau(A, x));
  c.require_small((y - x).lpNorm<Eigen::Infinity>(), 1e-11 * (1.0 + x.norm()),
                  "tau(A) tau(-A) = I");
  const Eigen::VectorXd yt =
      integ.apply_tau_transpose(nA, integ.apply_tau_transpose(A, x));
  c.require_small((yt - x).lpNorm<Eigen::Infinity>(), 1e-11 * (1.0 + x.norm()),
                  "tau(A)^T tau(-A)^T = I");
  // Constants are fixed points (A annihilates them).
  const Eigen::VectorXd ones = dg.project([](Vec2) { return 1.0; }, 2);
  c.require_small((integ.apply_tau(A, ones) - ones).lpNorm<Eigen::Infinity>(),
                  1e-11 * (1.0 + ones.norm()), "tau fixes constants");
}

void check_cayley_richardson(CheckContext& c) {
  // One step agrees with the semidiscrete right-hand side to O(dt^2) after
  // Richardson extrapolation: the difference quotients q(dt) = (state(dt) -
  // state(0))/dt expand as F + C dt + O(dt^2), so their increments contract by
  // two per halving, and the extrapolated values 2 q(dt/2) - q(dt) converge to
  // F with increments contracting by four.
  const Mesh mesh = square_mesh(4);
  const DgSpace dg(mesh, 1);  // 96 DG dofs, within the dense-operator budget
  const HdivSpace V(mesh, HdivFamily::RT, 0);
  const CayleyIntegrator integ(dg, V, EquationOfState::shallow_water());
  const double pi = 3.14159265358979323846;
  const CayleyState s0 = integ.initial_state(
      [pi](Vec2 p) {
        const double a = 0.2 * pi;
        return Vec2{a * std::sin(pi * p.x) * std::cos(pi * p.y),
                    -a * std::cos(pi * p.x) * std::sin(pi * p.y)};
      },
      [pi](Vec2 p) { return 2.0 + 0.3 * std::cos(0.5 * pi * p.x) * std::cos(0.5 * pi * p.y); });
  CayleyOptions opt;
  opt.tol = 1e-13;
  opt.max_picard = 500;
  auto quotient = [&](double dt) {
    const CayleyState s = integ.step(s0, dt, opt);
    Eigen::VectorXd q(s.u.size() + s.D.size());
    q << (s.u - s0.u) / dt, (s.D - s0.D) / dt;
    return q;
  };
  const double dt = 0.02;
  const Eigen::VectorXd q1 = quotient(dt), q2 = quotient(0.5 * dt), q3 = quotient(0.25 * dt),
                        q4 = quotient(0.125 * dt);
  const double e1 = (q1 - q2).norm();
  const double e2 = (q2 - q3).norm();
  const double e3 = (q3 - q4).norm();
  c.require(e1 > 0.0 && e2 > 0.0 && e3 > 0.0, "nondegenerate Richardson increments");
  if (e1 > 0.0 && e2 > 0.0) {
    const double consistency = std::log2(e1 / e2);
    std::ostringstream what;
    what << "quotient increment order " << consistency << " outside [0.8, 1.2]";
    c.require(consistency > 0.8 && consistency < 1.2, what.str());
  }
  const Eigen::VectorXd S1 = 2.0 * q2 - q1, S2 = 2.0 * q3 - q2, S3 = 2.0 * q4 - q3;
  const double r1 = (S1 - S2).norm();
  const double r2 = (S2 - S3).norm();
  if (r1 > 0.0 && r2 > 0.0) {
    const double order = std::log2(r1 / r2);
    std::ostringstream what;
    what << "extrapolated order " << order << " outside [1.6, 2.4]";
    c.require(order > 1.6 && order < 2.4, what.str());
  }
  // Energy is not conserved exactly by this stepper (that is the province of
  // the discrete-gradient scheme); its error stays bounded and first order in
  // dt over a fixed window.
  auto drift = [&](double step, int n) {
    const double E0 = integ.energy(s0);
    CayleyState s = s0;
    double mx = 0.0;
    for (int k = 0; k < n; ++k) {
      s = integ.step(s, step, opt);
      mx = std::max(mx, std::abs(integ.energy(s) / E0 - 1.0));
    }
    return mx;
  };
  const double d1 = drift(0.01, 5), d2 = drift(0.005, 10);
  c.require_small(d1, 2e-4, "energy drift over a fixed window");
  c.require(d1 > 1.5 * d2, "energy drift shrinks when the step is halved");
}

// ---------------------------------------------------------------------------
// Scenario and harness layers
// ---------------------------------------------------------------------------

void check_scenario_fields(CheckContext& c) {
  {
    const RunConfig cfg = default_config(Scenario::RotatingShallowWater);
    const ScenarioFields f = make_scenario(cfg);
    const double pi = 3.14159265358979323846;
    std::mt19937 gen(151u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      const Vec2 p{dist(gen), dist(gen)};
      c.require_small(f.rho0(p) - (2.0 + std::sin(0.5 * pi * p.x) * std::sin(0.5 * pi * p.y)),
                      1e-14, "initial density");
      c.require_small(norm(f.u0(p)), 0.0, "initial velocity is zero");
      c.require_small(norm(f.rotation(p) - Vec2{-p.y, p.x}), 1e-14, "rotation field");
    }
    c.require(!f.s0, "no entropy field for shallow water");
    c.require(f.eos.kind == EquationOfState::Kind::ShallowWater, "equation of state");
  }
  {
    const RunConfig cfg = default_config(Scenario::RayleighTaylor);
    const ScenarioFields f = make_scenario(cfg);
    const double gamma = 5.0 / 3.0;
    std::mt19937 gen(157u);
    std::uniform_real_distribution<double> dx(0.0, 0.25), dy(0.05, 0.95);
    for (int k = 0; k < 20; ++k) {
      const Vec2 p{dx(gen), dy(gen)};
      const double rho = 1.5 - 0.5 * std::tanh((p.y - 0.5) / 0.02);
      const double pres =
          1.5 * p.y + 1.25 + (0.25 - 0.5 * p.y) * std::tanh((p.y - 0.5) / 0.02);
      c.require_small(f.rho0(p) - rho, 1e-13, "interface density");
      const Vec2 u = f.u0(p);
      const double expected_uy = -0.025 * std::sqrt(gamma * pres / rho) *
                                 std::cos(8.0 * 3.14159265358979323846 * p.x) *
                                 std::exp(-(p.y - 0.5) * (p.y - 0.5) / 0.09);
      c.require_small(u.x, 0.0, "horizontal velocity is zero");
      c.require_small(u.y - expected_uy, 1e-13, "vertical velocity profile");
      c.require(static_cast<bool>(f.s0), "entropy field present");
      if (f.s0) {
        // The entropy must reproduce the prescribed hydrostatic pressure.
        c.require_small(f.eos.pressure(rho, f.s0(p)) / pres - 1.0, 1e-12, "pressure roundtrip");
      }
      c.require(static_cast<bool>(f.potential), "gravity potential present");
      if (f.potential) c.require_small(f.potential(p) - (-p.y), 1e-14, "potential = -y");
    }
  }
}

void check_config_roundtrip(CheckContext& c) {
  for (Scenario sc :
       {Scenario::RotatingShallowWater, Scenario::RayleighTaylor, Scenario::Custom}) {
    RunConfig cfg = default_config(sc);
    cfg.nx = 12;
    cfg.velocity_bdm = (sc == Scenario::Custom);
    cfg.velocity_order = cfg.velocity_bdm ? 1 : 0;
    cfg.study_dt = {0.1, 0.05};
    cfg.reference_dt = 0.025;
    const std::string text = cfg.save();
    const RunConfig back = RunConfig::parse(text);
    c.require(back.save() == text, "save/parse/save fixed point");
    c.require(back.nx == cfg.nx && back.scenario == cfg.scenario, "fields preserved");
    c.require(back.study_dt == cfg.study_dt, "lists preserved");
  }
  c.require(throws_exception([] { (void)RunConfig::parse("[mesh]\nbogus_key = 1\n"); }),
            "unknown key rejected");
  c.require(throws_exception([] {
              RunConfig cfg = default_config(Scenario::RotatingShallowWater);
              cfg.dt = 0.0;
              cfg.validate();
            }),
            "dt = 0 rejected");
  c.require(throws_exception([] {
              RunConfig cfg = default_config(Scenario::RotatingShallowWater);
              cfg.velocity_bdm = true;
              cfg.velocity_order = 0;
              cfg.validate();
            }),
            "BDM order 0 rejected");
}

void check_mesh_validity(CheckContext& c) {
  {
    std::istringstream in("4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n");
    const Mesh mesh = Mesh::from_text(in);
    c.require(mesh.num_vertices() == 4 && mesh.num_triangles() == 2, "text mesh counts");
    c.require(mesh.num_edges() == 5 && mesh.num_interior_edges() == 1, "text mesh edges");
    c.require_small(mesh.stats().total_area - 1.0, 1e-14, "text mesh area");
  }
  c.require(throws_exception([] {
              std::istringstream in("4 3\n0 0\n1 0\n0 1\n0 -1\n0 1 2\n0 3 1\n0 1 3\n");
              (void)Mesh::from_text(in);
            }),
            "non-manifold edge rejected");
  c.require(throws_exception([] {
              std::vector<Vec2> vs = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
              std::vector<Tri> ts(1);
              ts[0].v = {0, 1, 2};
              (void)Mesh::from_arrays(std::move(vs), std::move(ts));
            }),
            "degenerate triangle rejected");
  c.require(throws_exception([] { (void)Mesh::uniform_rectangle(0, 0, 1, 1, 0, 3); }),
            "nonpositive count rejected");
  c.require(throws_exception([] { (void)Mesh::uniform_rectangle(0, 0, 0, 1, 2, 2); }),
            "degenerate rectangle rejected");
  const MeshStats st = Mesh::equilateral_patch(3, 2).stats();
  c.require_small(st.shape_regularity - 2.0 * std::sqrt(3.0), 1e-9, "equilateral regularity");
  c.require_small(st.quasi_uniformity - 1.0, 1e-12, "equilateral uniformity");
  const Mesh mesh = square_mesh(2);
  const auto hit = mesh.locate(Vec2{0.3, -0.4});
  c.require(hit.has_value(), "interior point located");
  c.require(!mesh.locate(Vec2{3.0, 0.0}).has_value(), "exterior point rejected");
}

void check_determinism(CheckContext& c) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path();
  const fs::path dira = base / "varflow-verify-det-a";
  const fs::path dirb = base / "varflow-verify-det-b";
  auto one_run = [&](const fs::path& dir) {
    fs::remove_all(dir);
    RunConfig cfg = default_config(Scenario::RotatingShallowWater);
    cfg.nx = cfg.ny = 3;
    cfg.t_final = 3 * cfg.dt;
    cfg.output_dir = dir.string();
    (void)run_simulation(cfg);
    std::ifstream in(dir / "energy.csv", std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const std::string a = one_run(dira);
  const std::string b = one_run(dirb);
  c.require(!a.empty(), "energy series written");
  c.require(a == b, "identical runs produce identical bytes");
  fs::remove_all(dira);
  fs::remove_all(dirb);
}

void check_solvability_guard(CheckContext& c) {
  RunConfig cfg = default_config(Scenario::RotatingShallowWater);
  cfg.nx = cfg.ny = 3;
  Simulation sim = Simulation::create(cfg);
  StepStats st;
  (void)advance(*sim.solver, sim.state, cfg.dt, 1, sim.stepper_options(), &st);
  c.require(std::isfinite(st.lhs_diag_ratio) && st.lhs_diag_ratio >= 1.0,
            "velocity-block conditioning reported");
  c.require(st.lhs_diag_ratio < 1e8, "velocity block well conditioned");
  c.require(st.min_density > 0.0, "density positive at quadrature points");
  // Positivity loss is diagnosed, not silently accepted.
  State bad = sim.state;
  bad.rho.setZero();
  bad.rho[0] = -1.0;
  c.require(sim.solver->min_density(bad) < 0.0, "negative density detected");
  c.require(throws_exception([&] { (void)sim.solver->energy(bad); }),
            "energy reports nonpositive density");
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

std::vector<CheckDef> make_checks() {
  return {
      {"quadrature-exactness", check_quadrature_exactness},
      {"quadrature-fault-injection", check_quadrature_fault_injection},
      {"dg-orthonormality", check_dg_orthonormality},
      {"hdiv-interpolation", check_hdiv_interpolation},
      {"hdiv-conformity", check_hdiv_conformity},
      {"advection-constants", check_advection_constants},
      {"transport-adjoint", check_transport_adjoint},
      {"skew-divergence", check_skew_divergence},
      {"r0-stencil", check_r0_stencil},
      {"hat-projection", check_hat_projection},
      {"hat-equilateral", check_hat_equilateral},
      {"bracket-cell-edge", check_bracket_cell_edge},
      {"bracket-piecewise", check_bracket_piecewise},
      {"bracket-triple", check_bracket_triple},
      {"kernel-interpolation", check_kernel_interpolation},
      {"rank-isomorphism", check_rank_isomorphism},
      {"span-products", check_span_products},
      {"span-gradients", check_span_gradients},
      {"ah-antisymmetry", check_ah_antisymmetry},
      {"ah-dual-route", check_ah_dual_route},
      {"bh-consistency", check_bh_consistency},
      {"discrete-gradient", check_discrete_gradient},
      {"steady-state", check_steady_state},
      {"conservation-barotropic", check_conservation_barotropic},
      {"conservation-baroclinic", check_conservation_baroclinic},
      {"time-reversal", check_time_reversal},
      {"scheme-residuals", check_scheme_residuals},
      {"newton-fallback", check_newton_fallback},
      {"lagrangian-difference", check_lagrangian_difference},
      {"cayley-tau", check_cayley_tau},
      {"cayley-richardson", check_cayley_richardson},
      {"scenario-fields", check_scenario_fields},
      {"config-roundtrip", check_config_roundtrip},
      {"mesh-validity", check_mesh_validity},
      {"determinism", check_determinism},
      {"solvability-guard", check_solvability_guard},
  };
}

}  // namespace

std::vector<std::string> verify_check_names() {
  std::vector<std::string> names;
  for (const CheckDef& def : make_checks()) names.push_back(def.name);
  return names;
}

int run_verify(const std::string& filter, std::ostream& out) {
  int failures = 0;
  int ran = 0;
  for (const CheckDef& def : make_checks()) {
    if (!filter.empty() && def.name.find(filter) == std::string::npos) continue;
    ++ran;
    CheckContext ctx;
    try {
      def.fn(ctx);
    } catch (const std::exception& e) {
      ctx.fail(std::string("exception: ") + e.what());
    }
    if (ctx.ok) {
      out << "[ ok ] " << def.name << "\n";
    } else {
      ++failures;
      out << "[FAIL] " << def.name << ": " << ctx.notes.str() << "\n";
    }
    out.flush();
  }
  if (ran == 0) {
    out << "no checks match filter '" << filter << "'\n";
    return 1;
  }
  out << ran << " checks, " << failures << " failure" << (failures == 1 ? "" : "s") << "\n";
  return failures;
}

}  // namespace varflow
