#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "varflow/mesh.hpp"
#include "varflow/quadrature.hpp"

namespace varflow {

// ---------------------------------------------------------------------------
// Discontinuous Galerkin space V_h^r
// ---------------------------------------------------------------------------

/// Piecewise-polynomial space of degree r with a per-element L2-orthonormal
/// modal basis, so every mass matrix is the identity and projections need no
/// solve. The basis is built once on the reference triangle (Cholesky of the
/// exact monomial Gram matrix) and mapped affinely; on element K the physical
/// basis is phihat(F_K^{-1}(x)) / sqrt(2|K|).
class DgSpace {
 public:
  DgSpace(const Mesh& mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int ndof_cell() const { return npc_; }
  int dim() const { return npc_ * mesh_->num_triangles(); }
  int global_index(int t, int i) const { return t * npc_ + i; }

  /// Reference-basis values at reference points: (npts x npc).
  Eigen::MatrixXd ref_values(const std::vector<Vec2>& ref_pts) const;
  /// Reference-basis gradients; outputs are (npts x npc) each.
  void ref_gradients(const std::vector<Vec2>& ref_pts, Eigen::MatrixXd& dxi,
                     Eigen::MatrixXd& deta) const;

  /// Scale factor 1/sqrt(2|K|) turning reference values into physical ones.
  double value_scale(int t) const { return scale_[t]; }

  /// Value of a coefficient field on element t at a reference point.
  double eval(const Eigen::VectorXd& coeffs, int t, const Vec2& ref) const;
  /// Elementwise gradient of a coefficient field at a reference point.
  Vec2 eval_gradient(const Eigen::VectorXd& coeffs, int t, const Vec2& ref) const;

  /// L2 projection of a callable, integrating with the given rule degree.
  Eigen::VectorXd project(const std::function<double(Vec2)>& f, int quad_degree) const;

 private:
  const Mesh* mesh_;
  int degree_;
  int npc_;
  // Orthonormal reference basis: row i holds monomial coefficients of phihat_i.
  Eigen::MatrixXd basis_coef_;
  std::vector<std::array<int, 2>> monomials_;  // (a, b) exponents, degree <= r
  std::vector<double> scale_;                  // per element 1/sqrt(2|K|)
};

/// Vector-valued DG field in [V_h^r]^2, stored as two scalar coefficient
/// vectors. Used for projected momenta and hats of operators.
struct DgVec2 {
  Eigen::VectorXd x, y;

  DgVec2() = default;
  explicit DgVec2(int n) : x(Eigen::VectorXd::Zero(n)), y(Eigen::VectorXd::Zero(n)) {}
};

/// L2 projection of a vector callable, componentwise.
DgVec2 project_vec(const DgSpace& dg, const std::function<Vec2(Vec2)>& f, int quad_degree);

// ---------------------------------------------------------------------------
// H(div)-conforming spaces (Raviart-Thomas / Brezzi-Douglas-Marini)
// ---------------------------------------------------------------------------

enum class HdivFamily { RT, BDM };

/// H0(div) velocity space on a simplicial mesh: RT_k or BDM_k with the
/// boundary normal trace constrained to zero (boundary-edge DOFs are dropped
/// from the global numbering).
///
/// Degrees of freedom:
///   * per interior edge, k+1 moments of u.n against Legendre polynomials in
///     the edge's global parametrization (lower vertex id -> higher), with the
///     edge's stored normal; shared by both incident elements, which is what
///     enforces normal continuity;
///   * per element, interior moments (RT: against (P_{k-1})^2; BDM: a
///     deterministically selected independent subset of those).
///
/// Local bases are constructed directly in physical coordinates (barycenter-
/// centered, diameter-scaled monomials) by inverting the DOF Vandermonde, so
/// no Piola transform is needed at evaluation time.
class HdivSpace {
 public:
  HdivSpace(const Mesh& mesh, HdivFamily family, int order);

  const Mesh& mesh() const { return *mesh_; }
  HdivFamily family() const { return family_; }
  int order() const { return order_; }
  /// Largest polynomial degree of a component (k+1 for RT_k, k for BDM_k).
  int component_degree() const { return family_ == HdivFamily::RT ? order_ + 1 : order_; }

  int ndof_local() const { return nloc_; }
  int dim() const { return dim_; }
  /// Local -> global DOF map for element t; -1 marks a constrained
  /// (boundary-edge) DOF.
  const std::vector<int>& cell_dofs(int t) const { return cell_dofs_[t]; }

  /// Local basis values at physical points in element t: out[q*nloc + i].
  void basis_values(int t, const std::vector<Vec2>& phys, std::vector<Vec2>& out) const;
  /// Component gradients d(u_c)/d(x_d) of the local basis, same layout.
  void basis_gradients(int t, const std::vector<Vec2>& phys, std::vector<Mat2>& out) const;
  /// Divergences of the local basis, same layout.
  void basis_divergences(int t, const std::vector<Vec2>& phys, std::vector<double>& out) const;

  /// Field evaluation on element t at a physical point.
  Vec2 eval(const Eigen::VectorXd& coeffs, int t, const Vec2& phys) const;
  Mat2 eval_gradient(const Eigen::VectorXd& coeffs, int t, const Vec2& phys) const;
  double eval_divergence(const Eigen::VectorXd& coeffs, int t, const Vec2& phys) const;

  /// Canonical interpolation: computes the DOF functionals of u. The callable
  /// receives (element id, physical point); edge moments are evaluated through
  /// the minus element's trace, so FE fields can be interpolated elementwise.
  /// Fields whose exact boundary normal trace is nonzero get it constrained to
  /// zero (those DOFs do not exist in the space). Quadrature degrees should be
  /// at least edge: 2k+1, volume: 2k for exactness on space members.
  Eigen::VectorXd interpolate(const std::function<Vec2(int, Vec2)>& u, int edge_quad_degree,
                              int vol_quad_degree) const;
  /// Convenience overload for smooth callables u(x).
  Eigen::VectorXd interpolate(const std::function<Vec2(Vec2)>& u, int edge_quad_degree,
                              int vol_quad_degree) const;

  /// Residual moments of (u - Pi u): max over all DOF functionals applied to
  /// the difference. Diagnostic used by interpolation tests.
  double interpolation_moment_residual(const std::function<Vec2(int, Vec2)>& u,
                                       const Eigen::VectorXd& coeffs, int edge_quad_degree,
                                       int vol_quad_degree) const;

  /// Number of interior (non-edge) DOFs per element.
  int ndof_interior() const { return n_int_; }

  /// Global base index of an edge's DOF block; -1 for boundary edges. The
  /// j-th function of the block has normal trace (2j+1) P_j(s) on its edge
  /// (s the global edge parametrization) and zero on every other edge.
  int edge_dof_base(int edge_id) const { return edge_dof_base_[edge_id]; }

  /// True if this space is contained in [P_r]^2 elementwise (the condition
  /// under which the velocity space embeds in the degree-r DG space).
  bool contained_in_dg(int r) const { return component_degree() <= r; }

 private:
  struct InteriorFunctional {
    int mono = -1;  // index into interior monomial list (degree <= k-1)
    int comp = -1;  // component 0/1
  };

  // Raw polynomial fields spanning the local space in centered/scaled
  // coordinates xt = (x - barycenter)/h:
  //   fields 0..nk-1:        (m_i, 0), m_i monomials of degree <= k
  //   fields nk..2nk-1:      (0, m_i)
  //   RT only, 2nk..:        xt * q_j, q_j homogeneous of degree k
  Vec2 raw_value(int t, int field, const Vec2& phys) const;
  Mat2 raw_gradient(int t, int field, const Vec2& phys) const;
  double raw_divergence(int t, int field, const Vec2& phys) const;

  double edge_moment(const std::function<Vec2(int, Vec2)>& u, const Edge& e, int j,
                     const EdgeRule& rule) const;
  double interior_moment(const std::function<Vec2(int, Vec2)>& u, int t,
                         const InteriorFunctional& f, const QuadRule& rule,
                         const std::vector<Vec2>& phys) const;

  void build_element(int t);

  const Mesh* mesh_;
  HdivFamily family_;
  int order_;
  int nloc_ = 0;
  int nraw_ = 0;
  int n_int_ = 0;
  int dim_ = 0;

  std::vector<std::array<int, 2>> mono_k_;    // degree <= k
  std::vector<std::array<int, 2>> mono_km1_;  // degree <= k-1 (interior moments)
  std::vector<int> homog_k_;                  // indices into mono_k_ with degree == k

  std::vector<Eigen::MatrixXd> coef_;  // per element: (nloc x nraw), dual basis
  std::vector<std::vector<int>> cell_dofs_;
  std::vector<std::vector<InteriorFunctional>> interior_funcs_;  // per element
  std::vector<Vec2> center_;
  std::vector<double> hscale_;
  std::vector<int> edge_dof_base_;  // per edge: global base id or -1 (boundary)
  int elem_dof_base_ = 0;
};

/// Shifted Legendre polynomial P_j on [0,1], normalized so P_j(1) = 1.
double legendre01(int j, double s);

}  // namespace varflow
