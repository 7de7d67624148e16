#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "varflow/spaces.hpp"

namespace varflow {

using SpMat = Eigen::SparseMatrix<double>;

// ---------------------------------------------------------------------------
// Velocity fields
// ---------------------------------------------------------------------------

/// Elementwise-evaluable velocity used by the advection assembly. `value` is
/// the trace from a given element; `edge_value` is the value used on a shared
/// edge (only its normal component ever enters an integral, and for
/// normal-continuous fields the default minus-element trace is exact).
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual Vec2 value(int t, const Vec2& phys) const = 0;
  virtual Vec2 edge_value(const Edge& e, const Vec2& phys) const { return value(e.minus, phys); }
};

/// Smooth velocity given by a callable.
class AnalyticVelocity final : public VelocityField {
 public:
  explicit AnalyticVelocity(std::function<Vec2(Vec2)> f) : f_(std::move(f)) {}
  Vec2 value(int, const Vec2& phys) const override { return f_(phys); }

 private:
  std::function<Vec2(Vec2)> f_;
};

/// H(div) finite element field (non-owning views of space and coefficients).
class HdivVelocity final : public VelocityField {
 public:
  HdivVelocity(const HdivSpace& space, const Eigen::VectorXd& coeffs)
      : space_(&space), coeffs_(&coeffs) {}
  Vec2 value(int t, const Vec2& phys) const override { return space_->eval(*coeffs_, t, phys); }

 private:
  const HdivSpace* space_;
  const Eigen::VectorXd* coeffs_;
};

/// Vector DG field viewed as a velocity; edge values are two-sided averages
/// since the normal component of a DG field may jump.
class DgVelocity final : public VelocityField {
 public:
  DgVelocity(const DgSpace& space, const DgVec2& coeffs) : space_(&space), coeffs_(&coeffs) {}
  Vec2 value(int t, const Vec2& phys) const override;
  Vec2 edge_value(const Edge& e, const Vec2& phys) const override;

 private:
  const DgSpace* space_;
  const DgVec2* coeffs_;
};

// ---------------------------------------------------------------------------
// Advection operator on the DG space
// ---------------------------------------------------------------------------

/// Quadrature degrees for the advection bilinear form (volume and edge).
struct AuQuadrature {
  int volume_degree = 2;
  int edge_degree = 2;
};

/// Degrees that integrate the advection form exactly when the velocity has
/// polynomial component degree `u_degree` (analytic velocities should add a
/// safety margin on top).
AuQuadrature recommended_au_quadrature(const DgSpace& dg, int u_degree);

/// Matrix of the advection operator in the orthonormal DG basis:
///   (A_u)_{ij} = <A_u phi_j, phi_i>
///             = sum_K int_K (u . grad phi_j) phi_i dx
///             - sum_e int_e (u . n_e) (phi_j^- - phi_j^+) (phi_i^- + phi_i^+)/2 ds
/// with n_e the stored minus->plus edge normal. Boundary edges carry no flux
/// (velocities have zero normal trace there).
SpMat assemble_advection(const DgSpace& dg, const VelocityField& u, const AuQuadrature& quad);

/// Transport matrix for densities: d/dt <D, sigma> = <D, A_u sigma> for all
/// sigma gives Ddot = A_u^T D in the orthonormal basis.
SpMat assemble_transport(const DgSpace& dg, const VelocityField& u, const AuQuadrature& quad);

/// b_h(w, f, g) = <A_w f, g>, evaluated matrix-free with the same quadrature
/// layout as assemble_advection (so sums of basis-function evaluations match
/// the assembled matrix exactly, not just up to quadrature error).
double b_h_value(const DgSpace& dg, const VelocityField& w, const Eigen::VectorXd& f,
                 const Eigen::VectorXd& g, const AuQuadrature& quad);

/// Load vector over the velocity space: L_i = b_h(phi_i, f, g) for the global
/// H(div) basis functions phi_i. Consistent with b_h_value / the advection
/// assembly by construction (same rules, same edge treatment).
Eigen::VectorXd b_h_velocity_vector(const DgSpace& dg, const HdivSpace& vel,
                                    const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                    const AuQuadrature& quad);

// ---------------------------------------------------------------------------
// Hat map and commutators
//
// Sign dictionary: the flow solver's unknown u_h advects scalars through
// A_{u_h} (transport reads d/dt rho = A_{u_h}^T rho), whereas the abstract
// evolution in operator variables is d/dt D = -A^T D; the two match under
// u_h = -hat(A).  The solver works with u_h throughout and this layer exists
// for the operator-algebra identities, so the dictionary only matters when
// moving results between the two pictures.
// ---------------------------------------------------------------------------

/// Coefficients of the componentwise projection I_h(x), I_h(y) of the
/// coordinate functions; the hat map pairs operator matrices with these.
DgVec2 coordinate_field(const DgSpace& dg, int quad_degree);

/// Hat of an operator matrix: hat(A)^k = A c^k with c^k the coordinate
/// projections, returned as a vector DG field.
DgVec2 hat_map(const SpMat& A, const DgVec2& coords);

/// Componentwise DG projection I_h(u) of an elementwise velocity.
DgVec2 hat_velocity(const DgSpace& dg, const VelocityField& u, int quad_degree);

/// Matrix commutator [A, B] = A B - B A.
SpMat commutator(const SpMat& A, const SpMat& B);

/// Frobenius inner product sum_ij A_ij B_ij of two sparse matrices.
double frobenius_dot(const SpMat& A, const SpMat& B);

// ---------------------------------------------------------------------------
// Trilinear form a_h and velocity-space assemblies
// ---------------------------------------------------------------------------

/// Quadrature degrees for a_h (volume and edge).
struct AhQuadrature {
  int volume_degree = 2;
  int edge_degree = 2;
};

AhQuadrature recommended_ah_quadrature(const DgSpace& dg, const HdivSpace& vel);

/// a_h(w; u, v) = sum_K int_K w . ((v . grad) u - (u . grad) v) dx
///              + sum_e int_e ((v.n)[u] - (u.n)[v]) . {w} ds
/// with [u] = u^- - u^+, {w} = (w^- + w^+)/2, and u.n, v.n taken as two-sided
/// averages (exact for normal-continuous fields). w is a vector DG field; u, v
/// are H(div) fields. Boundary edges vanish (zero normal traces) and are
/// skipped.
double a_h_value(const DgSpace& dg, const DgVec2& w, const HdivSpace& vel,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& v, const AhQuadrature& quad);

/// Matrix of v -> a_h(w; ., .): (A_w)_{ij} = a_h(w; phi_j, phi_i). Skew by
/// construction (the integrand is antisymmetric in u <-> v pointwise).
SpMat a_h_matrix(const DgSpace& dg, const DgVec2& w, const HdivSpace& vel,
                 const AhQuadrature& quad);

/// Density-weighted velocity mass matrix M_{ij} = int rho phi_i . phi_j dx,
/// rho a scalar DG field.
SpMat weighted_velocity_mass(const DgSpace& dg, const Eigen::VectorXd& rho, const HdivSpace& vel,
                             int quad_degree);

/// Load vector <rho R, phi_i> for an analytic vector field R.
Eigen::VectorXd weighted_velocity_load(const DgSpace& dg, const Eigen::VectorXd& rho,
                                       const HdivSpace& vel, const std::function<Vec2(Vec2)>& R,
                                       int quad_degree);

// ---------------------------------------------------------------------------
// Projections and integrals
// ---------------------------------------------------------------------------

/// L2 projection of an elementwise-evaluable scalar.
Eigen::VectorXd project_elementwise(const DgSpace& dg, const std::function<double(int, Vec2)>& f,
                                    int quad_degree);

/// L2 projection of an elementwise-evaluable vector, componentwise.
DgVec2 project_vec_elementwise(const DgSpace& dg, const std::function<Vec2(int, Vec2)>& f,
                               int quad_degree);

/// Quadrature integral of an elementwise-evaluable function over the mesh.
double integrate_elementwise(const Mesh& mesh, const std::function<double(int, Vec2)>& f,
                             int quad_degree);

/// Exact integral of a DG field: sum_K sqrt(2|K|) c_0^K.
double integrate_dg(const DgSpace& dg, const Eigen::VectorXd& f);

}  // namespace varflow
