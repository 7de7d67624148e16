#pragma once

#include <Eigen/Dense>

#include "varflow/dynamics.hpp"
#include "varflow/operators.hpp"
#include "varflow/physics.hpp"

namespace varflow {

/// State of the operator-variable integrator: velocity coefficients (the
/// operator is A_u = sum_i u_i A_{phi_i}) and DG density coefficients.
struct CayleyState {
  Eigen::VectorXd u;
  Eigen::VectorXd D;
  double time = 0.0;
};

struct CayleyOptions {
  int max_picard = 200;
  double tol = 1e-12;
};

/// Variational time integrator in the Lie-algebra variables (A, D) using the
/// Cayley transform tau(A) = (I - A/2)^{-1} (I + A/2):
///
///   <<(mu_k - mu_{k-1})/dt, B>> + 1/2 <<mu_k,     [A_k,B]     - dt/2 A_k B A_k>>
///                              + 1/2 <<mu_{k-1}, [A_{k-1},B] + dt/2 A_{k-1} B A_{k-1}>>
///                              + <dl/dD_k, D_k . B> = 0            for all B,
///   D_k = tau(-dt A_{k-1})^T D_{k-1},
///
/// with mu = dl/dA = I_h(D (hat(A) + R))^flat, dl/dD = I_h(1/2 |hat(A)|^2 +
/// hat(A).R - dU/dD - Phi), test operators B ranging over the advection
/// operators of the velocity basis, and <<alpha^flat, C>> = <alpha, hat(C)>.
/// Restricted to barotropic equations of state (the Lagrangian above has no
/// entropy slot), and to small DG spaces (<= 512 DOFs) since it stores one
/// basis operator per velocity DOF.
class CayleyIntegrator {
 public:
  CayleyIntegrator(const DgSpace& dg, const HdivSpace& vel, const EquationOfState& eos,
                   std::function<Vec2(Vec2)> rotation = {},
                   std::function<double(Vec2)> potential = {});

  const DgSpace& dg() const { return *dg_; }
  const HdivSpace& velocity_space() const { return *vel_; }

  CayleyState initial_state(const std::function<Vec2(Vec2)>& u0,
                            const std::function<double(Vec2)>& rho0) const;

  CayleyState step(const CayleyState& prev, double dt, const CayleyOptions& opt = {}) const;

  /// Advection operator of a velocity coefficient vector.
  SpMat operator_of(const Eigen::VectorXd& u) const;

  /// y = tau(A) x and y = tau(A)^T x (each costs one sparse solve).
  Eigen::VectorXd apply_tau(const SpMat& A, const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_tau_transpose(const SpMat& A, const Eigen::VectorXd& x) const;

  /// Energy int [ 1/2 D |hat(A)|^2 + U(D) + D Phi ] with the physics rule.
  double energy(const CayleyState& s) const;
  double mass(const CayleyState& s) const { return integrate_dg(*dg_, s.D); }

  /// hat(A_u) as a DG vector field (columns of the stored hat basis).
  DgVec2 hat_of(const Eigen::VectorXd& u) const;

  int physics_quad_degree() const { return phys_quad_; }

 private:
  /// <alpha, hat(C)> for C c^x, C c^y given as vectors.
  double hat_pair(const DgVec2& alpha, const Eigen::VectorXd& Ccx,
                  const Eigen::VectorXd& Ccy) const;

  /// I_h(D (hat-field + R)) with the physics rule.
  DgVec2 momentum_field(const Eigen::VectorXd& D, const DgVec2& hat) const;

  const DgSpace* dg_;
  const HdivSpace* vel_;
  EquationOfState eos_;
  std::function<Vec2(Vec2)> rot_;
  std::function<double(Vec2)> pot_;
  int phys_quad_;
  AuQuadrature au_quad_;

  DgVec2 coords_;                 // I_h(x), I_h(y)
  std::vector<SpMat> basis_ops_;  // A_{phi_i}
  Eigen::MatrixXd Hx_, Hy_;       // hat(A_{phi_i}) coefficients, one column per i
};

}  // namespace varflow
