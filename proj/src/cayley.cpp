#include "varflow/cayley.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace varflow {

namespace {

SpMat sparse_identity_like(const SpMat& A) {
  SpMat I(A.rows(), A.cols());
  I.setIdentity();
  return I;
}

}  // namespace

CayleyIntegrator::CayleyIntegrator(const DgSpace& dg, const HdivSpace& vel,
                                   const EquationOfState& eos, std::function<Vec2(Vec2)> rotation,
                                   std::function<double(Vec2)> potential)
    : dg_(&dg), vel_(&vel), eos_(eos), rot_(std::move(rotation)), pot_(std::move(potential)) {
  if (&dg.mesh() != &vel.mesh())
    throw std::invalid_argument("CayleyIntegrator: spaces live on different meshes");
  if (!eos.barotropic())
    throw std::invalid_argument("CayleyIntegrator: only barotropic equations of state");
  if (dg.dim() > 512)
    throw std::invalid_argument(
        "CayleyIntegrator: DG space too large (> 512 DOFs); this integrator stores one basis "
        "operator per velocity DOF and is meant for small meshes");

  const int r = dg.degree();
  phys_quad_ = std::min(std::max(3 * r + 2, 2 * r + 6), kMaxQuadDegree);
  au_quad_ = recommended_au_quadrature(dg, vel.component_degree());
  coords_ = coordinate_field(dg, phys_quad_);

  const int nv = vel.dim();
  basis_ops_.reserve(nv);
  Hx_.resize(dg.dim(), nv);
  Hy_.resize(dg.dim(), nv);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(nv);
  for (int i = 0; i < nv; ++i) {
    e[i] = 1.0;
    const HdivVelocity ui(vel, e);
    basis_ops_.push_back(assemble_advection(dg, ui, au_quad_));
    Hx_.col(i) = basis_ops_.back() * coords_.x;
    Hy_.col(i) = basis_ops_.back() * coords_.y;
    e[i] = 0.0;
  }
}

SpMat CayleyIntegrator::operator_of(const Eigen::VectorXd& u) const {
  const HdivVelocity field(*vel_, u);
  return assemble_advection(*dg_, field, au_quad_);
}

DgVec2 CayleyIntegrator::hat_of(const Eigen::VectorXd& u) const {
  DgVec2 h;
  h.x = Hx_ * u;
  h.y = Hy_ * u;
  return h;
}

Eigen::VectorXd CayleyIntegrator::apply_tau(const SpMat& A, const Eigen::VectorXd& x) const {
  SpMat lhs = sparse_identity_like(A) - 0.5 * A;
  Eigen::SparseLU<SpMat> lu(lhs);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("CayleyIntegrator: tau factorization failed");
  return lu.solve(x + 0.5 * (A * x));
}

Eigen::VectorXd CayleyIntegrator::apply_tau_transpose(const SpMat& A,
                                                      const Eigen::VectorXd& x) const {
  const SpMat At = SpMat(A.transpose());
  SpMat lhs = sparse_identity_like(At) - 0.5 * At;
  Eigen::SparseLU<SpMat> lu(lhs);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("CayleyIntegrator: tau factorization failed");
  const Eigen::VectorXd y = lu.solve(x);
  return y + 0.5 * (At * y);
}

double CayleyIntegrator::hat_pair(const DgVec2& alpha, const Eigen::VectorXd& Ccx,
                                  const Eigen::VectorXd& Ccy) const {
  return alpha.x.dot(Ccx) + alpha.y.dot(Ccy);
}

DgVec2 CayleyIntegrator::momentum_field(const Eigen::VectorXd& D, const DgVec2& hat) const {
  const Mesh& mesh = dg_->mesh();
  return project_vec_elementwise(
      *dg_,
      [&](int t, Vec2 x) {
        const Vec2 ref = mesh.map_to_reference(t, x);
        const double Dv = dg_->eval(D, t, ref);
        const Vec2 hv{dg_->eval(hat.x, t, ref), dg_->eval(hat.y, t, ref)};
        const Vec2 R = rot_ ? rot_(x) : Vec2{0.0, 0.0};
        return (hv + R) * Dv;
      },
      phys_quad_);
}

CayleyState CayleyIntegrator::initial_state(const std::function<Vec2(Vec2)>& u0,
                                            const std::function<double(Vec2)>& rho0) const {
  CayleyState s;
  s.u = vel_->interpolate(u0, kMaxQuadDegree, kMaxQuadDegree);
  s.D = dg_->project(rho0, phys_quad_);
  return s;
}

double CayleyIntegrator::energy(const CayleyState& s) const {
  const Mesh& mesh = dg_->mesh();
  const DgVec2 hat = hat_of(s.u);
  return integrate_elementwise(
      mesh,
      [&](int t, Vec2 x) {
        const Vec2 ref = mesh.map_to_reference(t, x);
        const double Dv = dg_->eval(s.D, t, ref);
        const Vec2 hv{dg_->eval(hat.x, t, ref), dg_->eval(hat.y, t, ref)};
        const double phi = pot_ ? pot_(x) : 0.0;
        return 0.5 * Dv * dot(hv, hv) + eos_.U(Dv, 0.0) + Dv * phi;
      },
      phys_quad_);
}

CayleyState CayleyIntegrator::step(const CayleyState& prev, double dt,
                                   const CayleyOptions& opt) const {
  const Mesh& mesh = dg_->mesh();
  const int nv = vel_->dim();

  const SpMat A_prev = operator_of(prev.u);
  const DgVec2 hat_prev = hat_of(prev.u);

  CayleyState next;
  next.time = prev.time + dt;
  next.D = apply_tau_transpose(SpMat(-dt * A_prev), prev.D);

  // mu_{k-1} pairings with every test operator: p_i = <alpha_prev, hat(B_i)>.
  const DgVec2 alpha_prev = momentum_field(prev.D, hat_prev);
  const Eigen::VectorXd p = Hx_.transpose() * alpha_prev.x + Hy_.transpose() * alpha_prev.y;

  // M_ij = <I_h(D_k hat(B_j)), hat(B_i)> = H^T W H with the D_k-weighted DG
  // mass W applied per component; c_R,i = <I_h(D_k R), hat(B_i)>.
  const QuadRule rule = triangle_rule(phys_quad_);
  const Eigen::MatrixXd phi = dg_->ref_values(rule.points);
  const int npc = dg_->ndof_cell();
  SpMat W(dg_->dim(), dg_->dim());
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(mesh.num_triangles()) * npc * npc);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const double s = dg_->value_scale(t);
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(npc, npc);
      for (int q = 0; q < rule.size(); ++q) {
        double Dq = 0.0;
        for (int c = 0; c < npc; ++c) Dq += phi(q, c) * next.D[dg_->global_index(t, c)];
        Dq *= s;
        for (int a = 0; a < npc; ++a)
          for (int b = 0; b < npc; ++b) block(a, b) += rule.weights[q] * Dq * phi(q, a) * phi(q, b);
      }
      for (int a = 0; a < npc; ++a)
        for (int b = 0; b < npc; ++b)
          trips.emplace_back(dg_->global_index(t, a), dg_->global_index(t, b), block(a, b));
    }
    W.setFromTriplets(trips.begin(), trips.end());
  }
  const Eigen::MatrixXd M =
      Hx_.transpose() * (W * Hx_).eval() + Hy_.transpose() * (W * Hy_).eval();
  Eigen::FullPivLU<Eigen::MatrixXd> Mlu(M);
  if (!Mlu.isInvertible())
    throw std::runtime_error(
        "CayleyIntegrator: hat-pairing Gram matrix is singular; the velocity space must embed in "
        "the vector DG space for the operator parametrization to be injective");

  const DgVec2 projRD = project_vec_elementwise(
      *dg_,
      [&](int t, Vec2 x) {
        const Vec2 ref = mesh.map_to_reference(t, x);
        const Vec2 R = rot_ ? rot_(x) : Vec2{0.0, 0.0};
        return R * dg_->eval(next.D, t, ref);
      },
      phys_quad_);
  const Eigen::VectorXd cR = Hx_.transpose() * projRD.x + Hy_.transpose() * projRD.y;

  const Eigen::VectorXd Acx_prev = A_prev * coords_.x;
  const Eigen::VectorXd Acy_prev = A_prev * coords_.y;

  Eigen::VectorXd u = prev.u;
  bool converged = false;
  double delta = 0.0;
  for (int it = 0; it < opt.max_picard; ++it) {
    const SpMat A = operator_of(u);
    const DgVec2 hat_u = hat_of(u);
    const DgVec2 alpha = momentum_field(next.D, hat_u);

    // dl/dD at the current iterate: I_h(1/2 |hat(A)|^2 + hat(A).R - dU/dD - Phi).
    const Eigen::VectorXd g = project_elementwise(
        *dg_,
        [&](int t, Vec2 x) {
          const Vec2 ref = mesh.map_to_reference(t, x);
          const Vec2 hv{dg_->eval(hat_u.x, t, ref), dg_->eval(hat_u.y, t, ref)};
          const double Dv = dg_->eval(next.D, t, ref);
          const Vec2 R = rot_ ? rot_(x) : Vec2{0.0, 0.0};
          const double phiv = pot_ ? pot_(x) : 0.0;
          return 0.5 * dot(hv, hv) + dot(hv, R) - eos_.dU_dD(Dv, 0.0) - phiv;
        },
        phys_quad_);

    const Eigen::VectorXd Acx = A * coords_.x;
    const Eigen::VectorXd Acy = A * coords_.y;

    Eigen::VectorXd NL(nv);
    for (int i = 0; i < nv; ++i) {
      const SpMat& B = basis_ops_[i];
      // hat([A,B] - dt/2 A B A) applied to each coordinate projection.
      const Eigen::VectorXd BAx = B * Acx, BAy = B * Acy;
      const Eigen::VectorXd cx = A * Hx_.col(i) - BAx - 0.5 * dt * (A * BAx);
      const Eigen::VectorXd cy = A * Hy_.col(i) - BAy - 0.5 * dt * (A * BAy);
      double v = 0.5 * hat_pair(alpha, cx, cy);
      // hat([A_prev,B] + dt/2 A_prev B A_prev).
      const Eigen::VectorXd BAxp = B * Acx_prev, BAyp = B * Acy_prev;
      const Eigen::VectorXd cxp = A_prev * Hx_.col(i) - BAxp + 0.5 * dt * (A_prev * BAxp);
      const Eigen::VectorXd cyp = A_prev * Hy_.col(i) - BAyp + 0.5 * dt * (A_prev * BAyp);
      v += 0.5 * hat_pair(alpha_prev, cxp, cyp);
      // <dl/dD_k, D_k . B> with <D . B, E> = <D, B E>.
      v += (B * g).dot(next.D);
      NL[i] = v;
    }

    const Eigen::VectorXd u_new = Mlu.solve(p - cR - dt * NL);
    delta = (u_new - u).norm();
    u = u_new;
    if (delta <= opt.tol * (1.0 + u.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "CayleyIntegrator::step: no convergence after " << opt.max_picard
        << " iterations (last update " << delta << ")";
    throw std::runtime_error(msg.str());
  }
  next.u = u;
  return next;
}

}  // namespace varflow
