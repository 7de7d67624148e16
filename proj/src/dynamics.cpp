#include "varflow/dynamics.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace varflow {

namespace {

SpMat sparse_identity(int n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

}  // namespace

FlowSolver::FlowSolver(const DgSpace& dg, const HdivSpace& vel, const EquationOfState& eos,
                       std::function<Vec2(Vec2)> rotation, std::function<double(Vec2)> potential,
                       int quad_degree_override)
    : dg_(&dg), vel_(&vel), eos_(eos), rot_(std::move(rotation)), pot_(std::move(potential)) {
  if (&dg.mesh() != &vel.mesh())
    throw std::invalid_argument("FlowSolver: spaces live on different meshes");
  const int r = dg.degree();
  phys_quad_ = quad_degree_override > 0
                   ? std::min(quad_degree_override, kMaxQuadDegree)
                   : std::min(std::max(3 * r + 2, 2 * r + 6), kMaxQuadDegree);
  au_quad_ = recommended_au_quadrature(dg, vel.component_degree());
  ah_quad_ = recommended_ah_quadrature(dg, vel);
}

State FlowSolver::initial_state(const std::function<Vec2(Vec2)>& u0,
                                const std::function<double(Vec2)>& rho0,
                                const std::function<double(Vec2)>& S0) const {
  State s;
  s.u = vel_->interpolate(u0, kMaxQuadDegree, kMaxQuadDegree);
  s.rho = dg_->project(rho0, phys_quad_);
  if (!eos_.barotropic()) {
    if (!S0) throw std::invalid_argument("initial_state: baroclinic flow needs an entropy field");
    s.S = dg_->project(S0, phys_quad_);
  }
  return s;
}

double FlowSolver::energy(const State& s) const {
  const bool baro = eos_.barotropic();
  return integrate_elementwise(
      dg_->mesh(),
      [&](int t, Vec2 x) {
        const Vec2 ref = dg_->mesh().map_to_reference(t, x);
        const double rho = dg_->eval(s.rho, t, ref);
        if (rho <= 0.0)
          throw std::domain_error("energy: nonpositive density at a quadrature point in element " +
                                  std::to_string(t));
        const double S = baro ? 0.0 : dg_->eval(s.S, t, ref);
        const Vec2 u = vel_->eval(s.u, t, x);
        return 0.5 * rho * dot(u, u) + eos_.U(rho, S) + rho * potential_at(x);
      },
      phys_quad_);
}

double FlowSolver::entropy(const State& s) const {
  return s.S.size() ? integrate_dg(*dg_, s.S) : 0.0;
}

double FlowSolver::min_density(const State& s) const {
  const Mesh& mesh = dg_->mesh();
  const QuadRule rule = triangle_rule(phys_quad_);
  const Eigen::MatrixXd phi = dg_->ref_values(rule.points);
  double mn = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double sc = dg_->value_scale(t);
    for (int q = 0; q < rule.size(); ++q) {
      double v = 0.0;
      for (int i = 0; i < dg_->ndof_cell(); ++i) v += phi(q, i) * s.rho[dg_->global_index(t, i)];
      mn = std::min(mn, v * sc);
    }
  }
  return mn;
}

MidpointFields FlowSolver::midpoint_fields_impl(const State& s0, const Eigen::VectorXd& u1,
                                                const Eigen::VectorXd& rho1,
                                                const Eigen::VectorXd& S1) const {
  const Mesh& mesh = dg_->mesh();
  const bool baro = eos_.barotropic();
  auto dg_at = [&](const Eigen::VectorXd& c, int t, const Vec2& x) {
    return dg_->eval(c, t, mesh.map_to_reference(t, x));
  };

  MidpointFields out;
  out.wbar = project_vec_elementwise(
      *dg_,
      [&](int t, Vec2 x) {
        const Vec2 R = rotation_at(x);
        const Vec2 m0 = (vel_->eval(s0.u, t, x) + R) * dg_at(s0.rho, t, x);
        const Vec2 m1 = (vel_->eval(u1, t, x) + R) * dg_at(rho1, t, x);
        return (m0 + m1) * 0.5;
      },
      phys_quad_);

  out.F = project_elementwise(
      *dg_,
      [&](int t, Vec2 x) {
        const Vec2 u0v = vel_->eval(s0.u, t, x);
        const Vec2 u1v = vel_->eval(u1, t, x);
        const double r0 = dg_at(s0.rho, t, x);
        const double r1 = dg_at(rho1, t, x);
        double fbar;
        if (baro) {
          fbar = eos_.discrete_dD(r0, r1, 0.0);
        } else {
          const double s0v = dg_at(s0.S, t, x);
          const double s1v = dg_at(S1, t, x);
          fbar = 0.5 * (eos_.discrete_dD(r0, r1, s0v) + eos_.discrete_dD(r0, r1, s1v));
        }
        return 0.5 * dot(u0v, u1v) + dot((u0v + u1v) * 0.5, rotation_at(x)) - fbar -
               potential_at(x);
      },
      phys_quad_);

  if (!baro) {
    out.G = project_elementwise(
        *dg_,
        [&](int t, Vec2 x) {
          const double r0 = dg_at(s0.rho, t, x);
          const double r1 = dg_at(rho1, t, x);
          const double s0v = dg_at(s0.S, t, x);
          const double s1v = dg_at(S1, t, x);
          return -0.5 * (eos_.discrete_dS(s0v, s1v, r0) + eos_.discrete_dS(s0v, s1v, r1));
        },
        phys_quad_);
  }
  return out;
}

MidpointFields FlowSolver::midpoint_fields(const State& s0, const State& s1) const {
  return midpoint_fields_impl(s0, s1.u, s1.rho, s1.S);
}

FlowSolver::Stage FlowSolver::advance_fields(const State& prev, const Eigen::VectorXd& u1,
                                             const Eigen::VectorXd* rho1_in,
                                             const Eigen::VectorXd* S1_in, double dt) const {
  const bool baro = eos_.barotropic();
  Stage sg;

  const Eigen::VectorXd u_half = 0.5 * (prev.u + u1);
  const HdivVelocity uh(*vel_, u_half);

  if (rho1_in) {
    sg.rho1 = *rho1_in;
    if (!baro) sg.S1 = *S1_in;
  } else {
    // Transport: (I/dt - T/2) rho_k = (I/dt + T/2) rho_{k-1}, T = A_u^T.
    const SpMat A = assemble_advection(*dg_, uh, au_quad_);
    const SpMat T = SpMat(A.transpose());
    const SpMat I = sparse_identity(dg_->dim());
    const SpMat lhs = (1.0 / dt) * I - 0.5 * T;
    Eigen::SparseLU<SpMat> lu(lhs);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("FlowSolver: density transport factorization failed");
    sg.rho1 = lu.solve((1.0 / dt) * prev.rho + 0.5 * (T * prev.rho));
    if (!baro) sg.S1 = lu.solve((1.0 / dt) * prev.S + 0.5 * (T * prev.S));
  }

  sg.mid = midpoint_fields_impl(prev, u1, sg.rho1, baro ? prev.S : sg.S1);

  sg.M1 = weighted_velocity_mass(*dg_, sg.rho1, *vel_, phys_quad_);
  sg.r1 = weighted_velocity_load(
      *dg_, sg.rho1, *vel_, [this](Vec2 x) { return rotation_at(x); }, phys_quad_);
  sg.Aw = a_h_matrix(*dg_, sg.mid.wbar, *vel_, ah_quad_);

  const Eigen::VectorXd rho_half = 0.5 * (prev.rho + sg.rho1);
  sg.L = b_h_velocity_vector(*dg_, *vel_, sg.mid.F, rho_half, au_quad_);
  if (!baro) {
    const Eigen::VectorXd S_half = 0.5 * (prev.S + sg.S1);
    sg.L += b_h_velocity_vector(*dg_, *vel_, sg.mid.G, S_half, au_quad_);
  }
  return sg;
}

void FlowSolver::scheme_residuals(const State& s0, const State& s1, double dt,
                                  Eigen::VectorXd& momentum, Eigen::VectorXd& density,
                                  Eigen::VectorXd& entropy) const {
  const bool baro = eos_.barotropic();
  const Eigen::VectorXd u_half = 0.5 * (s0.u + s1.u);
  const HdivVelocity uh(*vel_, u_half);
  const SpMat A = assemble_advection(*dg_, uh, au_quad_);
  const SpMat T = SpMat(A.transpose());

  density = (s1.rho - s0.rho) / dt - 0.5 * (T * (s0.rho + s1.rho));
  if (!baro)
    entropy = (s1.S - s0.S) / dt - 0.5 * (T * (s0.S + s1.S));
  else
    entropy = Eigen::VectorXd();

  const Stage sg = advance_fields(s0, s1.u, &s1.rho, &s1.S, dt);
  const SpMat M0 = weighted_velocity_mass(*dg_, s0.rho, *vel_, phys_quad_);
  const Eigen::VectorXd r0 = weighted_velocity_load(
      *dg_, s0.rho, *vel_, [this](Vec2 x) { return rotation_at(x); }, phys_quad_);
  momentum = (sg.M1 * s1.u + sg.r1 - M0 * s0.u - r0) / dt + 0.5 * (sg.Aw * (s0.u + s1.u)) - sg.L;
}

State FlowSolver::step(const State& prev, double dt, const StepperOptions& opt,
                       StepStats* stats) const {
  if (dt == 0.0) throw std::invalid_argument("FlowSolver::step: dt must be nonzero");
  const bool baro = eos_.barotropic();
  if (!baro && prev.S.size() != dg_->dim())
    throw std::invalid_argument("FlowSolver::step: baroclinic state has no entropy field");

  const SpMat M0 = weighted_velocity_mass(*dg_, prev.rho, *vel_, phys_quad_);
  const Eigen::VectorXd r0 = weighted_velocity_load(
      *dg_, prev.rho, *vel_, [this](Vec2 x) { return rotation_at(x); }, phys_quad_);
  const Eigen::VectorXd base = (1.0 / dt) * (M0 * prev.u + r0);

  StepStats st;
  State cur = prev;
  Eigen::SparseLU<SpMat> lu;
  bool analyzed = false;

  auto velocity_solve = [&](const Stage& sg) {
    const SpMat lhs = (1.0 / dt) * sg.M1 + 0.5 * sg.Aw;
    if (!analyzed) {
      lu.analyzePattern(lhs);
      analyzed = true;
    }
    lu.factorize(lhs);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("FlowSolver: velocity system factorization failed");
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int i = 0; i < lhs.rows(); ++i) {
      const double d = std::abs(lhs.coeff(i, i));
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    st.lhs_diag_ratio = dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
    const Eigen::VectorXd rhs = base - (1.0 / dt) * sg.r1 - 0.5 * (sg.Aw * prev.u) + sg.L;
    return Eigen::VectorXd(lu.solve(rhs));
  };

  bool converged = false;
  const int n_picard = opt.picard_first ? opt.max_picard : 0;
  const int window = std::max(0, opt.anderson_window);
  std::vector<Eigen::VectorXd> hist_f, hist_g;  // residuals and images of the map
  Eigen::VectorXd last_plain = cur.u;
  bool restarted = false;
  for (int it = 1; it <= n_picard; ++it) {
    st.picard_iterations = it;
    Stage sg;
    try {
      sg = advance_fields(prev, cur.u, nullptr, nullptr, dt);
    } catch (const std::domain_error&) {
      // The extrapolated iterate left the admissible (positive-density) set;
      // restart the extrapolation from the last plain fixed-point image.
      if (restarted || hist_f.empty()) throw;
      restarted = true;
      hist_f.clear();
      hist_g.clear();
      cur.u = last_plain;
      continue;
    }
    const Eigen::VectorXd u_new = velocity_solve(sg);

    double delta = (u_new - cur.u).norm() + (sg.rho1 - cur.rho).norm();
    double scale = cur.u.norm() + cur.rho.norm();
    if (!baro) {
      delta += (sg.S1 - cur.S).norm();
      scale += cur.S.norm();
    }
    st.final_update = delta;
    static const bool trace = std::getenv("VARFLOW_TRACE_PICARD") != nullptr;
    if (trace)
      std::fprintf(stderr, "  picard it=%3d |f|=%.3e drho=%.3e hist=%zu\n", it,
                   (u_new - cur.u).norm(), (sg.rho1 - cur.rho).norm(),
                   hist_f.size());
    if (delta <= opt.abs_tol + opt.rel_tol * scale) {
      cur.u = u_new;
      cur.rho = sg.rho1;
      if (!baro) cur.S = sg.S1;
      converged = true;
      break;
    }

    Eigen::VectorXd next = u_new;
    if (window > 0) {
      // Anderson extrapolation: pick the affine combination of the stored map
      // images whose combined fixed-point residual is least-squares small.
      hist_f.push_back(u_new - cur.u);
      hist_g.push_back(u_new);
      if (static_cast<int>(hist_f.size()) > window + 1) {
        hist_f.erase(hist_f.begin());
        hist_g.erase(hist_g.begin());
      }
      // Entries from a much less converged stage carry no information at the
      // current accuracy and only poison the least-squares system.
      while (hist_f.size() > 1 &&
             hist_f.front().norm() > 1e3 * hist_f.back().norm()) {
        hist_f.erase(hist_f.begin());
        hist_g.erase(hist_g.begin());
      }
      const int m = static_cast<int>(hist_f.size()) - 1;
      if (m >= 1) {
        const Eigen::Index nu = u_new.size();
        Eigen::MatrixXd dF(nu, m), dG(nu, m);
        for (int j = 0; j < m; ++j) {
          dF.col(j) = hist_f[static_cast<size_t>(j) + 1] - hist_f[static_cast<size_t>(j)];
          dG.col(j) = hist_g[static_cast<size_t>(j) + 1] - hist_g[static_cast<size_t>(j)];
        }
        // Rank-revealing solve plus a weight cap: near convergence the
        // difference columns become collinear, and unbounded weights would
        // amplify linear-solver roundoff above the convergence tolerance.
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dF);
        qr.setThreshold(1e-8);
        Eigen::VectorXd gamma = qr.solve(hist_f.back());
        const double gmax = gamma.cwiseAbs().maxCoeff();
        constexpr double kWeightCap = 50.0;
        if (gmax > kWeightCap) gamma *= kWeightCap / gmax;
        next -= dG * gamma;
        static const bool trace_aa = std::getenv("VARFLOW_TRACE_PICARD") != nullptr;
        if (trace_aa)
          std::fprintf(stderr, "           m=%d |gamma|=%.3e jump=%.3e ls_res=%.3e\n",
                       m, gamma.norm(), (next - u_new).norm(),
                       (hist_f.back() - dF * gamma).norm());
      }
    }
    last_plain = u_new;
    cur.u = next;
    cur.rho = sg.rho1;
    if (!baro) cur.S = sg.S1;
  }

  if (!converged && (opt.newton_fallback || !opt.picard_first) &&
      vel_->dim() <= opt.newton_limit) {
    st.used_newton = true;
    const int n = vel_->dim();
    auto residual = [&](const Eigen::VectorXd& u) {
      const Stage sg = advance_fields(prev, u, nullptr, nullptr, dt);
      return Eigen::VectorXd((1.0 / dt) * (sg.M1 * u + sg.r1) - base +
                             0.5 * (sg.Aw * (prev.u + u)) - sg.L);
    };
    Eigen::VectorXd u = cur.u;
    for (int it = 0; it < opt.max_newton; ++it) {
      const Eigen::VectorXd r = residual(u);
      Eigen::MatrixXd J(n, n);
      for (int j = 0; j < n; ++j) {
        const double h = std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(u[j]));
        Eigen::VectorXd up = u;
        up[j] += h;
        J.col(j) = (residual(up) - r) / h;
      }
      const Eigen::VectorXd du = J.partialPivLu().solve(-r);
      u += du;
      st.final_update = du.norm();
      if (du.norm() <= opt.abs_tol + opt.rel_tol * u.norm()) {
        converged = true;
        break;
      }
    }
    const Stage sg = advance_fields(prev, u, nullptr, nullptr, dt);
    cur.u = u;
    cur.rho = sg.rho1;
    if (!baro) cur.S = sg.S1;
  }

  if (!converged) {
    std::ostringstream msg;
    msg << "FlowSolver::step: no convergence after " << opt.max_picard
        << " Picard iterations (last update " << st.final_update << ")";
    throw std::runtime_error(msg.str());
  }

  cur.time = prev.time + dt;
  st.converged = true;
  st.min_density = min_density(cur);
  if (stats) *stats = st;
  return cur;
}

}  // namespace varflow
