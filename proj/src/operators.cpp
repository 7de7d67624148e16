#include "varflow/operators.hpp"

#include <algorithm>
#include <vector>

namespace varflow {

namespace {

// Physical DG basis values of one element at the reference points of `rule`:
// row q, column i, including the 1/sqrt(2|K|) scale.
Eigen::MatrixXd physical_edge_values(const DgSpace& dg, int t, const std::vector<Vec2>& phys) {
  const Mesh& mesh = dg.mesh();
  std::vector<Vec2> ref(phys.size());
  for (size_t q = 0; q < phys.size(); ++q) ref[q] = mesh.map_to_reference(t, phys[q]);
  return dg.ref_values(ref) * dg.value_scale(t);
}

std::vector<Vec2> edge_quad_points(const Mesh& mesh, const Edge& e, const EdgeRule& rule) {
  const Vec2 &va = mesh.vertex(e.v[0]), &vb = mesh.vertex(e.v[1]);
  std::vector<Vec2> pts(rule.size());
  for (int q = 0; q < rule.size(); ++q) pts[q] = va + (vb - va) * rule.points[q];
  return pts;
}

}  // namespace

Vec2 DgVelocity::value(int t, const Vec2& phys) const {
  const Vec2 ref = space_->mesh().map_to_reference(t, phys);
  return {space_->eval(coeffs_->x, t, ref), space_->eval(coeffs_->y, t, ref)};
}

Vec2 DgVelocity::edge_value(const Edge& e, const Vec2& phys) const {
  if (e.is_boundary()) return value(e.minus, phys);
  return (value(e.minus, phys) + value(e.plus, phys)) * 0.5;
}

AuQuadrature recommended_au_quadrature(const DgSpace& dg, int u_degree) {
  const int r = dg.degree();
  AuQuadrature q;
  q.volume_degree = std::min(std::max(u_degree + 2 * r - 1, 0), kMaxQuadDegree);
  q.edge_degree = std::min(u_degree + 2 * r, kMaxQuadDegree);
  return q;
}

SpMat assemble_advection(const DgSpace& dg, const VelocityField& u, const AuQuadrature& quad) {
  const Mesh& mesh = dg.mesh();
  const int npc = dg.ndof_cell();
  const QuadRule vrule = triangle_rule(quad.volume_degree);
  const EdgeRule erule = edge_rule(quad.edge_degree);

  const Eigen::MatrixXd phi = dg.ref_values(vrule.points);
  Eigen::MatrixXd dxi, deta;
  dg.ref_gradients(vrule.points, dxi, deta);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.num_triangles()) * npc * npc * 5);

  // Volume term: the element scale factors cancel against 2|K|, leaving
  // sum_q w_q (u . J^{-T} gradhat_j) phihat_i.
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Mat2 jinvT = mesh.jacobian(t).inverse().transpose();
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(npc, npc);
    for (int q = 0; q < vrule.size(); ++q) {
      const Vec2 uq = u.value(t, mesh.map_from_reference(t, vrule.points[q]));
      for (int j = 0; j < npc; ++j) {
        const Vec2 gphys = jinvT.apply({dxi(q, j), deta(q, j)});
        const double c = vrule.weights[q] * dot(uq, gphys);
        for (int i = 0; i < npc; ++i) block(i, j) += c * phi(q, i);
      }
    }
    for (int i = 0; i < npc; ++i)
      for (int j = 0; j < npc; ++j)
        trips.emplace_back(dg.global_index(t, i), dg.global_index(t, j), block(i, j));
  }

  // Edge term: -int_e (u.n)(f^- - f^+){g} ds over interior edges.
  for (int eid = 0; eid < mesh.num_edges(); ++eid) {
    const Edge& e = mesh.edge(eid);
    if (e.is_boundary()) continue;
    const std::vector<Vec2> pts = edge_quad_points(mesh, e, erule);
    const Eigen::MatrixXd phim = physical_edge_values(dg, e.minus, pts);
    const Eigen::MatrixXd phip = physical_edge_values(dg, e.plus, pts);

    Eigen::VectorXd un(erule.size());
    for (int q = 0; q < erule.size(); ++q)
      un[q] = erule.weights[q] * dot(u.edge_value(e, pts[q]), e.normal);

    const int elems[2] = {e.minus, e.plus};
    const Eigen::MatrixXd* vals[2] = {&phim, &phip};
    const double jump_sign[2] = {1.0, -1.0};
    for (int sf = 0; sf < 2; ++sf) {
      for (int sg = 0; sg < 2; ++sg) {
        // -|e| * sign_f * 1/2 * Phi_g^T diag(w u.n) Phi_f
        const Eigen::MatrixXd block =
            (-0.5 * e.length * jump_sign[sf]) * vals[sg]->transpose() * un.asDiagonal() * *vals[sf];
        for (int i = 0; i < npc; ++i)
          for (int j = 0; j < npc; ++j)
            trips.emplace_back(dg.global_index(elems[sg], i), dg.global_index(elems[sf], j),
                               block(i, j));
      }
    }
  }

  SpMat A(dg.dim(), dg.dim());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat assemble_transport(const DgSpace& dg, const VelocityField& u, const AuQuadrature& quad) {
  return SpMat(assemble_advection(dg, u, quad).transpose());
}

double b_h_value(const DgSpace& dg, const VelocityField& w, const Eigen::VectorXd& f,
                 const Eigen::VectorXd& g, const AuQuadrature& quad) {
  const Mesh& mesh = dg.mesh();
  const int npc = dg.ndof_cell();
  const QuadRule vrule = triangle_rule(quad.volume_degree);
  const EdgeRule erule = edge_rule(quad.edge_degree);

  const Eigen::MatrixXd phi = dg.ref_values(vrule.points);
  Eigen::MatrixXd dxi, deta;
  dg.ref_gradients(vrule.points, dxi, deta);

  double acc = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Mat2 jinvT = mesh.jacobian(t).inverse().transpose();
    for (int q = 0; q < vrule.size(); ++q) {
      const Vec2 wq = w.value(t, mesh.map_from_reference(t, vrule.points[q]));
      Vec2 gref{0.0, 0.0};
      double gval = 0.0;
      for (int j = 0; j < npc; ++j) {
        const double c = f[dg.global_index(t, j)];
        gref += Vec2{dxi(q, j), deta(q, j)} * c;
        gval += phi(q, j) * g[dg.global_index(t, j)];
      }
      acc += vrule.weights[q] * dot(wq, jinvT.apply(gref)) * gval;
    }
  }

  for (int eid = 0; eid < mesh.num_edges(); ++eid) {
    const Edge& e = mesh.edge(eid);
    if (e.is_boundary()) continue;
    const std::vector<Vec2> pts = edge_quad_points(mesh, e, erule);
    const Eigen::MatrixXd phim = physical_edge_values(dg, e.minus, pts);
    const Eigen::MatrixXd phip = physical_edge_values(dg, e.plus, pts);
    for (int q = 0; q < erule.size(); ++q) {
      double fm = 0.0, fp = 0.0, gm = 0.0, gp = 0.0;
      for (int j = 0; j < npc; ++j) {
        fm += phim(q, j) * f[dg.global_index(e.minus, j)];
        fp += phip(q, j) * f[dg.global_index(e.plus, j)];
        gm += phim(q, j) * g[dg.global_index(e.minus, j)];
        gp += phip(q, j) * g[dg.global_index(e.plus, j)];
      }
      const double un = dot(w.edge_value(e, pts[q]), e.normal);
      acc -= e.length * erule.weights[q] * un * (fm - fp) * 0.5 * (gm + gp);
    }
  }
  return acc;
}

Eigen::VectorXd b_h_velocity_vector(const DgSpace& dg, const HdivSpace& vel,
                                    const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                    const AuQuadrature& quad) {
  const Mesh& mesh = dg.mesh();
  const int npc = dg.ndof_cell();
  const QuadRule vrule = triangle_rule(quad.volume_degree);
  const EdgeRule erule = edge_rule(quad.edge_degree);

  const Eigen::MatrixXd phi = dg.ref_values(vrule.points);
  Eigen::MatrixXd dxi, deta;
  dg.ref_gradients(vrule.points, dxi, deta);

  Eigen::VectorXd L = Eigen::VectorXd::Zero(vel.dim());

  std::vector<Vec2> basis;
  std::vector<Vec2> pts(vrule.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Mat2 jinvT = mesh.jacobian(t).inverse().transpose();
    const double s = dg.value_scale(t);
    const double two_area = 2.0 * mesh.area(t);
    for (int q = 0; q < vrule.size(); ++q) pts[q] = mesh.map_from_reference(t, vrule.points[q]);
    vel.basis_values(t, pts, basis);
    const auto& dofs = vel.cell_dofs(t);
    for (int q = 0; q < vrule.size(); ++q) {
      Vec2 gref{0.0, 0.0};
      double gval = 0.0;
      for (int j = 0; j < npc; ++j) {
        gref += Vec2{dxi(q, j), deta(q, j)} * f[dg.global_index(t, j)];
        gval += phi(q, j) * g[dg.global_index(t, j)];
      }
      const Vec2 gradf = jinvT.apply(gref) * s;
      const double c = two_area * vrule.weights[q] * gval * s;
      for (int i = 0; i < vel.ndof_local(); ++i) {
        if (dofs[i] < 0) continue;
        L[dofs[i]] += c * dot(basis[static_cast<size_t>(q) * vel.ndof_local() + i], gradf);
      }
    }
  }

  // Edge term: only the edge's own DOFs have a nonzero normal trace, and that
  // trace is (2j+1) P_j(s) in the edge parametrization by duality.
  for (int eid = 0; eid < mesh.num_edges(); ++eid) {
    const Edge& e = mesh.edge(eid);
    if (e.is_boundary()) continue;
    const int base = vel.edge_dof_base(eid);
    const std::vector<Vec2> epts = edge_quad_points(mesh, e, erule);
    const Eigen::MatrixXd phim = physical_edge_values(dg, e.minus, epts);
    const Eigen::MatrixXd phip = physical_edge_values(dg, e.plus, epts);
    for (int q = 0; q < erule.size(); ++q) {
      double fm = 0.0, fp = 0.0, gm = 0.0, gp = 0.0;
      for (int j = 0; j < npc; ++j) {
        fm += phim(q, j) * f[dg.global_index(e.minus, j)];
        fp += phip(q, j) * f[dg.global_index(e.plus, j)];
        gm += phim(q, j) * g[dg.global_index(e.minus, j)];
        gp += phip(q, j) * g[dg.global_index(e.plus, j)];
      }
      const double c = -e.length * erule.weights[q] * (fm - fp) * 0.5 * (gm + gp);
      for (int j = 0; j <= vel.order(); ++j)
        L[base + j] += c * (2.0 * j + 1.0) * legendre01(j, erule.points[q]);
    }
  }
  return L;
}

DgVec2 coordinate_field(const DgSpace& dg, int quad_degree) {
  DgVec2 c;
  c.x = dg.project([](Vec2 p) { return p.x; }, quad_degree);
  c.y = dg.project([](Vec2 p) { return p.y; }, quad_degree);
  return c;
}

DgVec2 hat_map(const SpMat& A, const DgVec2& coords) {
  DgVec2 h;
  h.x = A * coords.x;
  h.y = A * coords.y;
  return h;
}

DgVec2 hat_velocity(const DgSpace& dg, const VelocityField& u, int quad_degree) {
  return project_vec_elementwise(
      dg, [&u](int t, Vec2 x) { return u.value(t, x); }, quad_degree);
}

SpMat commutator(const SpMat& A, const SpMat& B) {
  SpMat C = A * B - SpMat(B * A);
  return C;
}

double frobenius_dot(const SpMat& A, const SpMat& B) { return A.cwiseProduct(B).sum(); }

AhQuadrature recommended_ah_quadrature(const DgSpace& dg, const HdivSpace& vel) {
  const int du = vel.component_degree();
  AhQuadrature q;
  q.volume_degree = std::min(dg.degree() + 2 * du, kMaxQuadDegree);
  q.edge_degree = std::min(dg.degree() + 2 * du, kMaxQuadDegree);
  return q;
}

namespace {

// Vector DG field values at physical points of one element.
std::vector<Vec2> dg_vec_values(const DgSpace& dg, const DgVec2& w, int t,
                                const std::vector<Vec2>& phys) {
  const Mesh& mesh = dg.mesh();
  std::vector<Vec2> ref(phys.size());
  for (size_t q = 0; q < phys.size(); ++q) ref[q] = mesh.map_to_reference(t, phys[q]);
  const Eigen::MatrixXd vals = dg.ref_values(ref) * dg.value_scale(t);
  std::vector<Vec2> out(phys.size(), Vec2{0.0, 0.0});
  for (size_t q = 0; q < phys.size(); ++q)
    for (int i = 0; i < dg.ndof_cell(); ++i) {
      const int gi = dg.global_index(t, i);
      out[q] += Vec2{w.x[gi], w.y[gi]} * vals(static_cast<int>(q), i);
    }
  return out;
}

}  // namespace

double a_h_value(const DgSpace& dg, const DgVec2& w, const HdivSpace& vel,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& v, const AhQuadrature& quad) {
  const Mesh& mesh = dg.mesh();
  const QuadRule vrule = triangle_rule(quad.volume_degree);
  const EdgeRule erule = edge_rule(quad.edge_degree);

  double acc = 0.0;
  std::vector<Vec2> pts(vrule.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int q = 0; q < vrule.size(); ++q) pts[q] = mesh.map_from_reference(t, vrule.points[q]);
    const std::vector<Vec2> wv = dg_vec_values(dg, w, t, pts);
    const double two_area = 2.0 * mesh.area(t);
    for (int q = 0; q < vrule.size(); ++q) {
      const Vec2 uq = vel.eval(u, t, pts[q]);
      const Vec2 vq = vel.eval(v, t, pts[q]);
      const Mat2 gu = vel.eval_gradient(u, t, pts[q]);
      const Mat2 gv = vel.eval_gradient(v, t, pts[q]);
      // w . ((v.grad)u - (u.grad)v)
      acc += two_area * vrule.weights[q] * (dot(wv[q], gu.apply(vq)) - dot(wv[q], gv.apply(uq)));
    }
  }

  for (int eid = 0; eid < mesh.num_edges(); ++eid) {
    const Edge& e = mesh.edge(eid);
    if (e.is_boundary()) continue;
    const std::vector<Vec2> epts = edge_quad_points(mesh, e, erule);
    const std::vector<Vec2> wm = dg_vec_values(dg, w, e.minus, epts);
    const std::vector<Vec2> wp = dg_vec_values(dg, w, e.plus, epts);
    for (int q = 0; q < erule.size(); ++q) {
      const Vec2 um = vel.eval(u, e.minus, epts[q]), up = vel.eval(u, e.plus, epts[q]);
      const Vec2 vm = vel.eval(v, e.minus, epts[q]), vp = vel.eval(v, e.plus, epts[q]);
      const Vec2 wavg = (wm[q] + wp[q]) * 0.5;
      const double un = 0.5 * dot(um + up, e.normal);
      const double vn = 0.5 * dot(vm + vp, e.normal);
      // ((v.n)[u] - (u.n)[v]) . {w}
      acc += e.length * erule.weights[q] *
             (vn * dot(um - up, wavg) - un * dot(vm - vp, wavg));
    }
  }
  return acc;
}

SpMat a_h_matrix(const DgSpace& dg, const DgVec2& w, const HdivSpace& vel,
                 const AhQuadrature& quad) {
  const Mesh& mesh = dg.mesh();
  const int nloc = vel.ndof_local();
  const QuadRule vrule = triangle_rule(quad.volume_degree);
  const EdgeRule erule = edge_rule(quad.edge_degree);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.num_triangles()) * nloc * nloc * 5);

  std::vector<Vec2> pts(vrule.size());
  std::vector<Vec2> vals;
  std::vector<Mat2> grads;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int q = 0; q < vrule.size(); ++q) pts[q] = mesh.map_from_reference(t, vrule.points[q]);
    const std::vector<Vec2> wv = dg_vec_values(dg, w, t, pts);
    vel.basis_values(t, pts, vals);
    vel.basis_gradients(t, pts, grads);
    const double two_area = 2.0 * mesh.area(t);
    const auto& dofs = vel.cell_dofs(t);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nloc, nloc);
    for (int q = 0; q < vrule.size(); ++q) {
      const double cw = two_area * vrule.weights[q];
      const size_t off = static_cast<size_t>(q) * nloc;
      // block(i, j) += w . ((phi_i.grad)phi_j - (phi_j.grad)phi_i)
      for (int i = 0; i < nloc; ++i)
        for (int j = 0; j < nloc; ++j)
          block(i, j) += cw * (dot(wv[q], grads[off + j].apply(vals[off + i])) -
                               dot(wv[q], grads[off + i].apply(vals[off + j])));
    }
    for (int i = 0; i < nloc; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < nloc; ++j)
        if (dofs[j] >= 0) trips.emplace_back(dofs[i], dofs[j], block(i, j));
    }
  }

  std::vector<Vec2> bm, bp;
  for (int eid = 0; eid < mesh.num_edges(); ++eid) {
    const Edge& e = mesh.edge(eid);
    if (e.is_boundary()) continue;
    const std::vector<Vec2> epts = edge_quad_points(mesh, e, erule);
    const std::vector<Vec2> wm = dg_vec_values(dg, w, e.minus, epts);
    const std::vector<Vec2> wp = dg_vec_values(dg, w, e.plus, epts);
    vel.basis_values(e.minus, epts, bm);
    vel.basis_values(e.plus, epts, bp);
    const int elems[2] = {e.minus, e.plus};
    const std::vector<Vec2>* side_vals[2] = {&bm, &bp};
    const double sign[2] = {1.0, -1.0};
    // ((v.n)[u] - (u.n)[v]) . {w} with u.n, v.n as two-sided averages:
    //   sum_{su,sv} 1/2 sign_su (v^sv.n)(u^su.{w}) - 1/2 sign_sv (u^su.n)(v^sv.{w})
    // where u supplies columns (from element su) and v rows (element sv).
    for (int su = 0; su < 2; ++su) {
      for (int sv = 0; sv < 2; ++sv) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nloc, nloc);
        for (int q = 0; q < erule.size(); ++q) {
          const Vec2 wavg = (wm[q] + wp[q]) * 0.5;
          const double cw = e.length * erule.weights[q];
          const size_t off = static_cast<size_t>(q) * nloc;
          for (int i = 0; i < nloc; ++i) {
            const Vec2 vi = (*side_vals[sv])[off + i];
            const double vin = dot(vi, e.normal);
            const double viw = dot(vi, wavg);
            for (int j = 0; j < nloc; ++j) {
              const Vec2 uj = (*side_vals[su])[off + j];
              block(i, j) += cw * 0.5 *
                             (sign[su] * vin * dot(uj, wavg) - sign[sv] * dot(uj, e.normal) * viw);
            }
          }
        }
        const auto& rdofs = vel.cell_dofs(elems[sv]);
        const auto& cdofs = vel.cell_dofs(elems[su]);
        for (int i = 0; i < nloc; ++i) {
          if (rdofs[i] < 0) continue;
          for (int j = 0; j < nloc; ++j)
            if (cdofs[j] >= 0) trips.emplace_back(rdofs[i], cdofs[j], block(i, j));
        }
      }
    }
  }

  SpMat A(vel.dim(), vel.dim());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat weighted_velocity_mass(const DgSpace& dg, const Eigen::VectorXd& rho, const HdivSpace& vel,
                             int quad_degree) {
  const Mesh& mesh = dg.mesh();
  const int nloc = vel.ndof_local();
  const QuadRule vrule = triangle_rule(quad_degree);
  const Eigen::MatrixXd phi = dg.ref_values(vrule.points);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.num_triangles()) * nloc * nloc);

  std::vector<Vec2> pts(vrule.size());
  std::vector<Vec2> vals;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int q = 0; q < vrule.size(); ++q) pts[q] = mesh.map_from_reference(t, vrule.points[q]);
    vel.basis_values(t, pts, vals);
    const double s = dg.value_scale(t);
    const double two_area = 2.0 * mesh.area(t);
    const auto& dofs = vel.cell_dofs(t);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(nloc, nloc);
    for (int q = 0; q < vrule.size(); ++q) {
      double rq = 0.0;
      for (int m = 0; m < dg.ndof_cell(); ++m) rq += phi(q, m) * rho[dg.global_index(t, m)];
      rq *= s;
      const double cw = two_area * vrule.weights[q] * rq;
      const size_t off = static_cast<size_t>(q) * nloc;
      for (int i = 0; i < nloc; ++i)
        for (int j = 0; j < nloc; ++j) block(i, j) += cw * dot(vals[off + i], vals[off + j]);
    }
    for (int i = 0; i < nloc; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < nloc; ++j)
        if (dofs[j] >= 0) trips.emplace_back(dofs[i], dofs[j], block(i, j));
    }
  }
  SpMat M(vel.dim(), vel.dim());
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

Eigen::VectorXd weighted_velocity_load(const DgSpace& dg, const Eigen::VectorXd& rho,
                                       const HdivSpace& vel, const std::function<Vec2(Vec2)>& R,
                                       int quad_degree) {
  const Mesh& mesh = dg.mesh();
  const int nloc = vel.ndof_local();
  const QuadRule vrule = triangle_rule(quad_degree);
  const Eigen::MatrixXd phi = dg.ref_values(vrule.points);

  Eigen::VectorXd L = Eigen::VectorXd::Zero(vel.dim());
  std::vector<Vec2> pts(vrule.size());
  std::vector<Vec2> vals;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int q = 0; q < vrule.size(); ++q) pts[q] = mesh.map_from_reference(t, vrule.points[q]);
    vel.basis_values(t, pts, vals);
    const double s = dg.value_scale(t);
    const double two_area = 2.0 * mesh.area(t);
    const auto& dofs = vel.cell_dofs(t);
    for (int q = 0; q < vrule.size(); ++q) {
      double rq = 0.0;
      for (int m = 0; m < dg.ndof_cell(); ++m) rq += phi(q, m) * rho[dg.global_index(t, m)];
      rq *= s;
      const Vec2 Rq = R(pts[q]);
      const double cw = two_area * vrule.weights[q] * rq;
      const size_t off = static_cast<size_t>(q) * nloc;
      for (int i = 0; i < nloc; ++i)
        if (dofs[i] >= 0) L[dofs[i]] += cw * dot(vals[off + i], Rq);
    }
  }
  return L;
}

Eigen::VectorXd project_elementwise(const DgSpace& dg, const std::function<double(int, Vec2)>& f,
                                    int quad_degree) {
  const Mesh& mesh = dg.mesh();
  const QuadRule rule = triangle_rule(quad_degree);
  const Eigen::MatrixXd vals = dg.ref_values(rule.points);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(dg.dim());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double s = std::sqrt(2.0 * mesh.area(t));
    for (int q = 0; q < rule.size(); ++q) {
      const double fw = s * rule.weights[q] * f(t, mesh.map_from_reference(t, rule.points[q]));
      for (int i = 0; i < dg.ndof_cell(); ++i) coeffs[dg.global_index(t, i)] += fw * vals(q, i);
    }
  }
  return coeffs;
}

DgVec2 project_vec_elementwise(const DgSpace& dg, const std::function<Vec2(int, Vec2)>& f,
                               int quad_degree) {
  DgVec2 out;
  out.x = project_elementwise(
      dg, [&f](int t, Vec2 p) { return f(t, p).x; }, quad_degree);
  out.y = project_elementwise(
      dg, [&f](int t, Vec2 p) { return f(t, p).y; }, quad_degree);
  return out;
}

double integrate_elementwise(const Mesh& mesh, const std::function<double(int, Vec2)>& f,
                             int quad_degree) {
  const QuadRule rule = triangle_rule(quad_degree);
  double acc = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double two_area = 2.0 * mesh.area(t);
    for (int q = 0; q < rule.size(); ++q)
      acc += two_area * rule.weights[q] * f(t, mesh.map_from_reference(t, rule.points[q]));
  }
  return acc;
}

double integrate_dg(const DgSpace& dg, const Eigen::VectorXd& f) {
  const Mesh& mesh = dg.mesh();
  double acc = 0.0;
  // The orthonormal constant mode on element t is 1/sqrt(area), so its
  // integral over the element is sqrt(area) and higher modes integrate to 0.
  for (int t = 0; t < mesh.num_triangles(); ++t)
    acc += std::sqrt(mesh.area(t)) * f[dg.global_index(t, 0)];
  return acc;
}

}  // namespace varflow
