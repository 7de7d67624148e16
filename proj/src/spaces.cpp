#include "varflow/spaces.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace varflow {

namespace {

std::vector<std::array<int, 2>> monomials_up_to(int degree) {
  std::vector<std::array<int, 2>> m;
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a) m.push_back({a, d - a});
  return m;
}

double mono_eval(const std::array<int, 2>& m, const Vec2& p) {
  return std::pow(p.x, m[0]) * std::pow(p.y, m[1]);
}

Vec2 mono_grad(const std::array<int, 2>& m, const Vec2& p) {
  const double gx = m[0] == 0 ? 0.0 : m[0] * std::pow(p.x, m[0] - 1) * std::pow(p.y, m[1]);
  const double gy = m[1] == 0 ? 0.0 : m[1] * std::pow(p.x, m[0]) * std::pow(p.y, m[1] - 1);
  return {gx, gy};
}

}  // namespace

double legendre01(int j, double s) {
  // Legendre on [0,1]: P_j(2s-1) via the three-term recurrence.
  const double t = 2.0 * s - 1.0;
  double p0 = 1.0;
  if (j == 0) return p0;
  double p1 = t;
  for (int n = 1; n < j; ++n) {
    const double p2 = ((2.0 * n + 1.0) * t * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// ---------------------------------------------------------------------------
// DgSpace
// ---------------------------------------------------------------------------

DgSpace::DgSpace(const Mesh& mesh, int degree) : mesh_(&mesh), degree_(degree) {
  if (degree < 0) throw std::invalid_argument("DgSpace: degree must be >= 0");
  monomials_ = monomials_up_to(degree);
  npc_ = static_cast<int>(monomials_.size());

  // Orthonormalize the monomial basis against the exact reference Gram
  // matrix; rows of L^{-1} are the orthonormal basis coefficients.
  Eigen::MatrixXd gram(npc_, npc_);
  for (int i = 0; i < npc_; ++i)
    for (int j = 0; j < npc_; ++j)
      gram(i, j) = reference_triangle_monomial_integral(monomials_[i][0] + monomials_[j][0],
                                                        monomials_[i][1] + monomials_[j][1]);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw std::runtime_error("DgSpace: Gram Cholesky failed");
  Eigen::MatrixXd L = llt.matrixL();
  basis_coef_ = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(npc_, npc_));

  scale_.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) scale_[t] = 1.0 / std::sqrt(2.0 * mesh.area(t));
}

Eigen::MatrixXd DgSpace::ref_values(const std::vector<Vec2>& ref_pts) const {
  const int np = static_cast<int>(ref_pts.size());
  Eigen::MatrixXd mono(np, npc_);
  for (int q = 0; q < np; ++q)
    for (int m = 0; m < npc_; ++m) mono(q, m) = mono_eval(monomials_[m], ref_pts[q]);
  return mono * basis_coef_.transpose();
}

void DgSpace::ref_gradients(const std::vector<Vec2>& ref_pts, Eigen::MatrixXd& dxi,
                            Eigen::MatrixXd& deta) const {
  const int np = static_cast<int>(ref_pts.size());
  Eigen::MatrixXd mx(np, npc_), my(np, npc_);
  for (int q = 0; q < np; ++q)
    for (int m = 0; m < npc_; ++m) {
      const Vec2 g = mono_grad(monomials_[m], ref_pts[q]);
      mx(q, m) = g.x;
      my(q, m) = g.y;
    }
  dxi = mx * basis_coef_.transpose();
  deta = my * basis_coef_.transpose();
}

double DgSpace::eval(const Eigen::VectorXd& coeffs, int t, const Vec2& ref) const {
  double acc = 0.0;
  for (int i = 0; i < npc_; ++i) {
    double phi = 0.0;
    for (int m = 0; m < npc_; ++m) phi += basis_coef_(i, m) * mono_eval(monomials_[m], ref);
    acc += coeffs[global_index(t, i)] * phi;
  }
  return acc * scale_[t];
}

Vec2 DgSpace::eval_gradient(const Eigen::VectorXd& coeffs, int t, const Vec2& ref) const {
  Vec2 gref{0.0, 0.0};
  for (int i = 0; i < npc_; ++i) {
    Vec2 gi{0.0, 0.0};
    for (int m = 0; m < npc_; ++m) {
      const Vec2 g = mono_grad(monomials_[m], ref);
      gi += g * basis_coef_(i, m);
    }
    gref += gi * coeffs[global_index(t, i)];
  }
  // Chain rule through the affine map: grad_x = J^{-T} grad_ref.
  const Mat2 jinvT = mesh_->jacobian(t).inverse().transpose();
  return jinvT.apply(gref) * scale_[t];
}

Eigen::VectorXd DgSpace::project(const std::function<double(Vec2)>& f, int quad_degree) const {
  const QuadRule rule = triangle_rule(quad_degree);
  Eigen::MatrixXd vals = ref_values(rule.points);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(dim());
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    // <f, phi_i>_K = sqrt(2|K|) * sum_q w_q f(x_q) phihat_i(q).
    const double s = std::sqrt(2.0 * mesh_->area(t));
    for (int q = 0; q < rule.size(); ++q) {
      const double fw = s * rule.weights[q] * f(mesh_->map_from_reference(t, rule.points[q]));
      for (int i = 0; i < npc_; ++i) coeffs[global_index(t, i)] += fw * vals(q, i);
    }
  }
  return coeffs;
}

DgVec2 project_vec(const DgSpace& dg, const std::function<Vec2(Vec2)>& f, int quad_degree) {
  DgVec2 out;
  out.x = dg.project([&](Vec2 p) { return f(p).x; }, quad_degree);
  out.y = dg.project([&](Vec2 p) { return f(p).y; }, quad_degree);
  return out;
}

// ---------------------------------------------------------------------------
// HdivSpace
// ---------------------------------------------------------------------------

HdivSpace::HdivSpace(const Mesh& mesh, HdivFamily family, int order)
    : mesh_(&mesh), family_(family), order_(order) {
  if (order < 0) throw std::invalid_argument("HdivSpace: order must be >= 0");
  if (family == HdivFamily::BDM && order < 1)
    throw std::invalid_argument("HdivSpace: BDM requires order >= 1");

  const int k = order;
  mono_k_ = monomials_up_to(k);
  mono_km1_ = k >= 1 ? monomials_up_to(k - 1) : std::vector<std::array<int, 2>>{};
  for (int i = 0; i < static_cast<int>(mono_k_.size()); ++i)
    if (mono_k_[i][0] + mono_k_[i][1] == k) homog_k_.push_back(i);

  const int nk = static_cast<int>(mono_k_.size());
  if (family == HdivFamily::RT) {
    nraw_ = 2 * nk + (k + 1);
    n_int_ = 2 * static_cast<int>(mono_km1_.size());  // k(k+1)
  } else {
    nraw_ = 2 * nk;
    n_int_ = (k + 1) * (k + 2) - 3 * (k + 1);  // (k+1)(k-1)
  }
  nloc_ = 3 * (k + 1) + n_int_;
  if (nloc_ != nraw_) throw std::logic_error("HdivSpace: DOF / dimension mismatch");

  // Global numbering: interior-edge blocks first (edge id order), element
  // interior blocks after.
  edge_dof_base_.assign(mesh.num_edges(), -1);
  int next = 0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.edge(e).is_boundary()) {
      edge_dof_base_[e] = next;
      next += k + 1;
    }
  }
  elem_dof_base_ = next;
  dim_ = next + n_int_ * mesh.num_triangles();

  center_.resize(mesh.num_triangles());
  hscale_.resize(mesh.num_triangles());
  coef_.resize(mesh.num_triangles());
  cell_dofs_.resize(mesh.num_triangles());
  interior_funcs_.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) build_element(t);
}

Vec2 HdivSpace::raw_value(int t, int field, const Vec2& phys) const {
  const Vec2 xt = (phys - center_[t]) / hscale_[t];
  const int nk = static_cast<int>(mono_k_.size());
  if (field < nk) return {mono_eval(mono_k_[field], xt), 0.0};
  if (field < 2 * nk) return {0.0, mono_eval(mono_k_[field - nk], xt)};
  const double q = mono_eval(mono_k_[homog_k_[field - 2 * nk]], xt);
  return xt * q;
}

Mat2 HdivSpace::raw_gradient(int t, int field, const Vec2& phys) const {
  const double h = hscale_[t];
  const Vec2 xt = (phys - center_[t]) / h;
  const int nk = static_cast<int>(mono_k_.size());
  Mat2 g;
  if (field < nk) {
    const Vec2 dm = mono_grad(mono_k_[field], xt) / h;
    g.a00 = dm.x;
    g.a01 = dm.y;
  } else if (field < 2 * nk) {
    const Vec2 dm = mono_grad(mono_k_[field - nk], xt) / h;
    g.a10 = dm.x;
    g.a11 = dm.y;
  } else {
    const auto& m = mono_k_[homog_k_[field - 2 * nk]];
    const double q = mono_eval(m, xt);
    const Vec2 dq = mono_grad(m, xt);
    // u = xt q(xt): du_c/dx_d = (delta_cd q + xt_c dq_d) / h.
    g.a00 = (q + xt.x * dq.x) / h;
    g.a01 = xt.x * dq.y / h;
    g.a10 = xt.y * dq.x / h;
    g.a11 = (q + xt.y * dq.y) / h;
  }
  return g;
}

double HdivSpace::raw_divergence(int t, int field, const Vec2& phys) const {
  const double h = hscale_[t];
  const Vec2 xt = (phys - center_[t]) / h;
  const int nk = static_cast<int>(mono_k_.size());
  if (field < nk) return mono_grad(mono_k_[field], xt).x / h;
  if (field < 2 * nk) return mono_grad(mono_k_[field - nk], xt).y / h;
  // div(xt q) = (2 + k) q for q homogeneous of degree k.
  const double q = mono_eval(mono_k_[homog_k_[field - 2 * nk]], xt);
  return (2.0 + order_) * q / h;
}

void HdivSpace::build_element(int t) {
  const int k = order_;
  center_[t] = mesh_->barycenter(t);
  hscale_[t] = mesh_->diameter(t);

  const EdgeRule erule = edge_rule(std::min(2 * k + 2, kMaxQuadDegree));
  const QuadRule vrule = triangle_rule(std::max(2 * k, 0));
  std::vector<Vec2> vqp(vrule.size());
  for (int q = 0; q < vrule.size(); ++q) vqp[q] = mesh_->map_from_reference(t, vrule.points[q]);

  // Edge rows of the DOF Vandermonde.
  Eigen::MatrixXd V(nloc_, nraw_);
  int row = 0;
  for (int le = 0; le < 3; ++le) {
    const Edge& e = mesh_->edge(mesh_->tri_edges(t)[le]);
    const Vec2 &va = mesh_->vertex(e.v[0]), &vb = mesh_->vertex(e.v[1]);
    for (int j = 0; j <= k; ++j, ++row) {
      for (int f = 0; f < nraw_; ++f) {
        double acc = 0.0;
        for (int q = 0; q < erule.size(); ++q) {
          const double s = erule.points[q];
          const Vec2 x = va + (vb - va) * s;
          acc += erule.weights[q] * dot(raw_value(t, f, x), e.normal) * legendre01(j, s);
        }
        V(row, f) = acc;
      }
    }
  }

  // Interior rows: moments against (m, 0) / (0, m) for m of degree <= k-1.
  auto interior_row = [&](const InteriorFunctional& fun, Eigen::VectorXd& out) {
    out.resize(nraw_);
    for (int f = 0; f < nraw_; ++f) {
      double acc = 0.0;
      for (int q = 0; q < vrule.size(); ++q) {
        const Vec2 xt = (vqp[q] - center_[t]) / hscale_[t];
        const Vec2 u = raw_value(t, f, vqp[q]);
        const double m = mono_eval(mono_km1_[fun.mono], xt);
        acc += 2.0 * vrule.weights[q] * (fun.comp == 0 ? u.x : u.y) * m;
      }
      out[f] = acc;  // (1/|K|) integral: 2 w_ref |K| / |K|
    }
  };

  std::vector<InteriorFunctional> candidates;
  for (int m = 0; m < static_cast<int>(mono_km1_.size()); ++m)
    for (int c = 0; c < 2; ++c) candidates.push_back({m, c});

  auto& chosen = interior_funcs_[t];
  chosen.clear();
  if (family_ == HdivFamily::RT) {
    for (const auto& cand : candidates) {
      Eigen::VectorXd r;
      interior_row(cand, r);
      V.row(row++) = r;
      chosen.push_back(cand);
    }
  } else if (n_int_ > 0) {
    // BDM: the full candidate set is redundant against the edge rows; keep a
    // deterministic independent subset via Gram-Schmidt over the row space.
    Eigen::MatrixXd Q(nloc_, nraw_);
    int nq = 0;
    auto push_q = [&](Eigen::VectorXd v) -> bool {
      for (int i = 0; i < nq; ++i) v -= Q.row(i).dot(v) * Q.row(i).transpose();
      const double nrm = v.norm();
      if (nrm < 1e-10) return false;
      Q.row(nq++) = v / nrm;
      return true;
    };
    for (int i = 0; i < row; ++i) push_q(V.row(i));
    for (const auto& cand : candidates) {
      if (static_cast<int>(chosen.size()) == n_int_) break;
      Eigen::VectorXd r;
      interior_row(cand, r);
      if (push_q(r)) {
        V.row(row++) = r;
        chosen.push_back(cand);
      }
    }
    if (static_cast<int>(chosen.size()) != n_int_)
      throw std::runtime_error("HdivSpace: could not complete BDM interior DOFs");
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  if (!lu.isInvertible())
    throw std::runtime_error("HdivSpace: singular DOF Vandermonde on element " + std::to_string(t));
  coef_[t] = lu.inverse().transpose();

  // Local -> global map in the same local ordering as the rows above.
  auto& dofs = cell_dofs_[t];
  dofs.assign(nloc_, -1);
  int l = 0;
  for (int le = 0; le < 3; ++le) {
    const int eid = mesh_->tri_edges(t)[le];
    const int base = edge_dof_base_[eid];
    for (int j = 0; j <= k; ++j, ++l) dofs[l] = base < 0 ? -1 : base + j;
  }
  for (int i = 0; i < n_int_; ++i, ++l) dofs[l] = elem_dof_base_ + t * n_int_ + i;
}

void HdivSpace::basis_values(int t, const std::vector<Vec2>& phys, std::vector<Vec2>& out) const {
  const int np = static_cast<int>(phys.size());
  out.assign(static_cast<size_t>(np) * nloc_, Vec2{});
  std::vector<Vec2> raw(nraw_);
  for (int q = 0; q < np; ++q) {
    for (int f = 0; f < nraw_; ++f) raw[f] = raw_value(t, f, phys[q]);
    for (int i = 0; i < nloc_; ++i) {
      Vec2 acc{0.0, 0.0};
      for (int f = 0; f < nraw_; ++f) acc += raw[f] * coef_[t](i, f);
      out[static_cast<size_t>(q) * nloc_ + i] = acc;
    }
  }
}

void HdivSpace::basis_gradients(int t, const std::vector<Vec2>& phys,
                                std::vector<Mat2>& out) const {
  const int np = static_cast<int>(phys.size());
  out.assign(static_cast<size_t>(np) * nloc_, Mat2{});
  std::vector<Mat2> raw(nraw_);
  for (int q = 0; q < np; ++q) {
    for (int f = 0; f < nraw_; ++f) raw[f] = raw_gradient(t, f, phys[q]);
    for (int i = 0; i < nloc_; ++i) {
      Mat2 acc;
      for (int f = 0; f < nraw_; ++f) {
        const double c = coef_[t](i, f);
        acc.a00 += c * raw[f].a00;
        acc.a01 += c * raw[f].a01;
        acc.a10 += c * raw[f].a10;
        acc.a11 += c * raw[f].a11;
      }
      out[static_cast<size_t>(q) * nloc_ + i] = acc;
    }
  }
}

void HdivSpace::basis_divergences(int t, const std::vector<Vec2>& phys,
                                  std::vector<double>& out) const {
  const int np = static_cast<int>(phys.size());
  out.assign(static_cast<size_t>(np) * nloc_, 0.0);
  std::vector<double> raw(nraw_);
  for (int q = 0; q < np; ++q) {
    for (int f = 0; f < nraw_; ++f) raw[f] = raw_divergence(t, f, phys[q]);
    for (int i = 0; i < nloc_; ++i) {
      double acc = 0.0;
      for (int f = 0; f < nraw_; ++f) acc += coef_[t](i, f) * raw[f];
      out[static_cast<size_t>(q) * nloc_ + i] = acc;
    }
  }
}

Vec2 HdivSpace::eval(const Eigen::VectorXd& coeffs, int t, const Vec2& phys) const {
  Vec2 acc{0.0, 0.0};
  const auto& dofs = cell_dofs_[t];
  for (int i = 0; i < nloc_; ++i) {
    if (dofs[i] < 0) continue;
    const double c = coeffs[dofs[i]];
    if (c == 0.0) continue;
    for (int f = 0; f < nraw_; ++f) acc += raw_value(t, f, phys) * (coef_[t](i, f) * c);
  }
  return acc;
}

Mat2 HdivSpace::eval_gradient(const Eigen::VectorXd& coeffs, int t, const Vec2& phys) const {
  Mat2 acc;
  const auto& dofs = cell_dofs_[t];
  for (int f = 0; f < nraw_; ++f) {
    double c = 0.0;
    for (int i = 0; i < nloc_; ++i)
      if (dofs[i] >= 0) c += coeffs[dofs[i]] * coef_[t](i, f);
    if (c == 0.0) continue;
    const Mat2 g = raw_gradient(t, f, phys);
    acc.a00 += c * g.a00;
    acc.a01 += c * g.a01;
    acc.a10 += c * g.a10;
    acc.a11 += c * g.a11;
  }
  return acc;
}

double HdivSpace::eval_divergence(const Eigen::VectorXd& coeffs, int t, const Vec2& phys) const {
  double acc = 0.0;
  const auto& dofs = cell_dofs_[t];
  for (int f = 0; f < nraw_; ++f) {
    double c = 0.0;
    for (int i = 0; i < nloc_; ++i)
      if (dofs[i] >= 0) c += coeffs[dofs[i]] * coef_[t](i, f);
    acc += c * raw_divergence(t, f, phys);
  }
  return acc;
}

double HdivSpace::edge_moment(const std::function<Vec2(int, Vec2)>& u, const Edge& e, int j,
                              const EdgeRule& rule) const {
  const Vec2 &va = mesh_->vertex(e.v[0]), &vb = mesh_->vertex(e.v[1]);
  double acc = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const double s = rule.points[q];
    const Vec2 x = va + (vb - va) * s;
    acc += rule.weights[q] * dot(u(e.minus, x), e.normal) * legendre01(j, s);
  }
  return acc;
}

double HdivSpace::interior_moment(const std::function<Vec2(int, Vec2)>& u, int t,
                                  const InteriorFunctional& f, const QuadRule& rule,
                                  const std::vector<Vec2>& phys) const {
  double acc = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const Vec2 xt = (phys[q] - center_[t]) / hscale_[t];
    const Vec2 val = u(t, phys[q]);
    acc += 2.0 * rule.weights[q] * (f.comp == 0 ? val.x : val.y) * mono_eval(mono_km1_[f.mono], xt);
  }
  return acc;
}

Eigen::VectorXd HdivSpace::interpolate(const std::function<Vec2(int, Vec2)>& u,
                                       int edge_quad_degree, int vol_quad_degree) const {
  const EdgeRule erule = edge_rule(edge_quad_degree);
  const QuadRule vrule = triangle_rule(vol_quad_degree);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(dim_);

  for (int e = 0; e < mesh_->num_edges(); ++e) {
    const int base = edge_dof_base_[e];
    if (base < 0) continue;
    for (int j = 0; j <= order_; ++j)
      coeffs[base + j] = edge_moment(u, mesh_->edge(e), j, erule);
  }
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    if (n_int_ == 0) break;
    std::vector<Vec2> phys(vrule.size());
    for (int q = 0; q < vrule.size(); ++q) phys[q] = mesh_->map_from_reference(t, vrule.points[q]);
    for (int i = 0; i < n_int_; ++i)
      coeffs[elem_dof_base_ + t * n_int_ + i] =
          interior_moment(u, t, interior_funcs_[t][i], vrule, phys);
  }
  return coeffs;
}

Eigen::VectorXd HdivSpace::interpolate(const std::function<Vec2(Vec2)>& u, int edge_quad_degree,
                                       int vol_quad_degree) const {
  return interpolate([&u](int, Vec2 x) { return u(x); }, edge_quad_degree, vol_quad_degree);
}

double HdivSpace::interpolation_moment_residual(const std::function<Vec2(int, Vec2)>& u,
                                                const Eigen::VectorXd& coeffs,
                                                int edge_quad_degree, int vol_quad_degree) const {
  auto diff = [&](int t, Vec2 x) { return u(t, x) - eval(coeffs, t, x); };
  const Eigen::VectorXd moments = interpolate(diff, edge_quad_degree, vol_quad_degree);
  return moments.size() ? moments.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace varflow
