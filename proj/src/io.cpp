#include "varflow/io.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "varflow/dynamics.hpp"

namespace varflow {

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SeriesWriter::SeriesWriter(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("io: cannot write " + path);
  out_ << "t,energy,mass,entropy,iterations,residual\n";
}

void SeriesWriter::row(double t, double energy, double mass, double entropy,
                       int iterations, double residual) {
  out_ << csv_double(t) << ',' << csv_double(energy) << ',' << csv_double(mass)
       << ',' << csv_double(entropy) << ',' << iterations << ','
       << csv_double(residual) << '\n';
  out_.flush();
}

void write_vtk(const std::string& path, const FlowSolver& solver, const State& state) {
  const Mesh& mesh = solver.dg().mesh();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("io: cannot write " + path);

  out << "# vtk DataFile Version 3.0\n";
  out << "varflow state t=" << csv_double(state.time) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2 p = mesh.vertex(v);
    out << csv_double(p.x) << ' ' << csv_double(p.y) << " 0\n";
  }

  const int nt = mesh.num_triangles();
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangle(t);
    out << "3 " << tri.v[0] << ' ' << tri.v[1] << ' ' << tri.v[2] << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) out << "5\n";

  const DgSpace& dg = solver.dg();
  const HdivSpace& vel = solver.velocity_space();
  const bool has_entropy = state.S.size() > 0;

  const Vec2 ref_center{1.0 / 3.0, 1.0 / 3.0};
  out << "CELL_DATA " << nt << '\n';
  out << "SCALARS density double 1\nLOOKUP_TABLE default\n";
  for (int t = 0; t < nt; ++t)
    out << csv_double(dg.eval(state.rho, t, ref_center)) << '\n';
  if (has_entropy) {
    out << "SCALARS entropy double 1\nLOOKUP_TABLE default\n";
    for (int t = 0; t < nt; ++t)
      out << csv_double(dg.eval(state.S, t, ref_center)) << '\n';
  }
  out << "VECTORS velocity double\n";
  for (int t = 0; t < nt; ++t) {
    const Vec2 u = vel.eval(state.u, t, mesh.barycenter(t));
    out << csv_double(u.x) << ' ' << csv_double(u.y) << " 0\n";
  }
}

void write_errors_csv(const std::string& path, const std::vector<ErrorRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("io: cannot write " + path);
  out << "h,r,err_u,err_rho,order_u,order_rho\n";
  for (const auto& row : rows) {
    out << csv_double(row.h) << ',' << row.r << ',' << csv_double(row.err_u)
        << ',' << csv_double(row.err_rho) << ',' << csv_double(row.order_u)
        << ',' << csv_double(row.order_rho) << '\n';
  }
}

void write_run_metadata(const std::string& dir, const RunConfig& cfg,
                        const FlowSolver& solver) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::ofstream ini(fs::path(dir) / "config.ini");
  if (!ini) throw std::runtime_error("io: cannot write config.ini in " + dir);
  ini << cfg.save();

  std::ofstream meta(fs::path(dir) / "metadata.txt");
  if (!meta) throw std::runtime_error("io: cannot write metadata.txt in " + dir);

  const DgSpace& dg = solver.dg();
  const HdivSpace& vel = solver.velocity_space();
  const MeshStats ms = dg.mesh().stats();

  meta << "[quadrature]\n";
  meta << "physics_degree = " << solver.physics_quad_degree() << "\n";
  meta << "advection_volume_degree = " << solver.advection_quadrature().volume_degree << "\n";
  meta << "advection_edge_degree = " << solver.advection_quadrature().edge_degree << "\n";
  meta << "curl_form_volume_degree = " << solver.ah_quadrature().volume_degree << "\n";
  meta << "curl_form_edge_degree = " << solver.ah_quadrature().edge_degree << "\n";
  meta << "\n[spaces]\n";
  meta << "dg_degree = " << dg.degree() << "\n";
  meta << "dg_dim = " << dg.dim() << "\n";
  meta << "velocity_family = " << (vel.family() == HdivFamily::RT ? "RT" : "BDM") << "\n";
  meta << "velocity_order = " << vel.order() << "\n";
  meta << "velocity_dim = " << vel.dim() << "\n";
  meta << "velocity_in_dg_pair = " << (vel.contained_in_dg(dg.degree()) ? "true" : "false")
       << "\n";
  if (!vel.contained_in_dg(dg.degree()))
    meta << "# warning: the velocity space is not contained in the vector DG space;\n"
            "# operator identities that rely on that embedding degrade to projections\n";
  meta << "\n[mesh]\n";
  meta << "vertices = " << ms.num_vertices << "\n";
  meta << "triangles = " << ms.num_triangles << "\n";
  meta << "edges = " << ms.num_edges << "\n";
  meta << "interior_edges = " << ms.num_interior_edges << "\n";
  meta << "h_max = " << csv_double(ms.h_max) << "\n";
  meta << "h_min = " << csv_double(ms.h_min) << "\n";
  meta << "shape_regularity = " << csv_double(ms.shape_regularity) << "\n";
  meta << "quasi_uniformity = " << csv_double(ms.quasi_uniformity) << "\n";
  meta << "total_area = " << csv_double(ms.total_area) << "\n";
}

}  // namespace varflow
