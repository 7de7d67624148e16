#include "varflow/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "varflow/operators.hpp"
#include "varflow/quadrature.hpp"

namespace varflow {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Simulation Simulation::create(const RunConfig& cfg) {
  cfg.validate();
  Simulation sim;
  sim.cfg = cfg;
  sim.fields = make_scenario(cfg);
  sim.mesh = std::make_unique<Mesh>(make_mesh(cfg));
  sim.dg = std::make_unique<DgSpace>(*sim.mesh, cfg.dg_degree);
  sim.vel = std::make_unique<HdivSpace>(
      *sim.mesh, cfg.velocity_bdm ? HdivFamily::BDM : HdivFamily::RT, cfg.velocity_order);
  sim.solver = std::make_unique<FlowSolver>(*sim.dg, *sim.vel, sim.fields.eos,
                                            sim.fields.rotation, sim.fields.potential,
                                            cfg.quad_degree);
  sim.state = sim.solver->initial_state(sim.fields.u0, sim.fields.rho0, sim.fields.s0);
  return sim;
}

StepperOptions Simulation::stepper_options() const {
  StepperOptions opt;
  opt.max_picard = cfg.max_iterations;
  opt.max_newton = cfg.max_iterations;
  opt.abs_tol = cfg.abs_tol;
  opt.rel_tol = cfg.rel_tol;
  opt.picard_first = cfg.method == SolveMethod::Picard;
  opt.newton_fallback = cfg.newton_fallback;
  return opt;
}

RunSeries run(Simulation& sim, bool write_outputs, std::ostream* log) {
  namespace fs = std::filesystem;
  const RunConfig& cfg = sim.cfg;
  const int nsteps = cfg.steps();
  const StepperOptions opt = sim.stepper_options();

  std::unique_ptr<SeriesWriter> series;
  if (write_outputs) {
    write_run_metadata(cfg.output_dir, cfg, *sim.solver);
    series = std::make_unique<SeriesWriter>(
        (fs::path(cfg.output_dir) / "energy.csv").string());
    if (cfg.snapshot_every > 0)
      write_vtk((fs::path(cfg.output_dir) / "state_0.vtk").string(), *sim.solver, sim.state);
  }

  RunSeries out;
  auto record = [&](const State& s, int iters, double residual) {
    const double E = sim.solver->energy(s);
    const double m = sim.solver->mass(s);
    const double S = sim.solver->entropy(s);
    out.t.push_back(s.time);
    out.energy.push_back(E);
    out.mass.push_back(m);
    out.entropy.push_back(S);
    out.iterations.push_back(iters);
    out.residual.push_back(residual);
    if (series) series->row(s.time, E, m, S, iters, residual);
  };
  record(sim.state, 0, 0.0);

  for (int k = 1; k <= nsteps; ++k) {
    StepStats stats;
    try {
      sim.state = sim.solver->step(sim.state, cfg.dt, opt, &stats);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "run: step " << k << " of " << nsteps << " failed: " << e.what();
      throw std::runtime_error(msg.str());
    }
    record(sim.state, stats.picard_iterations, stats.final_update);
    if (write_outputs && cfg.snapshot_every > 0 &&
        (k % cfg.snapshot_every == 0 || k == nsteps)) {
      write_vtk((fs::path(cfg.output_dir) / ("state_" + std::to_string(k) + ".vtk")).string(),
                *sim.solver, sim.state);
    }
    if (log && (k % 100 == 0 || k == nsteps))
      *log << "step " << k << "/" << nsteps << "  t=" << sim.state.time
           << "  E=" << csv_double(out.energy.back()) << "\n";
  }
  return out;
}

RunSeries run_simulation(const RunConfig& cfg, std::ostream* log) {
  Simulation sim = Simulation::create(cfg);
  return run(sim, true, log);
}

FieldErrors l2_errors(const Simulation& reference, const Simulation& study) {
  const Mesh& fine = *reference.mesh;
  const Mesh& coarse = *study.mesh;
  const QuadRule rule = triangle_rule(reference.solver->physics_quad_degree());

  double eu2 = 0.0, erho2 = 0.0;
  for (int t = 0; t < fine.num_triangles(); ++t) {
    const double two_area = 2.0 * fine.area(t);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = fine.map_from_reference(t, rule.points[q]);
      const double w = rule.weights[q] * two_area;

      const Vec2 u_ref = reference.vel->eval(reference.state.u, t, x);
      const double rho_ref = reference.dg->eval(reference.state.rho, t, rule.points[q]);

      const auto found = coarse.locate(x);
      if (!found)
        throw std::runtime_error("l2_errors: quadrature point not found in the study mesh");
      const int tc = *found;
      const Vec2 u_c = study.vel->eval(study.state.u, tc, x);
      const double rho_c =
          study.dg->eval(study.state.rho, tc, coarse.map_to_reference(tc, x));

      const Vec2 du{u_ref.x - u_c.x, u_ref.y - u_c.y};
      eu2 += w * (du.x * du.x + du.y * du.y);
      const double dr = rho_ref - rho_c;
      erho2 += w * dr * dr;
    }
  }
  return {std::sqrt(eu2), std::sqrt(erho2)};
}

int worker_count() {
  const char* env = std::getenv("VARFLOW_WORKERS");
  if (!env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || n < 1) return 1;
  return static_cast<int>(n > 64 ? 64 : n);
}

namespace {

/// Runs fn(i) for i in [0, n) on `workers` threads; exceptions are captured
/// and the first one rethrown after all threads join.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  const int nthreads = std::min(workers, n);
  for (int w = 0; w < nthreads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

RunConfig with_resolution(const RunConfig& base, int nx, int r) {
  RunConfig cfg = base;
  cfg.nx = nx;
  cfg.ny = std::max(1, static_cast<int>(std::lround(
                           static_cast<double>(base.ny) / base.nx * nx)));
  cfg.dg_degree = r;
  // Spatial studies pair the velocity space with the density degree:
  // RT_r alongside degree-r densities (BDM starts at order 1).
  cfg.velocity_order = cfg.velocity_bdm ? std::max(1, r) : r;
  cfg.snapshot_every = 0;
  return cfg;
}

double spacing(const RunConfig& cfg) { return (cfg.x1 - cfg.x0) / cfg.nx; }

}  // namespace

std::vector<ErrorRow> ConvergenceReport::rows() const {
  std::vector<ErrorRow> out;
  out.reserve(cases.size());
  for (const auto& c : cases)
    out.push_back({c.h, c.r, c.err_u, c.err_rho, c.order_u, c.order_rho});
  return out;
}

ConvergenceReport convergence_study(const RunConfig& cfg, std::ostream* log) {
  namespace fs = std::filesystem;
  cfg.validate();
  ConvergenceReport report;

  struct Case {
    RunConfig cfg;
    double h = 0.0;
    int r = 0;
    FieldErrors err;
    double runtime = 0.0;
  };
  std::vector<Case> cases;

  RunConfig ref_cfg = cfg;
  ref_cfg.snapshot_every = 0;

  if (cfg.study_temporal) {
    if (cfg.study_dt.empty() || !(cfg.reference_dt > 0.0))
      throw std::invalid_argument("convergence: temporal study needs dt_list and reference_dt");
    for (double dt : cfg.study_dt) {
      if (!(dt > cfg.reference_dt))
        throw std::invalid_argument(
            "convergence: reference_dt must be smaller than every study dt");
      Case c;
      c.cfg = cfg;
      c.cfg.dt = dt;
      c.cfg.snapshot_every = 0;
      c.h = dt;
      c.r = cfg.dg_degree;
      cases.push_back(std::move(c));
    }
    ref_cfg.dt = cfg.reference_dt;
  } else {
    if (cfg.study_nx.empty() || cfg.study_r.empty() || cfg.reference_nx < 1)
      throw std::invalid_argument("convergence: spatial study needs nx_list, r_list, reference_nx");
    for (int nx : cfg.study_nx)
      if (nx >= cfg.reference_nx)
        throw std::invalid_argument(
            "convergence: reference_nx must be finer than every study resolution");
    for (int r : cfg.study_r) {
      for (int nx : cfg.study_nx) {
        Case c;
        c.cfg = with_resolution(cfg, nx, r);
        c.h = spacing(c.cfg);
        c.r = r;
        cases.push_back(std::move(c));
      }
    }
    ref_cfg = with_resolution(cfg, cfg.reference_nx, cfg.reference_r);
  }

  // Reference run first (its failure aborts the study with diagnostics).
  const auto t0 = std::chrono::steady_clock::now();
  Simulation ref = Simulation::create(ref_cfg);
  try {
    run(ref, false, nullptr);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("convergence: reference run failed: ") + e.what());
  }
  report.reference_runtime_sec = seconds_since(t0);
  if (log)
    *log << "reference run done in " << report.reference_runtime_sec << " s\n";

  parallel_for(static_cast<int>(cases.size()), worker_count(), [&](int i) {
    const auto tc = std::chrono::steady_clock::now();
    Simulation sim = Simulation::create(cases[static_cast<size_t>(i)].cfg);
    run(sim, false, nullptr);
    cases[static_cast<size_t>(i)].err = l2_errors(ref, sim);
    cases[static_cast<size_t>(i)].runtime = seconds_since(tc);
  });

  for (size_t i = 0; i < cases.size(); ++i) {
    ConvergenceCase out;
    out.h = cases[i].h;
    out.r = cases[i].r;
    out.err_u = cases[i].err.err_u;
    out.err_rho = cases[i].err.err_rho;
    out.runtime_sec = cases[i].runtime;
    const bool same_group = i > 0 && cases[i - 1].r == cases[i].r;
    if (same_group && out.err_u > 0.0 && out.err_rho > 0.0) {
      const double ratio = std::log2(cases[i - 1].h / cases[i].h);
      if (ratio > 0.0) {
        out.order_u = std::log2(cases[i - 1].err.err_u / out.err_u) / ratio;
        out.order_rho = std::log2(cases[i - 1].err.err_rho / out.err_rho) / ratio;
      }
    }
    report.cases.push_back(out);
  }

  fs::create_directories(cfg.output_dir);
  write_errors_csv((fs::path(cfg.output_dir) / "errors.csv").string(), report.rows());

  if (log) {
    *log << (cfg.study_temporal ? "dt" : "h") << "          r   err_u          err_rho        order_u  order_rho  runtime\n";
    for (const auto& c : report.cases) {
      std::ostringstream line;
      line.setf(std::ios::scientific);
      line.precision(4);
      line << c.h << "  " << c.r << "   " << c.err_u << "   " << c.err_rho << "   ";
      line.unsetf(std::ios::scientific);
      line.precision(3);
      line << c.order_u << "    " << c.order_rho << "      " << c.runtime_sec << " s";
      *log << line.str() << "\n";
    }
  }
  return report;
}

void mesh_info(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Mesh mesh = make_mesh(cfg);
  const MeshStats ms = mesh.stats();
  out << "vertices:          " << ms.num_vertices << "\n";
  out << "triangles:         " << ms.num_triangles << "\n";
  out << "edges:             " << ms.num_edges << " (" << ms.num_interior_edges
      << " interior)\n";
  out << "h_max:             " << ms.h_max << "\n";
  out << "h_min:             " << ms.h_min << "\n";
  out << "shape_regularity:  " << ms.shape_regularity << " (diameter / inradius, max)\n";
  out << "quasi_uniformity:  " << ms.quasi_uniformity << " (h_max / h_min)\n";
  out << "total_area:        " << ms.total_area << "\n";

  const DgSpace dg(mesh, cfg.dg_degree);
  const HdivSpace vel(mesh, cfg.velocity_bdm ? HdivFamily::BDM : HdivFamily::RT,
                      cfg.velocity_order);
  out << "dg dim:            " << dg.dim() << " (degree " << dg.degree() << ")\n";
  out << "velocity dim:      " << vel.dim() << " ("
      << (cfg.velocity_bdm ? "BDM_" : "RT_") << vel.order() << ")\n";
  if (!vel.contained_in_dg(dg.degree()))
    out << "warning: velocity space is not contained in the vector DG space; "
           "hat-map identities only hold after projection\n";
}

}  // namespace varflow
