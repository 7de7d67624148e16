#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "varflow/config.hpp"
#include "varflow/dynamics.hpp"
#include "varflow/io.hpp"
#include "varflow/mesh.hpp"
#include "varflow/scenarios.hpp"
#include "varflow/spaces.hpp"

namespace varflow {

/// A fully constructed run: mesh, spaces, solver, and the initial state
/// resolved from a configuration.  Movable; the solver holds references into
/// the heap-allocated mesh and spaces.
struct Simulation {
  RunConfig cfg;
  ScenarioFields fields;
  std::unique_ptr<Mesh> mesh;
  std::unique_ptr<DgSpace> dg;
  std::unique_ptr<HdivSpace> vel;
  std::unique_ptr<FlowSolver> solver;
  State state;

  static Simulation create(const RunConfig& cfg);

  StepperOptions stepper_options() const;
};

/// Per-step diagnostics collected by run().
struct RunSeries {
  std::vector<double> t, energy, mass, entropy, residual;
  std::vector<int> iterations;
};

/// Advances a simulation to t_final.  When write_outputs is set, writes
/// config.ini, metadata.txt, energy.csv, and state_<k>.vtk snapshots at the
/// configured cadence into cfg.output_dir.  Stepper failures are rethrown
/// with the failing step index.  log (optional) receives progress lines.
RunSeries run(Simulation& sim, bool write_outputs, std::ostream* log = nullptr);

/// Convenience wrapper: build from config, run with outputs.
RunSeries run_simulation(const RunConfig& cfg, std::ostream* log = nullptr);

/// L2 errors between two runs' final states, integrated with the reference
/// (finer) mesh's quadrature: the reference fields are evaluated on their own
/// mesh and the study fields are sampled at the same physical points.
struct FieldErrors {
  double err_u = 0.0;
  double err_rho = 0.0;
};
FieldErrors l2_errors(const Simulation& reference, const Simulation& study);

struct ConvergenceCase {
  double h = 0.0;   // grid spacing for spatial studies, dt for temporal ones
  int r = 0;
  double err_u = 0.0, err_rho = 0.0;
  double order_u = 0.0, order_rho = 0.0;  // vs the previous (coarser) case
  double runtime_sec = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceCase> cases;
  double reference_runtime_sec = 0.0;

  std::vector<ErrorRow> rows() const;  // errors.csv form
};

/// Runs the study described by cfg's [study] section (spatial: nx_list x
/// r_list against the reference resolution; temporal: dt_list at fixed mesh
/// against reference_dt), computes errors against the reference run, writes
/// errors.csv into cfg.output_dir, and prints the report to log.  Study runs
/// may execute concurrently (see worker_count()); the report order is fixed.
ConvergenceReport convergence_study(const RunConfig& cfg, std::ostream* log = nullptr);

/// Worker-pool width for convergence studies: the VARFLOW_WORKERS environment
/// variable clamped to [1, 64]; unset or invalid values give 1 so runs are
/// deterministic by default.
int worker_count();

/// Prints mesh statistics and space dimensions for a configuration.
void mesh_info(const RunConfig& cfg, std::ostream& out);

}  // namespace varflow
