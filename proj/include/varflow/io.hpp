#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <string>
#include <vector>

#include "varflow/config.hpp"
#include "varflow/mesh.hpp"
#include "varflow/spaces.hpp"

namespace varflow {

class FlowSolver;
struct State;

/// Formats a double with 17 significant digits (round-trips exactly), so CSV
/// outputs are bit-identical across runs of the same build.
std::string csv_double(double v);

/// Per-step series writer for energy.csv with the fixed column set
/// t,energy,mass,entropy,iterations,residual.  Rows are flushed as written so
/// partial series survive a failed run.
class SeriesWriter {
 public:
  explicit SeriesWriter(const std::string& path);
  void row(double t, double energy, double mass, double entropy, int iterations,
           double residual);

 private:
  std::ofstream out_;
};

/// Writes a legacy-VTK ASCII unstructured grid with triangle cells and
/// cell-centered fields: density, velocity (z = 0), and, when the state
/// carries one, entropy.
void write_vtk(const std::string& path, const FlowSolver& solver, const State& state);

/// One row of errors.csv: errors for a study resolution and the observed
/// orders against the previous (coarser) row, log2(err(2h)/err(h)).
struct ErrorRow {
  double h = 0.0;
  int r = 0;
  double err_u = 0.0;
  double err_rho = 0.0;
  double order_u = 0.0;   // 0 for the first row (no coarser neighbor)
  double order_rho = 0.0;
};

void write_errors_csv(const std::string& path, const std::vector<ErrorRow>& rows);

/// Writes the resolved configuration (parseable form) to <dir>/config.ini and
/// a human-readable metadata file <dir>/metadata.txt with the quadrature
/// degrees, space dimensions, mesh quality ratios, and the velocity-embedding
/// note.  Both files are deterministic for a given configuration and build.
void write_run_metadata(const std::string& dir, const RunConfig& cfg,
                        const FlowSolver& solver);

}  // namespace varflow
