#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "varflow/physics.hpp"

namespace varflow {

enum class Scenario { RotatingShallowWater, RayleighTaylor, Custom };
enum class MeshKind { Rectangle, Equilateral, File };
enum class EosChoice { ShallowWater, BarotropicGas, PerfectGas };
enum class PotentialChoice { None, GravityY };  // GravityY: Phi = gravity * y
enum class SolveMethod { Picard, NewtonFd };

/// Full description of a run: scenario, mesh, spaces, physics, time stepping,
/// solver options, and outputs.  The textual form is a sectioned key = value
/// file; parse() and save() round-trip losslessly (doubles are written with
/// 17 significant digits).
///
/// Invariants checked by validate(): dt > 0, t_final >= dt, polynomial
/// orders >= 0, positive tolerances, BDM order >= 1.
struct RunConfig {
  // [scenario]
  Scenario scenario = Scenario::RotatingShallowWater;

  // [mesh]
  MeshKind mesh_kind = MeshKind::Rectangle;
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  int nx = 8, ny = 8;
  std::string mesh_file;  // used when mesh_kind == File

  // [spaces]
  int dg_degree = 0;             // r
  bool velocity_bdm = false;     // false: RT family, true: BDM family
  int velocity_order = 0;        // k

  // [physics]
  EosChoice eos = EosChoice::ShallowWater;
  double gamma = 1.4;
  double eos_K = 1.0;
  double heat_capacity = 1.0;    // C_v
  double omega = 0.0;            // rotation R = omega * (-y, x)
  PotentialChoice potential = PotentialChoice::None;
  double gravity = 0.0;          // Phi = gravity * y when potential = gravity_y
  int quad_degree = 0;           // physics rule override; 0 = automatic

  // [time]
  double dt = 0.00625;
  double t_final = 0.5;

  // [solver]
  SolveMethod method = SolveMethod::Picard;
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_iterations = 50;
  bool newton_fallback = true;
  double eps_dg = kDiscreteGradEpsDefault;  // discrete-derivative switch point

  // [output]
  std::string output_dir = "out";
  int snapshot_every = 0;        // VTK snapshot cadence in steps; 0 = none

  // [study] (consumed by convergence_study; ignored by plain runs)
  bool study_temporal = false;   // kind = spatial | temporal
  std::vector<int> study_nx;     // spatial resolutions (nx; ny scales with it)
  std::vector<int> study_r;      // DG degrees paired with each spatial run
  std::vector<double> study_dt;  // step sizes for temporal studies
  int reference_nx = 0;          // spatial reference resolution (0 = unset)
  int reference_r = 0;
  double reference_dt = 0.0;     // temporal reference step (0 = unset)

  /// Number of steps implied by dt and t_final (rounded to nearest).
  int steps() const;

  /// Throws std::invalid_argument with a message naming the offending key.
  void validate() const;

  /// Serialized sectioned key = value form; parse(save()) reproduces every
  /// field exactly.
  std::string save() const;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  void save_file(const std::string& path) const;
};

std::string to_string(Scenario s);
std::string to_string(MeshKind k);
std::string to_string(EosChoice e);
std::string to_string(PotentialChoice p);
std::string to_string(SolveMethod m);

}  // namespace varflow
