#pragma once

#include <functional>

#include "varflow/config.hpp"
#include "varflow/geometry.hpp"
#include "varflow/mesh.hpp"
#include "varflow/physics.hpp"

namespace varflow {

/// Equation of state, background fields, and initial conditions resolved from
/// a configuration.  All callables take physical coordinates.
struct ScenarioFields {
  EquationOfState eos;
  std::function<Vec2(const Vec2&)> rotation;    // R(x); zero field when omega = 0
  std::function<double(const Vec2&)> potential; // Phi(x)
  std::function<Vec2(const Vec2&)> u0;
  std::function<double(const Vec2&)> rho0;
  std::function<double(const Vec2&)> s0;        // null when the state carries no entropy
};

/// Baseline configuration for a scenario:
///  - rotating_sw: shallow water on (-1,1)^2, omega = 1, u0 = 0,
///    rho0 = 2 + sin(pi x/2) sin(pi y/2), dt = 0.00625, T = 0.5, r = 0, RT_0.
///  - rayleigh_taylor: perfect gas (gamma = 5/3, K = C_v = 1) on
///    (0,1/4) x (0,1), Phi = -y, grid 16 x 64 (spacing 2^-6), dt = 0.01,
///    T = 1, r = 1, RT_0.  Finer grids (e.g. spacing 2^-8 via nx = 64,
///    ny = 256) can be requested in the [mesh] section; without upwinding the
///    interface contours grow noisier as the resolution increases.
///  - custom: quiescent unit-density state; intended as a template whose
///    fields callers replace programmatically.
RunConfig default_config(Scenario s);

/// Resolves the scenario's fields from the configuration (parameters such as
/// gamma, omega, or gravity are read from cfg so overrides take effect).
ScenarioFields make_scenario(const RunConfig& cfg);

/// Builds the mesh described by the [mesh] section.
Mesh make_mesh(const RunConfig& cfg);

}  // namespace varflow
