#include "varflow/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace varflow {

RunConfig default_config(Scenario s) {
  RunConfig cfg;
  cfg.scenario = s;
  switch (s) {
    case Scenario::RotatingShallowWater:
      cfg.x0 = -1.0; cfg.x1 = 1.0; cfg.y0 = -1.0; cfg.y1 = 1.0;
      cfg.nx = 8; cfg.ny = 8;
      cfg.dg_degree = 0;
      cfg.velocity_order = 0;
      cfg.eos = EosChoice::ShallowWater;
      cfg.omega = 1.0;
      cfg.potential = PotentialChoice::None;
      cfg.dt = 0.00625;
      cfg.t_final = 0.5;
      cfg.study_nx = {4, 8, 16};
      cfg.study_r = {0, 1};
      cfg.reference_nx = 32;
      cfg.reference_r = 1;
      cfg.study_dt = {0.05, 0.025, 0.0125};
      cfg.reference_dt = 0.00625;
      break;
    case Scenario::RayleighTaylor:
      cfg.x0 = 0.0; cfg.x1 = 0.25; cfg.y0 = 0.0; cfg.y1 = 1.0;
      cfg.nx = 16; cfg.ny = 64;  // grid spacing 2^-6
      cfg.dg_degree = 1;
      cfg.velocity_order = 0;
      cfg.eos = EosChoice::PerfectGas;
      cfg.gamma = 5.0 / 3.0;
      cfg.eos_K = 1.0;
      cfg.heat_capacity = 1.0;
      cfg.omega = 0.0;
      cfg.potential = PotentialChoice::GravityY;
      cfg.gravity = -1.0;  // Phi = -y
      cfg.dt = 0.01;
      cfg.t_final = 1.0;
      break;
    case Scenario::Custom:
      break;
  }
  return cfg;
}

namespace {

EquationOfState eos_from_config(const RunConfig& cfg) {
  EquationOfState eos;
  switch (cfg.eos) {
    case EosChoice::ShallowWater:
      eos = EquationOfState::shallow_water();
      break;
    case EosChoice::BarotropicGas:
      eos = EquationOfState::barotropic_gas(cfg.gamma, cfg.eos_K);
      break;
    case EosChoice::PerfectGas:
      eos = EquationOfState::perfect_gas(cfg.gamma, cfg.eos_K, cfg.heat_capacity);
      break;
    default:
      throw std::invalid_argument("scenario: unknown equation of state");
  }
  eos.eps_dg = cfg.eps_dg;
  return eos;
}

ScenarioFields base_fields(const RunConfig& cfg) {
  ScenarioFields f;
  f.eos = eos_from_config(cfg);
  const double omega = cfg.omega;
  f.rotation = [omega](const Vec2& x) { return Vec2{-omega * x.y, omega * x.x}; };
  if (cfg.potential == PotentialChoice::GravityY) {
    const double g = cfg.gravity;
    f.potential = [g](const Vec2& x) { return g * x.y; };
  } else {
    f.potential = [](const Vec2&) { return 0.0; };
  }
  return f;
}

}  // namespace

ScenarioFields make_scenario(const RunConfig& cfg) {
  ScenarioFields f = base_fields(cfg);
  switch (cfg.scenario) {
    case Scenario::RotatingShallowWater: {
      f.u0 = [](const Vec2&) { return Vec2{0.0, 0.0}; };
      f.rho0 = [](const Vec2& x) {
        return 2.0 + std::sin(0.5 * M_PI * x.x) * std::sin(0.5 * M_PI * x.y);
      };
      break;
    }
    case Scenario::RayleighTaylor: {
      const EquationOfState eos = f.eos;
      auto rho = [](double y) { return 1.5 - 0.5 * std::tanh((y - 0.5) / 0.02); };
      auto pressure = [](double y) {
        return 1.5 * y + 1.25 + (0.25 - 0.5 * y) * std::tanh((y - 0.5) / 0.02);
      };
      const double gamma = eos.gamma;
      f.rho0 = [rho](const Vec2& x) { return rho(x.y); };
      f.u0 = [rho, pressure, gamma](const Vec2& x) {
        const double r = rho(x.y), p = pressure(x.y);
        const double vy = -0.025 * std::sqrt(gamma * p / r) *
                          std::cos(8.0 * M_PI * x.x) *
                          std::exp(-(x.y - 0.5) * (x.y - 0.5) / 0.09);
        return Vec2{0.0, vy};
      };
      f.s0 = [rho, pressure, eos](const Vec2& x) {
        return eos.entropy_from_pressure(rho(x.y), pressure(x.y));
      };
      break;
    }
    case Scenario::Custom: {
      f.u0 = [](const Vec2&) { return Vec2{0.0, 0.0}; };
      f.rho0 = [](const Vec2&) { return 1.0; };
      if (f.eos.kind == EquationOfState::Kind::PerfectGas)
        f.s0 = [](const Vec2&) { return 0.0; };
      break;
    }
  }
  if (f.eos.kind != EquationOfState::Kind::PerfectGas) f.s0 = nullptr;
  return f;
}

Mesh make_mesh(const RunConfig& cfg) {
  switch (cfg.mesh_kind) {
    case MeshKind::Rectangle:
      return Mesh::uniform_rectangle(cfg.x0, cfg.y0, cfg.x1, cfg.y1, cfg.nx, cfg.ny);
    case MeshKind::Equilateral:
      return Mesh::equilateral_patch(cfg.nx, cfg.ny, (cfg.x1 - cfg.x0) / cfg.nx);
    case MeshKind::File:
      return Mesh::from_text_file(cfg.mesh_file);
  }
  throw std::invalid_argument("scenario: unknown mesh kind");
}

}  // namespace varflow
