#include "varflow/physics.hpp"

#include <cmath>
#include <stdexcept>

namespace varflow {

EquationOfState EquationOfState::shallow_water() {
  EquationOfState eos;
  eos.kind = Kind::ShallowWater;
  return eos;
}

EquationOfState EquationOfState::barotropic_gas(double gamma, double K) {
  EquationOfState eos;
  eos.kind = Kind::BarotropicGas;
  eos.gamma = gamma;
  eos.K = K;
  return eos;
}

EquationOfState EquationOfState::perfect_gas(double gamma, double K, double Cv) {
  EquationOfState eos;
  eos.kind = Kind::PerfectGas;
  eos.gamma = gamma;
  eos.K = K;
  eos.Cv = Cv;
  return eos;
}

double EquationOfState::U(double D, double S) const {
  switch (kind) {
    case Kind::ShallowWater:
      return 0.5 * D * D;
    case Kind::BarotropicGas:
      return K * std::pow(D, gamma);
    case Kind::PerfectGas:
      return K * std::exp(S / (Cv * D)) * std::pow(D, gamma);
  }
  return 0.0;
}

double EquationOfState::dU_dD(double D, double S) const {
  switch (kind) {
    case Kind::ShallowWater:
      return D;
    case Kind::BarotropicGas:
      return K * gamma * std::pow(D, gamma - 1.0);
    case Kind::PerfectGas:
      return K * std::exp(S / (Cv * D)) *
             (gamma * std::pow(D, gamma - 1.0) - S * std::pow(D, gamma - 2.0) / Cv);
  }
  return 0.0;
}

double EquationOfState::dU_dS(double D, double S) const {
  if (kind != Kind::PerfectGas) return 0.0;
  return K * std::exp(S / (Cv * D)) * std::pow(D, gamma - 1.0) / Cv;
}

double EquationOfState::pressure(double D, double S) const {
  switch (kind) {
    case Kind::ShallowWater:
      return 0.5 * D * D;
    case Kind::BarotropicGas:
      return (gamma - 1.0) * K * std::pow(D, gamma);
    case Kind::PerfectGas:
      return (gamma - 1.0) * U(D, S);
  }
  return 0.0;
}

double EquationOfState::discrete_dD(double x, double y, double S) const {
  if (x <= 0.0 || y <= 0.0)
    throw std::domain_error("discrete_dD: nonpositive density");
  if (std::abs(y - x) <= eps_dg * (std::abs(x) + std::abs(y)))
    return dU_dD(0.5 * (x + y), S);
  return (U(y, S) - U(x, S)) / (y - x);
}

double EquationOfState::discrete_dS(double x, double y, double D) const {
  if (D <= 0.0) throw std::domain_error("discrete_dS: nonpositive density");
  if (kind != Kind::PerfectGas) return 0.0;
  if (std::abs(y - x) <= eps_dg * (std::abs(x) + std::abs(y)))
    return dU_dS(D, 0.5 * (x + y));
  return (U(D, y) - U(D, x)) / (y - x);
}

double EquationOfState::entropy_from_pressure(double D, double p) const {
  if (kind != Kind::PerfectGas)
    throw std::logic_error("entropy_from_pressure: equation of state has no entropy");
  return Cv * D * std::log(p / ((gamma - 1.0) * K * std::pow(D, gamma)));
}

std::string EquationOfState::name() const {
  switch (kind) {
    case Kind::ShallowWater:
      return "shallow_water";
    case Kind::BarotropicGas:
      return "barotropic_gas";
    case Kind::PerfectGas:
      return "perfect_gas";
  }
  return "unknown";
}

}  // namespace varflow
