#pragma once

#include <string>

namespace varflow {

/// Default relative switch point of the discrete derivatives (see
/// EquationOfState::eps_dg).
inline constexpr double kDiscreteGradEpsDefault = 1e-5;

/// Equations of state, described through the internal-energy density
/// U(D, S) = D e(D, S/D) of mass density D and entropy density S:
///   * shallow water:  U = D^2 / 2                       (no entropy)
///   * barotropic gas: U = K D^gamma                     (no entropy)
///   * perfect gas:    U = K exp(S / (C_v D)) D^gamma
/// Pressure is D dU/dD + S dU/dS - U, which reduces to (gamma - 1) U for the
/// perfect gas and D^2/2 for shallow water.
struct EquationOfState {
  enum class Kind { ShallowWater, BarotropicGas, PerfectGas };

  Kind kind = Kind::ShallowWater;
  double gamma = 1.4;
  double K = 1.0;
  double Cv = 1.0;
  // Relative increment below which the discrete derivatives switch from the
  // secant to the analytic midpoint derivative.  The secant loses accuracy to
  // cancellation like eps/|y - x| while the midpoint branch deviates from the
  // exact chain identity like |y - x|^2, so the sound crossover sits near
  // cbrt(machine eps); 1e-10 or smaller lets cancellation noise (up to ~1e-6
  // pointwise) leak into the force evaluation and stall tight nonlinear
  // solves.
  double eps_dg = kDiscreteGradEpsDefault;

  static EquationOfState shallow_water();
  static EquationOfState barotropic_gas(double gamma, double K);
  static EquationOfState perfect_gas(double gamma, double K, double Cv);

  /// True when the energy does not depend on entropy (no S equation needed).
  bool barotropic() const { return kind != Kind::PerfectGas; }

  double U(double D, double S) const;
  double dU_dD(double D, double S) const;
  double dU_dS(double D, double S) const;
  double pressure(double D, double S) const;

  /// Discrete derivative in the density slot:
  ///   (U(y, S) - U(x, S)) / (y - x),
  /// switching to the analytic derivative at the midpoint when |y - x| is
  /// below a relative threshold. Satisfies the exact chain identity
  ///   f(x,y,S) (y - x) = U(y,S) - U(x,S).
  double discrete_dD(double x, double y, double S) const;

  /// Discrete derivative in the entropy slot: (U(D, y) - U(D, x)) / (y - x).
  double discrete_dS(double x, double y, double D) const;

  /// Entropy density with a prescribed pressure and density (perfect gas).
  double entropy_from_pressure(double D, double p) const;

  std::string name() const;
};

}  // namespace varflow
