#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "varflow/physics.hpp"

using namespace varflow;

TEST_CASE("shallow water: quadratic internal energy and its derivatives") {
  const EquationOfState eos = EquationOfState::shallow_water();
  CHECK(eos.barotropic());
  CHECK(eos.U(2.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eos.U(3.0, 5.0) == doctest::Approx(4.5).epsilon(1e-15));  // entropy ignored
  CHECK(eos.dU_dD(2.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eos.pressure(3.0, 0.0) == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(eos.dU_dS(2.0, 1.0) == 0.0);
}

TEST_CASE("barotropic gas: power-law energy, frozen values") {
  const EquationOfState eos = EquationOfState::barotropic_gas(1.4, 2.0);
  CHECK(eos.barotropic());
  CHECK(eos.U(2.0, 0.0) == doctest::Approx(5.278031643091577).epsilon(1e-14));
  CHECK(eos.dU_dD(2.0, 0.0) == doctest::Approx(3.6946221501641037).epsilon(1e-14));
  // Thermodynamic pressure p = D U'(D) - U(D) = (gamma - 1) K D^gamma.
  CHECK(eos.pressure(2.0, 0.0) ==
        doctest::Approx(2.0 * eos.dU_dD(2.0, 0.0) - eos.U(2.0, 0.0)).epsilon(1e-13));
}

TEST_CASE("perfect gas: entropy-dependent energy, frozen values") {
  const EquationOfState eos = EquationOfState::perfect_gas(5.0 / 3.0, 1.0, 1.0);
  CHECK(!eos.barotropic());
  CHECK(eos.U(2.0, 0.0) == doctest::Approx(3.174802103936399).epsilon(1e-14));
  CHECK(eos.U(1.5, 0.3) == doctest::Approx(2.4007355754834565).epsilon(1e-14));
  CHECK(eos.dU_dS(1.5, 0.3) == doctest::Approx(1.6004903836556374).epsilon(1e-14));
  CHECK(eos.pressure(2.0, 0.0) == doctest::Approx(2.1165347359575994).epsilon(1e-14));
  // dU_dD against a centered finite difference.
  const double h = 1e-6;
  const double fd = (eos.U(1.5 + h, 0.3) - eos.U(1.5 - h, 0.3)) / (2.0 * h);
  CHECK(eos.dU_dD(1.5, 0.3) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("density discrete derivative: secant values and coincident limit") {
  const EquationOfState sw = EquationOfState::shallow_water();
  // (U(y) - U(x)) / (y - x) = (x + y)/2 for the quadratic law.
  CHECK(sw.discrete_dD(2.0, 2.0, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sw.discrete_dD(1.0, 3.0, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sw.discrete_dD(0.5, 2.5, 0.0) == doctest::Approx(1.5).epsilon(1e-14));

  const EquationOfState pg = EquationOfState::perfect_gas(5.0 / 3.0, 1.0, 1.0);
  CHECK(pg.discrete_dD(1.0, 2.0, 0.0) == doctest::Approx(2.174802103936399).epsilon(1e-13));
  // Near-coincident arguments fall back to the analytic midpoint derivative
  // instead of a catastrophically cancelling quotient.
  CHECK(pg.discrete_dD(1.4, 1.4, 0.2) == doctest::Approx(pg.dU_dD(1.4, 0.2)).epsilon(1e-13));
  CHECK(pg.discrete_dD(1.4, 1.4 * (1.0 + 1e-13), 0.2) ==
        doctest::Approx(pg.dU_dD(1.4, 0.2)).epsilon(1e-9));
}

TEST_CASE("discrete derivative switch point is configurable") {
  EquationOfState pg = EquationOfState::perfect_gas(1.4, 1.0, 1.0);
  // A relative increment of 1e-6 sits below the default switch point, so the
  // midpoint rule is used verbatim.
  const double x = 1.0, y = 1.0 + 2e-6;
  const double s0 = 0.3, s1 = 0.3 + 2e-7;
  CHECK(pg.discrete_dD(x, y, s0) == pg.dU_dD(0.5 * (x + y), s0));
  CHECK(pg.discrete_dS(s0, s1, x) == pg.dU_dS(x, 0.5 * (s0 + s1)));
  // Tightening the switch point reinstates the exact secant for the same pair.
  pg.eps_dg = 1e-12;
  CHECK(pg.discrete_dD(x, y, s0) == (pg.U(y, s0) - pg.U(x, s0)) / (y - x));
  CHECK(pg.discrete_dS(s0, s1, x) == (pg.U(x, s1) - pg.U(x, s0)) / (s1 - s0));
}

TEST_CASE("discrete derivatives satisfy the defining chain identities") {
  const EquationOfState pg = EquationOfState::perfect_gas(1.4, 0.7, 2.0);
  std::mt19937 gen(99u);
  std::uniform_real_distribution<double> dd(0.2, 3.0), ds(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double D0 = dd(gen), D1 = dd(gen);
    const double S0 = ds(gen), S1 = ds(gen);
    // f(x,y,S)(y-x) = U(y,S) - U(x,S)
    CHECK(pg.discrete_dD(D0, D1, S0) * (D1 - D0) ==
          doctest::Approx(pg.U(D1, S0) - pg.U(D0, S0)).epsilon(1e-12));
    // g(x,y,D)(y-x) = U(D,y) - U(D,x)
    CHECK(pg.discrete_dS(S0, S1, D0) * (S1 - S0) ==
          doctest::Approx(pg.U(D0, S1) - pg.U(D0, S0)).epsilon(1e-12));
    // Telescoping decomposition of a full energy difference: the averaged
    // partial discrete derivatives reproduce it exactly (this is the algebraic
    // identity behind discrete energy conservation).
    const double fpair = 0.5 * (pg.discrete_dD(D0, D1, S0) + pg.discrete_dD(D0, D1, S1));
    const double gpair = 0.5 * (pg.discrete_dS(S0, S1, D0) + pg.discrete_dS(S0, S1, D1));
    CHECK(fpair * (D1 - D0) + gpair * (S1 - S0) ==
          doctest::Approx(pg.U(D1, S1) - pg.U(D0, S0)).epsilon(1e-11));
  }
}

TEST_CASE("nonpositive densities are rejected with diagnostics") {
  const EquationOfState pg = EquationOfState::perfect_gas(1.4, 1.0, 1.0);
  CHECK_THROWS_AS((void)pg.discrete_dD(-1.0, 2.0, 0.0), std::domain_error);
  CHECK_THROWS_AS((void)pg.discrete_dD(1.0, 0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS((void)pg.discrete_dS(0.1, 0.2, -0.5), std::domain_error);
  const EquationOfState sw = EquationOfState::shallow_water();
  CHECK_THROWS_AS((void)sw.discrete_dD(0.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("entropy from pressure inverts the pressure law") {
  const EquationOfState pg = EquationOfState::perfect_gas(5.0 / 3.0, 1.0, 1.0);
  for (double D : {0.5, 1.0, 1.7})
    for (double p : {0.3, 1.0, 2.4}) {
      const double s = pg.entropy_from_pressure(D, p);
      CHECK(pg.pressure(D, s) == doctest::Approx(p).epsilon(1e-13));
    }
  // Zero entropy reproduces the isentropic reference pressure.
  CHECK(pg.entropy_from_pressure(2.0, pg.pressure(2.0, 0.0)) ==
        doctest::Approx(0.0).epsilon(1e-13));
  const EquationOfState sw = EquationOfState::shallow_water();
  CHECK_THROWS((void)sw.entropy_from_pressure(1.0, 1.0));
}

TEST_CASE("factories record their parameters and names") {
  const EquationOfState pg = EquationOfState::perfect_gas(1.4, 0.5, 2.5);
  CHECK(pg.gamma == 1.4);
  CHECK(pg.K == 0.5);
  CHECK(pg.Cv == 2.5);
  CHECK(pg.name() == "perfect_gas");
  CHECK(EquationOfState::shallow_water().name() == "shallow_water");
  CHECK(EquationOfState::barotropic_gas(1.4, 1.0).name() == "barotropic_gas");
}
