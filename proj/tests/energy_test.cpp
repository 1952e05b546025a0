#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "lowalt/energy.hpp"

using namespace lowalt;

namespace {

// Straight-line transcription of the propulsion model, kept separate from the
// production code on purpose.
double oracle_fly_power(double v) {
  const double lambda = 0.012, rho = 1.225, eta = 0.05, area = 0.503;
  const double omega = 300.0, radius = 0.4, d0 = 0.6, s = 0.05, u_tip = 120.0;
  const double profile = (lambda / 8.0) * rho * eta * area * omega * omega *
                         omega * radius * radius * radius *
                         (1.0 + 3.0 * v * v / (u_tip * u_tip));
  const double parasite = 0.5 * d0 * rho * s * area * v * v * v;
  return profile + parasite;
}

double oracle_hover_power() {
  const double kappa = 0.1, weight = 20.0, rho = 1.225, area = 0.503;
  return (1.0 + kappa) * std::sqrt(weight * weight * weight) /
         std::sqrt(2.0 * rho * area);
}

}  // namespace

TEST_CASE("flight power matches an independent transcription") {
  RotorParams p;
  for (double v : {0.0, 1.0, 2.5, 5.0, 7.3, 10.0})
    CHECK(fly_power(v, p) == doctest::Approx(oracle_fly_power(v)).epsilon(1e-12));
}

TEST_CASE("flight energy anchor values") {
  RotorParams p;
  CHECK(fly_energy(0.0, 1.0, p) == doctest::Approx(79.86).epsilon(0.0007));
  CHECK(fly_energy(10.0, 1.0, p) == doctest::Approx(90.76).epsilon(0.0007));
  CHECK(fly_energy(0.0, 1.0, p) == doctest::Approx(79.856280).epsilon(1e-8));
  CHECK(fly_energy(10.0, 1.0, p) == doctest::Approx(90.7625775).epsilon(1e-8));
  // Linear in the duration.
  CHECK(fly_energy(4.0, 2.0, p) == doctest::Approx(2.0 * fly_energy(4.0, 1.0, p)));
}

TEST_CASE("hover energy anchor values") {
  RotorParams p;
  CHECK(hover_energy(1.0, p) == doctest::Approx(oracle_hover_power()).epsilon(1e-12));
  CHECK(hover_energy(1.0, p) == doctest::Approx(88.62).epsilon(0.0007));
  CHECK(hover_energy(0.5, p) == doctest::Approx(0.5 * hover_energy(1.0, p)));
  RotorParams flat = p;
  flat.kappa = 0.0;
  CHECK(hover_energy(1.0, flat) == doctest::Approx(80.5708).epsilon(1e-4));
}

TEST_CASE("literal hover form drops the disc loading divisor") {
  RotorParams p;
  p.hover_as_printed = true;
  CHECK(hover_energy(1.0, p) == doctest::Approx(98.38699101).epsilon(1e-8));
}

TEST_CASE("induced-power flag only adds power and vanishes nowhere") {
  RotorParams p;
  RotorParams q = p;
  q.fly_with_induced = true;
  // At v=0 the induced term equals hover power; it then decays with speed.
  CHECK(fly_power(0.0, q) ==
        doctest::Approx(oracle_fly_power(0.0) + oracle_hover_power()).epsilon(1e-12));
  for (double v : {0.0, 3.0, 6.0, 10.0}) CHECK(fly_power(v, q) > fly_power(v, p));
}

TEST_CASE("flight power grows with speed") {
  RotorParams p;
  double prev = -1.0;
  for (int v = 0; v <= 10; ++v) {
    const double e = fly_power(static_cast<double>(v), p);
    CHECK(e > prev);
    prev = e;
  }
}

TEST_CASE("return-home energy floor") {
  RotorParams p;
  CHECK(min_return_energy(0.0, 10.0, p) == 0.0);
  CHECK(min_return_energy(100.0, 10.0, p) == doctest::Approx(907.625775).epsilon(1e-8));
  CHECK(min_return_energy(200.0, 10.0, p) ==
        doctest::Approx(2.0 * min_return_energy(100.0, 10.0, p)));
}

TEST_CASE("ledger accumulates and trips strictly past the budget") {
  EnergyLedger led;
  led.total = 1e6;
  led.limit = 8e5;
  CHECK(led.remaining() == 1e6);
  led.charge(90.76);
  led.charge(88.62);
  CHECK(led.used == doctest::Approx(179.38));
  CHECK_FALSE(led.over_limit());

  EnergyLedger edge;
  edge.total = 1e6;
  edge.limit = 8e5;
  edge.charge(8e5);
  CHECK_FALSE(edge.over_limit());  // exactly at the budget is still fine
  edge.charge(1e-9);
  CHECK(edge.over_limit());

  EnergyLedger idle;
  idle.charge(0.0);
  CHECK(idle.used == 0.0);
}
