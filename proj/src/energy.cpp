#include "lowalt/energy.hpp"

#include <cmath>

namespace lowalt {

namespace {

// Blade profile power at hover: (lambda/8) * rho * eta * A * omega^3 * r^3.
double blade_profile_power(const RotorParams& p) {
  return (p.lambda / 8.0) * p.rho * p.eta * p.rotor_area *
         std::pow(p.omega, 3) * std::pow(p.rotor_radius, 3);
}

double induced_power_hover(const RotorParams& p) {
  return (1.0 + p.kappa) * std::pow(p.weight_n, 1.5) /
         std::sqrt(2.0 * p.rho * p.rotor_area);
}

}  // namespace

double fly_power(double v, const RotorParams& p) {
  const double profile =
      blade_profile_power(p) * (1.0 + 3.0 * v * v / (p.u_tip * p.u_tip));
  const double parasite = 0.5 * p.d0 * p.rho * p.s * p.rotor_area * v * v * v;
  double total = profile + parasite;
  if (p.fly_with_induced) {
    const double x = v * v / (2.0 * p.v0 * p.v0);
    total += induced_power_hover(p) * std::sqrt(std::sqrt(1.0 + x * x) - x);
  }
  return total;
}

double fly_energy(double v, double seconds, const RotorParams& p) {
  return fly_power(v, p) * seconds;
}

double hover_power(const RotorParams& p) {
  if (p.hover_as_printed) {
    // Literal published form; at zero speed the square-root factor is one and
    // the drag term vanishes, leaving the weight term without the disc
    // loading denominator.
    return (1.0 + p.kappa) * std::pow(p.weight_n, 1.5);
  }
  return induced_power_hover(p);
}

double hover_energy(double seconds, const RotorParams& p) {
  return hover_power(p) * seconds;
}

double min_return_energy(double dist_la, double v_max, const RotorParams& p) {
  if (v_max <= 0.0) return 0.0;
  return fly_power(v_max, p) * (dist_la / v_max);
}

}  // namespace lowalt
