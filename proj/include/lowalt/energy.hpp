#pragma once

namespace lowalt {

// Rotary-wing power model constants. The two flags switch in the literal
// textbook variants kept for comparison runs; defaults use the forms the
// simulator was validated against.
struct RotorParams {
  double lambda{0.012};      // profile drag coefficient
  double rho{1.225};         // air density, kg/m^3
  double eta{0.05};          // rotor solidity
  double s{0.05};            // fuselage drag ratio (matches solidity here)
  double rotor_area{0.503};  // rotor disc area, m^2
  double omega{300.0};       // blade angular velocity, rad/s
  double rotor_radius{0.4};  // m
  double d0{0.6};            // fuselage drag coefficient
  double u_tip{120.0};       // rotor tip speed, m/s
  double kappa{0.1};         // induced power increment factor
  double weight_n{20.0};     // aircraft weight, N
  double v0{4.03};           // mean rotor induced velocity in hover, m/s
  bool hover_as_printed{false};
  bool fly_with_induced{false};
};

// Power draw while translating at speed v, W.
double fly_power(double v, const RotorParams& p);
double fly_energy(double v, double seconds, const RotorParams& p);

// Power draw while hovering, W.
double hover_power(const RotorParams& p);
double hover_energy(double seconds, const RotorParams& p);

// Energy needed to reach the landing area from dist_la meters away at full
// speed. Used both for the low-battery penalty and the return-home heuristic.
double min_return_energy(double dist_la, double v_max, const RotorParams& p);

struct EnergyLedger {
  double total{1e6};  // battery capacity, J
  double limit{8e5};  // mission budget, J
  double used{0.0};

  void charge(double joules) { used += joules; }
  double remaining() const { return total - used; }
  bool over_limit() const { return used > limit; }
};

}  // namespace lowalt
