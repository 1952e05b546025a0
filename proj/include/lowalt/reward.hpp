#pragma once

#include <array>

namespace lowalt {

// Per-term weights of the shaped step reward.
struct RewardWeights {
  double collect{8.0};      // data moved this slot
  double ou{0.4};           // obstacle-user proximity
  double bz{0.4};           // building proximity
  double nfz{0.4};          // no-fly-zone proximity
  double rz_speed{0.6};     // speeding inside a restricted zone
  double boundary{0.4};     // operating-area edge proximity
  double landing{0.6};      // landing-area approach shaping
  double energy{1.0};       // battery below the return budget
  double step{0.01};        // constant per-slot cost

  std::array<double, 9> as_array() const {
    return {collect, ou, bz, nfz, rz_speed, boundary, landing, energy, step};
  }
};

struct SafetyRadii {
  double d_min{5.0};        // hard standoff, full penalty at or under this
  double d_safe{15.0};      // penalty-free beyond this
  double d_tar_la{100.0};   // landing shaping radius
  double perception{20.0};  // obstacle-user sensing range
};

// Literal-form switches; both default to the corrected behavior.
struct RewardFlags {
  bool r1_as_printed{false};  // pay the collection bonus even with zero data
  bool r7_as_printed{false};  // penalize (instead of reward) landing proximity
};

// Everything the reward depends on, measured after the flight phase of the
// slot. Distances to absent zone kinds come in as +infinity.
struct RewardInputs {
  double td{0.0};                // data collected this slot
  double d_ou{0.0};              // distance to nearest obstacle user
  double d_bz{0.0};              // distance to nearest building
  double d_nfz{0.0};             // distance to nearest no-fly zone
  double d_area{0.0};            // distance to the operating-area edge
  bool exited_area{false};       // commanded position fell outside the area
  bool inside_rz{false};
  double speed{0.0};             // flown speed magnitude
  double d_la{0.0};              // distance to the landing area
  double energy_remaining{0.0};
  double e_min_return{0.0};      // energy needed to reach the landing area
  double v_limit{5.0};
  double v_max{10.0};
};

struct RewardBreakdown {
  double r1{0.0}, r2{0.0}, r3{0.0}, r4{0.0}, r5{0.0};
  double r6{0.0}, r7{0.0}, r8{0.0}, r9{0.0};
  double total{0.0};
};

// Piecewise-linear proximity barrier shared by the obstacle, zone and
// boundary terms: zero at or beyond d_safe, the full weight at or under
// d_min, linear in between.
double proximity_penalty(double d, double weight, const SafetyRadii& r);

RewardBreakdown compute_reward(const RewardInputs& in, const RewardWeights& w,
                               const SafetyRadii& radii, const RewardFlags& flags);

}  // namespace lowalt
