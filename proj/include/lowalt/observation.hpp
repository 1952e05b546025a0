#pragma once

#include <Eigen/Core>
#include <vector>

#include "lowalt/comms.hpp"
#include "lowalt/dynamics.hpp"
#include "lowalt/world.hpp"

namespace lowalt {

// Fixed-width observation layout. Slots beyond the actual element counts are
// zero-padded so the vector length depends only on the configuration, never
// on the sampled scenario.
struct ObservationLayout {
  int max_ge{15};
  int zone_types{3};  // no-fly, restricted, building blocks, in that order
  int max_zone{3};    // per zone type
  int max_ou{7};

  static constexpr int kGeFeatures = 3;    // x, y, remaining
  static constexpr int kZoneFeatures = 4;  // x, y, w, h
  static constexpr int kOuFeatures = 4;    // dx, dy, vx, vy
  static constexpr int kDcuFeatures = 14;  // pos, vel, energy, last td, TA, LA

  int total_dim() const {
    return max_ge * kGeFeatures + zone_types * max_zone * kZoneFeatures +
           max_ou * kOuFeatures + kDcuFeatures;
  }

  static ObservationLayout from_config(const ScenarioConfig& c) {
    ObservationLayout l;
    l.max_ge = c.n_ge.hi;
    l.max_zone = std::max({c.n_nfz.hi, c.n_rz.hi, c.n_bz.hi});
    l.max_ou = c.n_ou.hi;
    return l;
  }
};

// Normalization constants. Positions scale by the area, velocities by the
// speed bound, remaining data by the largest initial volume, the last slot's
// transfer by the best achievable per-slot transfer.
struct ObservationScales {
  double area_x{500.0};
  double area_y{500.0};
  double v_max{10.0};
  double e_total{1e6};
  double dv_max{3.0};
  double perception{20.0};
  double td_cap{1.0};
};

Eigen::VectorXd encode_observation(const Scenario& s,
                                   const std::vector<GeRuntime>& ges,
                                   const UavState& uav, double energy_remaining,
                                   double last_td,
                                   const std::vector<VisibleOu>& visible,
                                   const ObservationLayout& layout,
                                   const ObservationScales& sc);

}  // namespace lowalt
