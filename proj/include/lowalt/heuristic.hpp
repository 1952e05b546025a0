#pragma once

#include "lowalt/environment.hpp"

namespace lowalt {

struct HeuristicParams {
  double d_min{5.0};          // obstacle inflation for detours
  double d_safe{15.0};        // OU hover-or-retreat radius
  double reserve{1.2};        // return-home margin on the minimum return energy
  double corner_margin{1.0};  // extra clearance when aiming at a detour corner
};

// Greedy baseline: head for the nearest device that still holds data (the
// landing area if none remain or the energy reserve is reached), detour
// around inflated obstacles, hover or retreat near moving obstacles, obey
// the restricted-zone speed limit.
Vec2 heuristic_act(const Environment& env, const HeuristicParams& p = {});

}  // namespace lowalt
