#pragma once

#include <vector>

#include "lowalt/world.hpp"

namespace lowalt {

// One decision slot is delta_t seconds: the first second flying, the second
// hovering while collecting.
inline constexpr double kSlotSeconds = 2.0;
inline constexpr double kFlySeconds = 1.0;
inline constexpr double kHoverSeconds = 1.0;

struct UavState {
  Vec2 pos{0.0, 0.0};
  Vec2 vel{0.0, 0.0};
};

struct StepResult {
  Vec2 pos;           // post-flight, clamped into the area
  Vec2 pre_clamp;     // where the commanded velocity would have put it
  Vec2 vel;           // velocity actually flown (after the speed clip)
  bool exited_area{false};
};

// Rescales to the speed bound, preserving direction.
Vec2 clip_speed(const Vec2& v, double v_max);

// Applies one flight second of the (clipped) action and clamps to the area.
StepResult step_dcu(const UavState& s, const Vec2& action, double v_max,
                    const AreaSpec& area);

// Pre-generates every obstacle-user path for the episode. Speed and heading
// re-draw every resample_every slots; a step that would enter a building or
// no-fly zone, or leave the area, reflects the offending velocity component
// and retries.
std::vector<OuTrack> generate_ou_tracks(const Scenario& s,
                                        const ScenarioConfig& cfg, Rng& rng);

struct VisibleOu {
  int index{0};
  Vec2 pos{0.0, 0.0};
  Vec2 vel{0.0, 0.0};
  double dist{0.0};
};

// Obstacle users within perception range of the DCU at slot t, nearest first;
// exact ties keep the lower track index. The range check is inclusive.
std::vector<VisibleOu> visible_ous(const Vec2& dcu, const std::vector<OuTrack>& ous,
                                   int t, double perception_range);

}  // namespace lowalt
