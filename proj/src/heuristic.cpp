#include "lowalt/heuristic.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace lowalt {

namespace {

// True when the straight segment crosses any obstacle inflated by margin.
bool path_blocked(const Vec2& a, const Vec2& b, const Scenario& s, double margin) {
  for (const auto* zones : {&s.bz, &s.nfz})
    for (const Rect& z : *zones)
      if (segment_intersects_rect(a, b, z.inflated(margin))) return true;
  return false;
}

// Corner of an inflated blocking rect that gives the cheapest detour. Corners
// get extra clearance so the leg toward them stays outside the tested hull.
Vec2 detour_corner(const Vec2& pos, const Vec2& target, const Scenario& s,
                   const HeuristicParams& p) {
  const Rect* blocking = nullptr;
  double blocking_dist = std::numeric_limits<double>::infinity();
  for (const auto* zones : {&s.bz, &s.nfz}) {
    for (const Rect& z : *zones) {
      if (!segment_intersects_rect(pos, target, z.inflated(p.d_min))) continue;
      const double d = dist_point_rect(pos, z);
      if (d < blocking_dist) {
        blocking_dist = d;
        blocking = &z;
      }
    }
  }
  if (!blocking) return target;

  const Rect h = blocking->inflated(p.d_min + p.corner_margin);
  const std::array<Vec2, 4> corners = {Vec2{h.x, h.y}, Vec2{h.x_max(), h.y},
                                       Vec2{h.x, h.y_max()},
                                       Vec2{h.x_max(), h.y_max()}};
  Vec2 best = corners[0];
  double best_cost = std::numeric_limits<double>::infinity();
  for (const Vec2& c : corners) {
    const double cost = (c - pos).norm() + (target - c).norm();
    const bool clear = !path_blocked(pos, c, s, p.d_min);
    // A reachable corner always beats an unreachable one.
    const double ranked = clear ? cost : cost + 1e9;
    if (ranked < best_cost) {
      best_cost = ranked;
      best = c;
    }
  }
  return best;
}

}  // namespace

Vec2 heuristic_act(const Environment& env, const HeuristicParams& p) {
  const Scenario& s = env.scenario();
  const Vec2 pos = env.uav().pos;
  const double v_max = env.params().v_max;

  // Target selection: nearest loaded device, or home once the energy left
  // only covers the reserve-scaled return leg.
  const double e_min = env.min_return_energy_now();
  const bool must_return = env.energy().remaining() <= p.reserve * e_min;
  Vec2 target = s.landing.center();
  if (!must_return) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : env.ges()) {
      if (g.remaining <= 0.0) continue;
      const double d = (g.spec.pos - pos).norm();
      if (d < best) {
        best = d;
        target = g.spec.pos;
      }
    }
  }

  Vec2 waypoint = detour_corner(pos, target, s, p);
  Vec2 v{0.0, 0.0};
  const Vec2 to_wp = waypoint - pos;
  if (to_wp.norm() > 1e-12) v = to_wp.normalized() * v_max;

  // Hover-or-retreat: the nearest visible OU inside d_safe decides.
  const auto visible = env.visible();
  const VisibleOu* threat = nullptr;
  for (const auto& ou : visible) {
    if (ou.dist > p.d_safe) continue;
    if (!threat || ou.dist < threat->dist) threat = &ou;
  }
  if (threat) {
    const Vec2 away = pos - threat->pos;
    const bool closing = threat->vel.dot(away) > 0.0;
    if (closing) {
      v = {0.0, 0.0};
    } else {
      v = away.norm() > 1e-12 ? Vec2(away.normalized() * v_max)
                              : Vec2(v_max, 0.0);
    }
  }

  if (inside_any(pos, s.rz) && v.norm() > env.params().v_limit)
    v *= env.params().v_limit / v.norm();
  return clip_speed(v, v_max);
}

}  // namespace lowalt
