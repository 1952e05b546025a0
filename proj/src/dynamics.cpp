#include "lowalt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lowalt {

Vec2 clip_speed(const Vec2& v, double v_max) {
  const double n = v.norm();
  if (n <= v_max || n == 0.0) return v;
  return v * (v_max / n);
}

StepResult step_dcu(const UavState& s, const Vec2& action, double v_max,
                    const AreaSpec& area) {
  StepResult r;
  r.vel = clip_speed(action, v_max);
  r.pre_clamp = s.pos + r.vel * kFlySeconds;
  r.pos = {std::clamp(r.pre_clamp.x(), 0.0, area.x_size),
           std::clamp(r.pre_clamp.y(), 0.0, area.y_size)};
  r.exited_area = (r.pos != r.pre_clamp);
  return r;
}

namespace {

bool track_point_ok(const Vec2& p, const Scenario& s) {
  return s.area.contains(p) && !inside_any(p, s.bz) && !inside_any(p, s.nfz);
}

Vec2 draw_ou_velocity(double speed_max, Rng& rng) {
  const double speed = rng.uniform(0.0, speed_max);
  const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {q6(speed * std::cos(heading)), q6(speed * std::sin(heading))};
}

// Walks one track forward from its initial position. Returns false when a
// step exhausts the reflection cap, which means the start point has no
// escape at this step length (e.g. a strip between a zone and the boundary
// narrower than one step); the caller then redraws the start.
bool build_track(OuTrack& tr, Vec2 p, const Scenario& s,
                 const ScenarioConfig& cfg, Rng& rng) {
  tr.pos.clear();
  tr.vel.clear();
  tr.pos.push_back(p);
  Vec2 v = draw_ou_velocity(cfg.ou_speed_max, rng);
  for (int k = 0; k < cfg.t_max; ++k) {
    if (k > 0 && cfg.ou_resample_every > 0 && k % cfg.ou_resample_every == 0)
      v = draw_ou_velocity(cfg.ou_speed_max, rng);
    int reflects = 0;
    for (;;) {
      const Vec2 cand{q6(p.x() + v.x() * kFlySeconds),
                      q6(p.y() + v.y() * kFlySeconds)};
      if (track_point_ok(cand, s)) {
        p = cand;
        break;
      }
      if (++reflects > cfg.max_reflect) return false;
      // Bounce: negate whichever component pushed the candidate out of the
      // area or across a zone edge, then try the step again.
      bool flipped = false;
      if (cand.x() < 0.0 || cand.x() > s.area.x_size) {
        v.x() = -v.x();
        flipped = true;
      }
      if (cand.y() < 0.0 || cand.y() > s.area.y_size) {
        v.y() = -v.y();
        flipped = true;
      }
      if (!flipped) {
        for (const auto* zones : {&s.bz, &s.nfz}) {
          for (const Rect& z : *zones) {
            if (!z.contains(cand)) continue;
            const bool x_was_in = p.x() >= z.x && p.x() <= z.x_max();
            const bool y_was_in = p.y() >= z.y && p.y() <= z.y_max();
            if (!x_was_in) v.x() = -v.x();
            if (!y_was_in) v.y() = -v.y();
            if (x_was_in && y_was_in) v = -v;  // grazing entry along an edge
            flipped = true;
            break;
          }
          if (flipped) break;
        }
      }
      if (!flipped) v = -v;  // should not happen; full reversal as fallback
    }
    tr.vel.push_back(v);
    tr.pos.push_back(p);
  }
  return true;
}

}  // namespace

std::vector<OuTrack> generate_ou_tracks(const Scenario& s,
                                        const ScenarioConfig& cfg, Rng& rng) {
  std::vector<OuTrack> tracks;
  const int n = rng.uniform_int(cfg.n_ou.lo, cfg.n_ou.hi);
  for (int i = 0; i < n; ++i) {
    OuTrack tr;
    int tries = 0;
    for (;; ++tries) {
      if (tries >= cfg.max_tries)
        throw SamplingExhausted("could not build obstacle user track");
      const Vec2 p{q6(rng.uniform(0.0, cfg.area_x)),
                   q6(rng.uniform(0.0, cfg.area_y))};
      if (!track_point_ok(p, s)) continue;
      if (build_track(tr, p, s, cfg, rng)) break;
    }
    tracks.push_back(std::move(tr));
  }
  return tracks;
}

std::vector<VisibleOu> visible_ous(const Vec2& dcu, const std::vector<OuTrack>& ous,
                                   int t, double perception_range) {
  std::vector<VisibleOu> out;
  for (std::size_t i = 0; i < ous.size(); ++i) {
    const auto& tr = ous[i];
    if (tr.pos.empty()) continue;
    const std::size_t k = std::min<std::size_t>(t, tr.pos.size() - 1);
    const Vec2 p = tr.pos[k];
    const double d = (p - dcu).norm();
    if (d > perception_range) continue;
    const Vec2 v = tr.vel.empty() ? Vec2{0.0, 0.0}
                                  : tr.vel[std::min<std::size_t>(k, tr.vel.size() - 1)];
    out.push_back({static_cast<int>(i), p, v, d});
  }
  std::stable_sort(out.begin(), out.end(), [](const VisibleOu& a, const VisibleOu& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.index < b.index;
  });
  return out;
}

}  // namespace lowalt
