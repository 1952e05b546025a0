#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lowalt/geometry.hpp"
#include "lowalt/rng.hpp"

namespace lowalt {

// All sampled coordinates live on a 1e-6 m grid. Serialization writes exactly
// six fractional digits, so quantizing at generation time makes the scenario
// file reproduce the in-memory values bit for bit.
inline double q6(double v) { return std::round(v * 1e6) / 1e6; }

struct IntRange {
  int lo{0};
  int hi{0};
};

struct Range {
  double lo{0.0};
  double hi{0.0};
};

// Ground element: a stationary device holding data to collect.
struct GeSpec {
  Vec2 pos{0.0, 0.0};
  double dv{0.0};  // initial data volume, Mbit
  double tp{0.0};  // transmit power, W
};

// Pre-generated path of one obstacle user. pos has t_max+1 entries (one per
// slot boundary), vel has t_max (velocity used to move from slot k to k+1).
struct OuTrack {
  std::vector<Vec2> pos;
  std::vector<Vec2> vel;
};

struct Scenario {
  AreaSpec area;
  Rect take_off;
  Rect landing;
  std::vector<Rect> nfz;
  std::vector<Rect> bz;
  std::vector<Rect> rz;
  std::vector<GeSpec> ges;
  std::vector<OuTrack> ous;
  double altitude{20.0};
  std::uint64_t seed{0};
};

struct ScenarioConfig {
  double area_x{500.0};
  double area_y{500.0};
  double ta_size{25.0};
  double la_size{25.0};
  IntRange n_ge{11, 15};
  Range dv{1.0, 3.0};
  double tp{0.01};
  IntRange n_nfz{1, 3};
  IntRange n_bz{1, 3};
  IntRange n_rz{1, 3};
  Range zone_side{50.0, 200.0};
  IntRange n_ou{3, 7};
  double ou_speed_max{10.0};
  int ou_resample_every{20};
  int t_max{400};
  double altitude{20.0};
  int max_tries{10000};    // rejection-sampling cap per element
  int max_reflect{1000};   // reflection cap per OU step
};

// Take-off area: flush against the top-left corner. Landing area: flush
// against the bottom-right corner.
inline Rect take_off_area(const ScenarioConfig& c) {
  return {0.0, c.area_y - c.ta_size, c.ta_size, c.ta_size};
}
inline Rect landing_area(const ScenarioConfig& c) {
  return {c.area_x - c.la_size, 0.0, c.la_size, c.la_size};
}

// Draws zones, ground elements and obstacle-user tracks for one episode.
// Identical seeds give identical scenarios, byte for byte after serialization.
Scenario sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

// Deterministic text form. write -> parse -> write is byte-stable.
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

}  // namespace lowalt
