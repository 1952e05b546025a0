#include "lowalt/world.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <numbers>

#include "lowalt/dynamics.hpp"

namespace lowalt {
namespace {

using nlohmann::json;

Rect sample_zone_rect(const ScenarioConfig& cfg, const Rect& ta, const Rect& la,
                      Rng& rng, const char* kind) {
  for (int tries = 0; tries < cfg.max_tries; ++tries) {
    const double w = q6(rng.uniform(cfg.zone_side.lo, cfg.zone_side.hi));
    const double h = q6(rng.uniform(cfg.zone_side.lo, cfg.zone_side.hi));
    if (w > cfg.area_x || h > cfg.area_y) continue;
    const double x = q6(rng.uniform(0.0, cfg.area_x - w));
    const double y = q6(rng.uniform(0.0, cfg.area_y - h));
    Rect r{x, y, w, h};
    // Zones may overlap each other but must keep clear of both corner areas.
    if (r.intersects(ta) || r.intersects(la)) continue;
    return r;
  }
  throw SamplingExhausted(std::string("could not place ") + kind + " zone");
}

GeSpec sample_ge(const ScenarioConfig& cfg, const std::vector<Rect>& nfz,
                 const std::vector<Rect>& bz, Rng& rng) {
  for (int tries = 0; tries < cfg.max_tries; ++tries) {
    Vec2 p{q6(rng.uniform(0.0, cfg.area_x)), q6(rng.uniform(0.0, cfg.area_y))};
    // Devices cannot sit inside buildings or no-fly zones. Restricted zones
    // are fine: flight over them is allowed, just speed-limited.
    if (inside_any(p, nfz) || inside_any(p, bz)) continue;
    GeSpec g;
    g.pos = p;
    g.dv = q6(rng.uniform(cfg.dv.lo, cfg.dv.hi));
    g.tp = cfg.tp;
    return g;
  }
  throw SamplingExhausted("could not place ground element");
}

// Fixed six fractional digits; parses back to the identical double because
// every emitted value sits on the 1e-6 grid.
void put_f6(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out += buf;
}

void put_rect(std::string& out, const Rect& r) {
  out += "{\"x\":";
  put_f6(out, r.x);
  out += ",\"y\":";
  put_f6(out, r.y);
  out += ",\"w\":";
  put_f6(out, r.w);
  out += ",\"h\":";
  put_f6(out, r.h);
  out += "}";
}

void put_vec_list(std::string& out, const char* key, const std::vector<Vec2>& v,
                  int coord) {
  out += "\"";
  out += key;
  out += "\":[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    put_f6(out, v[i][coord]);
  }
  out += "]";
}

Rect rect_from(const json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(),
          j.at("w").get<double>(), j.at("h").get<double>()};
}

}  // namespace

Scenario sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (cfg.area_x <= 0.0 || cfg.area_y <= 0.0)
    throw ValidationError("non-positive area");

  Rng rng(seed);
  Scenario s;
  s.area = {cfg.area_x, cfg.area_y};
  s.take_off = take_off_area(cfg);
  s.landing = landing_area(cfg);
  s.altitude = cfg.altitude;
  s.seed = seed;

  // Draw order is part of the determinism contract: no-fly zones, buildings,
  // restricted zones, ground elements, then obstacle-user tracks.
  const int nn = rng.uniform_int(cfg.n_nfz.lo, cfg.n_nfz.hi);
  for (int i = 0; i < nn; ++i)
    s.nfz.push_back(sample_zone_rect(cfg, s.take_off, s.landing, rng, "no-fly"));
  const int nb = rng.uniform_int(cfg.n_bz.lo, cfg.n_bz.hi);
  for (int i = 0; i < nb; ++i)
    s.bz.push_back(sample_zone_rect(cfg, s.take_off, s.landing, rng, "building"));
  const int nr = rng.uniform_int(cfg.n_rz.lo, cfg.n_rz.hi);
  for (int i = 0; i < nr; ++i)
    s.rz.push_back(sample_zone_rect(cfg, s.take_off, s.landing, rng, "restricted"));

  const int ng = rng.uniform_int(cfg.n_ge.lo, cfg.n_ge.hi);
  for (int i = 0; i < ng; ++i) s.ges.push_back(sample_ge(cfg, s.nfz, s.bz, rng));

  s.ous = generate_ou_tracks(s, cfg, rng);
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  std::string out;
  out.reserve(1 << 16);
  out += "{\"area\":{\"x\":";
  put_f6(out, s.area.x_size);
  out += ",\"y\":";
  put_f6(out, s.area.y_size);
  out += "},\"altitude_m\":";
  put_f6(out, s.altitude);
  char seedbuf[32];
  std::snprintf(seedbuf, sizeof(seedbuf), "%" PRIu64, s.seed);
  out += ",\"seed\":";
  out += seedbuf;
  out += ",\"take_off\":";
  put_rect(out, s.take_off);
  out += ",\"landing\":";
  put_rect(out, s.landing);
  for (const auto& [key, zones] :
       {std::pair<const char*, const std::vector<Rect>*>{"nfz", &s.nfz},
        {"bz", &s.bz},
        {"rz", &s.rz}}) {
    out += ",\"";
    out += key;
    out += "\":[";
    for (std::size_t i = 0; i < zones->size(); ++i) {
      if (i) out += ",";
      put_rect(out, (*zones)[i]);
    }
    out += "]";
  }
  out += ",\"ges\":[";
  for (std::size_t i = 0; i < s.ges.size(); ++i) {
    if (i) out += ",";
    out += "{\"x\":";
    put_f6(out, s.ges[i].pos.x());
    out += ",\"y\":";
    put_f6(out, s.ges[i].pos.y());
    out += ",\"dv\":";
    put_f6(out, s.ges[i].dv);
    out += ",\"tp\":";
    put_f6(out, s.ges[i].tp);
    out += "}";
  }
  out += "],\"ous\":[";
  for (std::size_t i = 0; i < s.ous.size(); ++i) {
    if (i) out += ",";
    out += "{";
    put_vec_list(out, "x", s.ous[i].pos, 0);
    out += ",";
    put_vec_list(out, "y", s.ous[i].pos, 1);
    out += ",";
    put_vec_list(out, "vx", s.ous[i].vel, 0);
    out += ",";
    put_vec_list(out, "vy", s.ous[i].vel, 1);
    out += "}";
  }
  out += "]}";
  return out;
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  try {
    Scenario s;
    s.area = {j.at("area").at("x").get<double>(), j.at("area").at("y").get<double>()};
    s.altitude = j.at("altitude_m").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.take_off = rect_from(j.at("take_off"));
    s.landing = rect_from(j.at("landing"));
    for (const auto& z : j.at("nfz")) s.nfz.push_back(rect_from(z));
    for (const auto& z : j.at("bz")) s.bz.push_back(rect_from(z));
    for (const auto& z : j.at("rz")) s.rz.push_back(rect_from(z));
    for (const auto& g : j.at("ges")) {
      GeSpec ge;
      ge.pos = {g.at("x").get<double>(), g.at("y").get<double>()};
      ge.dv = g.at("dv").get<double>();
      ge.tp = g.at("tp").get<double>();
      s.ges.push_back(ge);
    }
    for (const auto& o : j.at("ous")) {
      OuTrack tr;
      const auto& x = o.at("x");
      const auto& y = o.at("y");
      for (std::size_t k = 0; k < x.size(); ++k)
        tr.pos.emplace_back(x[k].get<double>(), y[k].get<double>());
      const auto& vx = o.at("vx");
      const auto& vy = o.at("vy");
      for (std::size_t k = 0; k < vx.size(); ++k)
        tr.vel.emplace_back(vx[k].get<double>(), vy[k].get<double>());
      s.ous.push_back(std::move(tr));
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario fields: ") + e.what());
  }
}

}  // namespace lowalt
