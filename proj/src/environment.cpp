#include "lowalt/environment.hpp"

#include <limits>

#include "lowalt/errors.hpp"

namespace lowalt {

using nlohmann::json;

const char* to_string(ActionSource s) {
  return s == ActionSource::kAdvisor ? "advisor" : "policy";
}

double EpisodeLog::total_reward() const {
  double r = 0.0;
  for (const auto& slot : slots) r += slot.reward.total;
  return r;
}

double EpisodeLog::collected() const {
  double c = 0.0;
  for (const auto& slot : slots) c += slot.td;
  return c;
}

Environment::Environment(Scenario scenario, EnvParams params, std::uint64_t env_seed)
    : scenario_(std::move(scenario)), params_(std::move(params)), env_seed_(env_seed) {
  if (static_cast<int>(scenario_.ges.size()) > params_.layout.max_ge ||
      static_cast<int>(scenario_.ous.size()) > params_.layout.max_ou)
    throw ShapeMismatch("scenario does not fit the observation layout");
  reset();
}

const Eigen::VectorXd& Environment::reset() {
  rng_ = Rng(env_seed_);
  uav_.pos = scenario_.take_off.center();
  uav_.vel = {0.0, 0.0};
  ges_.clear();
  for (const auto& g : scenario_.ges) ges_.push_back({g, g.dv});
  ledger_ = EnergyLedger{params_.e_total, params_.e_limit, 0.0};
  t_ = 0;
  last_td_ = 0.0;
  done_ = false;
  log_ = EpisodeLog{};
  log_.e_total = params_.e_total;
  log_.e_limit = params_.e_limit;
  for (const auto& g : scenario_.ges) log_.target_total += g.dv;
  encode();
  return obs_;
}

std::vector<VisibleOu> Environment::visible() const {
  return visible_ous(uav_.pos, scenario_.ous, t_, params_.radii.perception);
}

double Environment::dist_to_landing() const {
  return dist_point_rect(uav_.pos, scenario_.landing);
}

double Environment::min_return_energy_now() const {
  return min_return_energy(dist_to_landing(), params_.v_max, params_.rotor);
}

void Environment::encode() {
  obs_ = encode_observation(scenario_, ges_, uav_, ledger_.remaining(), last_td_,
                            visible(), params_.layout, params_.scales);
}

StepOutcome Environment::step(const Vec2& action, ActionSource source) {
  if (done_) throw EpisodeFinished("step() on a finished episode");

  // Flight phase: one second along the clipped action, clamped to the area.
  const StepResult fl = step_dcu(uav_, action, params_.v_max, scenario_.area);
  const int t_new = t_ + 1;

  SlotEvents ev;
  ev.exited_area = fl.exited_area;
  ev.entered_nfz = inside_any(fl.pos, scenario_.nfz);
  ev.collided_bz = inside_any(fl.pos, scenario_.bz);

  double d_ou = std::numeric_limits<double>::infinity();
  for (const auto& tr : scenario_.ous) {
    if (tr.pos.empty()) continue;
    const auto k = std::min<std::size_t>(t_new, tr.pos.size() - 1);
    d_ou = std::min(d_ou, (tr.pos[k] - fl.pos).norm());
  }
  ev.collided_ou = d_ou <= params_.collision_radius;

  const double speed = fl.vel.norm();
  const bool in_rz = inside_any(fl.pos, scenario_.rz);
  ev.rz_speed_violation = in_rz && speed > params_.v_limit;

  const bool crashed = ev.entered_nfz || ev.collided_bz || ev.collided_ou;

  // Hover phase: serve at most one device, skipped after a crash.
  CollectResult coll;
  if (!crashed) {
    const auto sel = select_ge(fl.pos, scenario_.altitude, ges_, params_.channel, rng_);
    if (sel)
      coll = collect(fl.pos, scenario_.altitude, *sel, ges_, params_.channel,
                     kHoverSeconds);
  }

  const double e_slot = fly_energy(speed, kFlySeconds, params_.rotor) +
                        hover_energy(kHoverSeconds, params_.rotor);
  ledger_.charge(e_slot);

  ev.landed = scenario_.landing.contains(fl.pos);
  ev.energy_exhausted = ledger_.over_limit();
  ev.reached_t_max = t_new >= params_.t_max;

  uav_.pos = fl.pos;
  uav_.vel = fl.vel;
  t_ = t_new;
  last_td_ = coll.td;
  done_ = crashed || ev.landed || ev.energy_exhausted || ev.reached_t_max;

  const double d_la = dist_point_rect(fl.pos, scenario_.landing);
  RewardInputs in;
  in.td = coll.td;
  in.d_ou = d_ou;
  in.d_bz = min_dist_to_zones(fl.pos, scenario_.bz);
  in.d_nfz = min_dist_to_zones(fl.pos, scenario_.nfz);
  in.d_area = dist_to_area_boundary(fl.pos, scenario_.area);
  in.exited_area = ev.exited_area;
  in.inside_rz = in_rz;
  in.speed = speed;
  in.d_la = d_la;
  in.energy_remaining = ledger_.remaining();
  in.e_min_return = min_return_energy(d_la, params_.v_max, params_.rotor);
  in.v_limit = params_.v_limit;
  in.v_max = params_.v_max;
  const RewardBreakdown rew =
      compute_reward(in, params_.weights, params_.radii, params_.flags);

  encode();

  SlotRecord rec;
  rec.t = t_new - 1;
  rec.pos = fl.pos;
  rec.vel = fl.vel;
  rec.action = action;
  rec.source = source;
  rec.reward = rew;
  rec.events = ev;
  rec.td = coll.td;
  rec.energy_slot = e_slot;
  rec.energy_remaining = ledger_.remaining();
  log_.slots.push_back(rec);

  return {rew, ev, coll.td, done_};
}

void Environment::abort_episode() {
  done_ = true;
  log_.advisor_terminated = true;
}

namespace {

json slot_to_json(const SlotRecord& r) {
  json ev = json::array();
  if (r.events.exited_area) ev.push_back("exited_area");
  if (r.events.entered_nfz) ev.push_back("entered_nfz");
  if (r.events.collided_bz) ev.push_back("collided_bz");
  if (r.events.collided_ou) ev.push_back("collided_ou");
  if (r.events.rz_speed_violation) ev.push_back("rz_speed_violation");
  if (r.events.landed) ev.push_back("landed");
  if (r.events.energy_exhausted) ev.push_back("energy_exhausted");
  if (r.events.reached_t_max) ev.push_back("reached_t_max");
  return json{{"t", r.t},
              {"pos", {r.pos.x(), r.pos.y()}},
              {"vel", {r.vel.x(), r.vel.y()}},
              {"action", {r.action.x(), r.action.y()}},
              {"source", to_string(r.source)},
              {"reward",
               {{"r1", r.reward.r1},
                {"r2", r.reward.r2},
                {"r3", r.reward.r3},
                {"r4", r.reward.r4},
                {"r5", r.reward.r5},
                {"r6", r.reward.r6},
                {"r7", r.reward.r7},
                {"r8", r.reward.r8},
                {"r9", r.reward.r9},
                {"total", r.reward.total}}},
              {"events", ev},
              {"td", r.td},
              {"energy", {{"slot", r.energy_slot}, {"remaining", r.energy_remaining}}}};
}

SlotRecord slot_from_json(const json& j) {
  SlotRecord r;
  r.t = j.at("t").get<int>();
  r.pos = {j.at("pos")[0].get<double>(), j.at("pos")[1].get<double>()};
  r.vel = {j.at("vel")[0].get<double>(), j.at("vel")[1].get<double>()};
  r.action = {j.at("action")[0].get<double>(), j.at("action")[1].get<double>()};
  r.source = j.at("source").get<std::string>() == "advisor" ? ActionSource::kAdvisor
                                                            : ActionSource::kPolicy;
  const auto& w = j.at("reward");
  r.reward.r1 = w.at("r1").get<double>();
  r.reward.r2 = w.at("r2").get<double>();
  r.reward.r3 = w.at("r3").get<double>();
  r.reward.r4 = w.at("r4").get<double>();
  r.reward.r5 = w.at("r5").get<double>();
  r.reward.r6 = w.at("r6").get<double>();
  r.reward.r7 = w.at("r7").get<double>();
  r.reward.r8 = w.at("r8").get<double>();
  r.reward.r9 = w.at("r9").get<double>();
  r.reward.total = w.at("total").get<double>();
  for (const auto& e : j.at("events")) {
    const std::string name = e.get<std::string>();
    if (name == "exited_area") r.events.exited_area = true;
    if (name == "entered_nfz") r.events.entered_nfz = true;
    if (name == "collided_bz") r.events.collided_bz = true;
    if (name == "collided_ou") r.events.collided_ou = true;
    if (name == "rz_speed_violation") r.events.rz_speed_violation = true;
    if (name == "landed") r.events.landed = true;
    if (name == "energy_exhausted") r.events.energy_exhausted = true;
    if (name == "reached_t_max") r.events.reached_t_max = true;
  }
  r.td = j.at("td").get<double>();
  r.energy_slot = j.at("energy").at("slot").get<double>();
  r.energy_remaining = j.at("energy").at("remaining").get<double>();
  return r;
}

}  // namespace

std::string episode_log_to_jsonl(const EpisodeLog& log) {
  json header = log.header;
  header["type"] = "header";
  header["target_total"] = log.target_total;
  header["e_total"] = log.e_total;
  header["e_limit"] = log.e_limit;
  header["advisor_terminated"] = log.advisor_terminated;
  std::string out = header.dump();
  out += "\n";
  for (const auto& slot : log.slots) {
    out += slot_to_json(slot).dump();
    out += "\n";
  }
  return out;
}

EpisodeLog episode_log_from_jsonl(const std::string& text) {
  EpisodeLog log;
  std::size_t start = 0;
  bool have_header = false;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("episode log line: ") + e.what());
    }
    if (!have_header) {
      if (!j.contains("type") || j.at("type") != "header")
        throw ParseError("episode log must start with a header record");
      log.target_total = j.value("target_total", 0.0);
      log.e_total = j.value("e_total", 1e6);
      log.e_limit = j.value("e_limit", 8e5);
      log.advisor_terminated = j.value("advisor_terminated", false);
      j.erase("type");
      log.header = j;
      have_header = true;
      continue;
    }
    try {
      log.slots.push_back(slot_from_json(j));
    } catch (const json::exception& e) {
      throw ParseError(std::string("episode log slot: ") + e.what());
    }
  }
  if (!have_header) throw ParseError("empty episode log");
  return log;
}

}  // namespace lowalt
