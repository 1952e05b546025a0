#include "lowalt/config.hpp"

#include <fstream>
#include <sstream>

#include "lowalt/errors.hpp"

namespace lowalt {

using nlohmann::json;

namespace {

constexpr const char* kPaper = "paper-default";
constexpr const char* kDesign = "design-default";

struct DefaultDoc {
  json doc = json::object();
  std::map<std::string, std::string> tags;

  void set(const std::string& path, json v, const char* tag) {
    json* node = &doc;
    std::size_t begin = 0;
    for (std::size_t dot = path.find('.'); dot != std::string::npos;
         dot = path.find('.', begin)) {
      node = &(*node)[path.substr(begin, dot - begin)];
      begin = dot + 1;
    }
    (*node)[path.substr(begin)] = std::move(v);
    tags[path] = tag;
  }
};

DefaultDoc default_doc() {
  DefaultDoc d;
  d.set("scenario.area_x", 500.0, kPaper);
  d.set("scenario.area_y", 500.0, kPaper);
  d.set("scenario.ta_size", 25.0, kPaper);
  d.set("scenario.la_size", 25.0, kPaper);
  d.set("scenario.n_ge", json{11, 15}, kPaper);
  d.set("scenario.dv", json{1.0, 3.0}, kPaper);
  d.set("scenario.tp", 0.01, kPaper);
  d.set("scenario.n_nfz", json{1, 3}, kPaper);
  d.set("scenario.n_bz", json{1, 3}, kPaper);
  d.set("scenario.n_rz", json{1, 3}, kPaper);
  d.set("scenario.zone_side", json{50.0, 200.0}, kPaper);
  d.set("scenario.n_ou", json{3, 7}, kPaper);
  d.set("scenario.ou_speed_max", 10.0, kPaper);
  d.set("scenario.ou_resample_every", 20, kDesign);
  d.set("scenario.altitude", 20.0, kDesign);
  d.set("scenario.max_tries", 10000, kDesign);
  d.set("scenario.max_reflect", 1000, kDesign);
  d.set("scenario.v_max", 10.0, kPaper);
  d.set("scenario.v_limit", 5.0, kPaper);

  d.set("channel.alpha", 0.018, kDesign);
  d.set("channel.noise_w", 1e-6, kPaper);
  d.set("channel.tau", 3.6, kPaper);

  d.set("energy.e_total", 1e6, kPaper);
  d.set("energy.e_limit", 8e5, kPaper);
  d.set("energy.rotor.lambda", 0.012, kDesign);
  d.set("energy.rotor.rho", 1.225, kDesign);
  d.set("energy.rotor.eta", 0.05, kDesign);
  d.set("energy.rotor.s", 0.05, kDesign);
  d.set("energy.rotor.rotor_area", 0.503, kDesign);
  d.set("energy.rotor.omega", 300.0, kDesign);
  d.set("energy.rotor.rotor_radius", 0.4, kDesign);
  d.set("energy.rotor.d0", 0.6, kDesign);
  d.set("energy.rotor.u_tip", 120.0, kDesign);
  d.set("energy.rotor.kappa", 0.1, kDesign);
  d.set("energy.rotor.weight_n", 20.0, kDesign);
  d.set("energy.rotor.v0", 4.03, kDesign);
  d.set("energy.rotor.hover_as_printed", false, kDesign);
  d.set("energy.rotor.fly_with_induced", false, kDesign);

  d.set("reward.weights.collect", 8.0, kPaper);
  d.set("reward.weights.ou", 0.4, kPaper);
  d.set("reward.weights.bz", 0.4, kPaper);
  d.set("reward.weights.nfz", 0.4, kPaper);
  d.set("reward.weights.rz_speed", 0.6, kPaper);
  d.set("reward.weights.boundary", 0.4, kPaper);
  d.set("reward.weights.landing", 0.6, kPaper);
  d.set("reward.weights.energy", 1.0, kPaper);
  d.set("reward.weights.step", 0.01, kPaper);
  d.set("reward.radii.d_min", 5.0, kPaper);
  d.set("reward.radii.d_safe", 15.0, kPaper);
  d.set("reward.radii.d_tar_la", 100.0, kDesign);
  d.set("reward.radii.perception", 20.0, kPaper);
  d.set("reward.r1_as_printed", false, kDesign);
  d.set("reward.r7_as_printed", false, kDesign);

  d.set("sac.hidden", json{64, 64}, kPaper);
  d.set("sac.actor_lr", 1e-4, kPaper);
  d.set("sac.critic_lr", 3e-4, kPaper);
  d.set("sac.gamma", 0.99, kPaper);
  d.set("sac.temperature", 0.2, kDesign);
  d.set("sac.polyak", 0.005, kDesign);
  d.set("sac.buffer_capacity", 100000, kDesign);
  d.set("sac.batch_size", 256, kPaper);
  d.set("sac.warmup_steps", 1000, kDesign);

  d.set("advisor.mode", "scripted", kDesign);
  d.set("advisor.trigger.d_th", 15.0, kPaper);
  d.set("advisor.trigger.ou", true, kDesign);
  d.set("advisor.trigger.bz", true, kDesign);
  d.set("advisor.trigger.nfz", true, kDesign);
  d.set("advisor.trigger.rz", true, kDesign);
  d.set("advisor.ablation.safety", true, kDesign);
  d.set("advisor.ablation.compliance", true, kDesign);
  d.set("advisor.ablation.data_efficiency", true, kDesign);
  d.set("advisor.ablation.energy_efficiency", true, kDesign);
  d.set("advisor.ablation.stability", true, kDesign);
  d.set("advisor.retry.max_attempts", 10, kPaper);
  d.set("advisor.retry.separate_budgets", false, kDesign);
  d.set("advisor.scripted.v_cruise", 7.0, kDesign);
  d.set("advisor.scripted.k_rep", 10.0, kDesign);
  d.set("advisor.remote.url", "http://127.0.0.1:8080/v1/chat/completions", kDesign);
  d.set("advisor.remote.model", "advisor", kDesign);
  d.set("advisor.remote.temperature", 0.2, kDesign);
  d.set("advisor.remote.timeout_s", 30, kDesign);
  d.set("advisor.remote.api_key_env", "ADVISOR_API_KEY", kDesign);
  d.set("advisor.replay_path", "", kDesign);

  d.set("episode.t_max", 400, kDesign);
  d.set("episode.collision_radius", 2.0, kDesign);

  d.set("seeds.scenario", 1, kDesign);
  d.set("seeds.policy", 2, kDesign);
  d.set("seeds.advisor", 3, kDesign);
  d.set("seeds.eval", 4, kDesign);

  d.set("train.episodes", 4000, kPaper);
  d.set("train.policy", "sac", kDesign);
  d.set("train.fp", 1.0, kDesign);
  d.set("train.checkpoint_every", 100, kDesign);
  return d;
}

// User values land on top of the defaults. Arrays are leaves. Unknown keys
// are typos until proven otherwise.
void deep_merge(json& base, const json& user, const std::string& prefix,
                std::map<std::string, std::string>& tags) {
  for (const auto& [key, value] : user.items()) {
    if (prefix.empty() && key == "_provenance") continue;
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key))
      throw ValidationError("unknown config field: " + path);
    if (base[key].is_object()) {
      if (!value.is_object())
        throw ValidationError("config field is a section, expected an object: " + path);
      deep_merge(base[key], value, path, tags);
      continue;
    }
    base[key] = value;
    tags[path] = "user";
  }
}

IntRange int_range(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer())
    throw ValidationError(path + " must be an integer pair [lo, hi]");
  return {v[0].get<int>(), v[1].get<int>()};
}

Range range(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ValidationError(path + " must be a numeric pair [lo, hi]");
  return {v[0].get<double>(), v[1].get<double>()};
}

#define REQUIRE(cond, msg) \
  do {                     \
    if (!(cond)) throw ValidationError(msg); \
  } while (0)

void check_range(const IntRange& r, const std::string& name, int min_lo) {
  REQUIRE(r.lo <= r.hi, name + " range is inverted");
  REQUIRE(r.lo >= min_lo, name + " lower bound is too small");
}

void validate(const RunConfig& c) {
  REQUIRE(c.scenario.area_x > 0 && c.scenario.area_y > 0,
          "operating area dimensions must be positive");
  REQUIRE((c.scenario.ta_size > 0 && c.scenario.ta_size <= std::min(c.scenario.area_x, c.scenario.area_y)),
          "take-off area size must fit inside the operating area");
  REQUIRE((c.scenario.la_size > 0 && c.scenario.la_size <= std::min(c.scenario.area_x, c.scenario.area_y)),
          "landing area size must fit inside the operating area");
  check_range(c.scenario.n_ge, "scenario.n_ge", 1);
  check_range(c.scenario.n_nfz, "scenario.n_nfz", 0);
  check_range(c.scenario.n_bz, "scenario.n_bz", 0);
  check_range(c.scenario.n_rz, "scenario.n_rz", 0);
  check_range(c.scenario.n_ou, "scenario.n_ou", 0);
  REQUIRE(c.scenario.dv.lo > 0 && c.scenario.dv.lo <= c.scenario.dv.hi,
          "scenario.dv must be a positive range");
  REQUIRE(c.scenario.zone_side.lo > 0 && c.scenario.zone_side.lo <= c.scenario.zone_side.hi,
          "scenario.zone_side must be a positive range");
  REQUIRE(c.scenario.tp > 0, "device transmit power must be positive");
  REQUIRE(c.scenario.ou_speed_max >= 0, "scenario.ou_speed_max must be nonnegative");
  REQUIRE(c.scenario.ou_resample_every >= 1, "scenario.ou_resample_every must be at least 1");
  REQUIRE(c.scenario.altitude > 0, "flight altitude must be positive");
  REQUIRE(c.scenario.max_tries >= 1 && c.scenario.max_reflect >= 1,
          "sampling caps must be at least 1");
  REQUIRE(c.v_max > 0, "v_max must be positive");
  REQUIRE(c.v_limit > 0 && c.v_limit < c.v_max, "v_limit must stay below v_max");

  REQUIRE(c.channel.alpha > 0, "channel.alpha must be positive");
  REQUIRE(c.channel.noise_w > 0, "channel.noise_w must be positive");
  REQUIRE(c.channel.tau > 0, "channel.tau must be positive");

  REQUIRE(c.e_total > 0, "energy.e_total must be positive");
  REQUIRE(c.e_limit > 0 && c.e_limit <= c.e_total,
          "energy.e_limit must not exceed energy.e_total");
  REQUIRE(c.rotor.rho > 0 && c.rotor.rotor_area > 0 && c.rotor.u_tip > 0 &&
              c.rotor.weight_n > 0 && c.rotor.v0 > 0 && c.rotor.omega > 0 &&
              c.rotor.rotor_radius > 0,
          "rotor physical constants must be positive");
  REQUIRE(c.rotor.lambda >= 0 && c.rotor.eta >= 0 && c.rotor.s >= 0 &&
              c.rotor.d0 >= 0 && c.rotor.kappa >= 0,
          "rotor drag coefficients must be nonnegative");

  for (double w : c.weights.as_array())
    REQUIRE(w >= 0, "reward weights must be nonnegative");
  REQUIRE(c.radii.d_min >= 0 && c.radii.d_min < c.radii.d_safe,
          "reward.radii require 0 <= d_min < d_safe");
  REQUIRE(c.radii.d_tar_la > 0, "reward.radii.d_tar_la must be positive");
  REQUIRE(c.radii.perception > 0, "reward.radii.perception must be positive");

  REQUIRE(!c.sac.hidden.empty(), "sac.hidden must name at least one layer");
  for (int h : c.sac.hidden) REQUIRE(h >= 1, "sac.hidden widths must be positive");
  REQUIRE(c.sac.actor_lr > 0 && c.sac.critic_lr > 0, "learning rates must be positive");
  REQUIRE(c.sac.gamma >= 0 && c.sac.gamma <= 1, "sac.gamma must lie in [0, 1]");
  REQUIRE(c.sac.temperature >= 0, "sac.temperature must be nonnegative");
  REQUIRE(c.sac.polyak > 0 && c.sac.polyak <= 1, "sac.polyak must lie in (0, 1]");
  REQUIRE(c.sac.batch_size >= 1, "sac.batch_size must be positive");
  REQUIRE(c.sac.buffer_capacity >= static_cast<std::size_t>(c.sac.batch_size),
          "sac.buffer_capacity must hold at least one batch");
  REQUIRE(c.sac.warmup_steps >= 0, "sac.warmup_steps must be nonnegative");

  REQUIRE(c.advisor.mode == "scripted" || c.advisor.mode == "remote" ||
              c.advisor.mode == "replay",
          "advisor.mode must be scripted, remote or replay");
  REQUIRE(c.advisor.trigger.d_th >= 0, "advisor.trigger.d_th must be nonnegative");
  REQUIRE(c.advisor.retry.max_attempts >= 1, "advisor.retry.max_attempts must be at least 1");
  REQUIRE(c.advisor.scripted.v_cruise > 0, "advisor.scripted.v_cruise must be positive");
  REQUIRE(c.advisor.scripted.k_rep >= 0, "advisor.scripted.k_rep must be nonnegative");
  REQUIRE(c.advisor.remote.timeout_s >= 1, "advisor.remote.timeout_s must be at least 1");
  REQUIRE(c.advisor.remote.temperature >= 0, "advisor.remote.temperature must be nonnegative");
  if (c.advisor.mode == "replay")
    REQUIRE(!c.advisor.replay_path.empty(), "advisor.replay_path required in replay mode");

  REQUIRE(c.t_max >= 1, "episode.t_max must be at least 1");
  REQUIRE(c.collision_radius >= 0, "episode.collision_radius must be nonnegative");

  REQUIRE(c.train.episodes >= 1, "train.episodes must be at least 1");
  REQUIRE(c.train.policy == "heuristic" || c.train.policy == "sac" ||
              c.train.policy == "sac_heuristic" ||
              c.train.policy == "sac_llm_fixed_fp" || c.train.policy == "hybrid",
          "train.policy is not one of the known policies");
  REQUIRE(c.train.fp >= 0 && c.train.fp <= 1, "train.fp must lie in [0, 1]");
  REQUIRE(c.train.checkpoint_every >= 1, "train.checkpoint_every must be at least 1");
}

#undef REQUIRE

}  // namespace

RunConfig config_from_json(const json& user) {
  DefaultDoc d = default_doc();
  deep_merge(d.doc, user, "", d.tags);
  const json& j = d.doc;

  RunConfig c;
  const json& sc = j["scenario"];
  c.scenario.area_x = sc["area_x"].get<double>();
  c.scenario.area_y = sc["area_y"].get<double>();
  c.scenario.ta_size = sc["ta_size"].get<double>();
  c.scenario.la_size = sc["la_size"].get<double>();
  c.scenario.n_ge = int_range(sc["n_ge"], "scenario.n_ge");
  c.scenario.dv = range(sc["dv"], "scenario.dv");
  c.scenario.tp = sc["tp"].get<double>();
  c.scenario.n_nfz = int_range(sc["n_nfz"], "scenario.n_nfz");
  c.scenario.n_bz = int_range(sc["n_bz"], "scenario.n_bz");
  c.scenario.n_rz = int_range(sc["n_rz"], "scenario.n_rz");
  c.scenario.zone_side = range(sc["zone_side"], "scenario.zone_side");
  c.scenario.n_ou = int_range(sc["n_ou"], "scenario.n_ou");
  c.scenario.ou_speed_max = sc["ou_speed_max"].get<double>();
  c.scenario.ou_resample_every = sc["ou_resample_every"].get<int>();
  c.scenario.altitude = sc["altitude"].get<double>();
  c.scenario.max_tries = sc["max_tries"].get<int>();
  c.scenario.max_reflect = sc["max_reflect"].get<int>();
  c.v_max = sc["v_max"].get<double>();
  c.v_limit = sc["v_limit"].get<double>();

  c.channel.alpha = j["channel"]["alpha"].get<double>();
  c.channel.noise_w = j["channel"]["noise_w"].get<double>();
  c.channel.tau = j["channel"]["tau"].get<double>();

  c.e_total = j["energy"]["e_total"].get<double>();
  c.e_limit = j["energy"]["e_limit"].get<double>();
  const json& rt = j["energy"]["rotor"];
  c.rotor.lambda = rt["lambda"].get<double>();
  c.rotor.rho = rt["rho"].get<double>();
  c.rotor.eta = rt["eta"].get<double>();
  c.rotor.s = rt["s"].get<double>();
  c.rotor.rotor_area = rt["rotor_area"].get<double>();
  c.rotor.omega = rt["omega"].get<double>();
  c.rotor.rotor_radius = rt["rotor_radius"].get<double>();
  c.rotor.d0 = rt["d0"].get<double>();
  c.rotor.u_tip = rt["u_tip"].get<double>();
  c.rotor.kappa = rt["kappa"].get<double>();
  c.rotor.weight_n = rt["weight_n"].get<double>();
  c.rotor.v0 = rt["v0"].get<double>();
  c.rotor.hover_as_printed = rt["hover_as_printed"].get<bool>();
  c.rotor.fly_with_induced = rt["fly_with_induced"].get<bool>();

  const json& rw = j["reward"]["weights"];
  c.weights.collect = rw["collect"].get<double>();
  c.weights.ou = rw["ou"].get<double>();
  c.weights.bz = rw["bz"].get<double>();
  c.weights.nfz = rw["nfz"].get<double>();
  c.weights.rz_speed = rw["rz_speed"].get<double>();
  c.weights.boundary = rw["boundary"].get<double>();
  c.weights.landing = rw["landing"].get<double>();
  c.weights.energy = rw["energy"].get<double>();
  c.weights.step = rw["step"].get<double>();
  const json& rr = j["reward"]["radii"];
  c.radii.d_min = rr["d_min"].get<double>();
  c.radii.d_safe = rr["d_safe"].get<double>();
  c.radii.d_tar_la = rr["d_tar_la"].get<double>();
  c.radii.perception = rr["perception"].get<double>();
  c.reward_flags.r1_as_printed = j["reward"]["r1_as_printed"].get<bool>();
  c.reward_flags.r7_as_printed = j["reward"]["r7_as_printed"].get<bool>();

  const json& sj = j["sac"];
  c.sac.hidden.clear();
  for (const auto& h : sj["hidden"]) {
    if (!h.is_number_integer())
      throw ValidationError("sac.hidden must be a list of integers");
    c.sac.hidden.push_back(h.get<int>());
  }
  c.sac.actor_lr = sj["actor_lr"].get<double>();
  c.sac.critic_lr = sj["critic_lr"].get<double>();
  c.sac.gamma = sj["gamma"].get<double>();
  c.sac.temperature = sj["temperature"].get<double>();
  c.sac.polyak = sj["polyak"].get<double>();
  c.sac.buffer_capacity = sj["buffer_capacity"].get<std::size_t>();
  c.sac.batch_size = sj["batch_size"].get<int>();
  c.sac.warmup_steps = sj["warmup_steps"].get<int>();

  const json& aj = j["advisor"];
  c.advisor.mode = aj["mode"].get<std::string>();
  c.advisor.trigger.d_th = aj["trigger"]["d_th"].get<double>();
  c.advisor.trigger.ou = aj["trigger"]["ou"].get<bool>();
  c.advisor.trigger.bz = aj["trigger"]["bz"].get<bool>();
  c.advisor.trigger.nfz = aj["trigger"]["nfz"].get<bool>();
  c.advisor.trigger.rz = aj["trigger"]["rz"].get<bool>();
  c.advisor.ablation.safety = aj["ablation"]["safety"].get<bool>();
  c.advisor.ablation.compliance = aj["ablation"]["compliance"].get<bool>();
  c.advisor.ablation.data_efficiency = aj["ablation"]["data_efficiency"].get<bool>();
  c.advisor.ablation.energy_efficiency = aj["ablation"]["energy_efficiency"].get<bool>();
  c.advisor.ablation.stability = aj["ablation"]["stability"].get<bool>();
  c.advisor.retry.max_attempts = aj["retry"]["max_attempts"].get<int>();
  c.advisor.retry.separate_budgets = aj["retry"]["separate_budgets"].get<bool>();
  c.advisor.scripted.v_cruise = aj["scripted"]["v_cruise"].get<double>();
  c.advisor.scripted.k_rep = aj["scripted"]["k_rep"].get<double>();
  c.advisor.remote.url = aj["remote"]["url"].get<std::string>();
  c.advisor.remote.model = aj["remote"]["model"].get<std::string>();
  c.advisor.remote.temperature = aj["remote"]["temperature"].get<double>();
  c.advisor.remote.timeout_s = aj["remote"]["timeout_s"].get<int>();
  c.advisor.remote.api_key_env = aj["remote"]["api_key_env"].get<std::string>();
  c.advisor.replay_path = aj["replay_path"].get<std::string>();

  c.t_max = j["episode"]["t_max"].get<int>();
  c.collision_radius = j["episode"]["collision_radius"].get<double>();

  c.seeds.scenario = j["seeds"]["scenario"].get<std::uint64_t>();
  c.seeds.policy = j["seeds"]["policy"].get<std::uint64_t>();
  c.seeds.advisor = j["seeds"]["advisor"].get<std::uint64_t>();
  c.seeds.eval = j["seeds"]["eval"].get<std::uint64_t>();

  c.train.episodes = j["train"]["episodes"].get<int>();
  c.train.policy = j["train"]["policy"].get<std::string>();
  c.train.fp = j["train"]["fp"].get<double>();
  c.train.checkpoint_every = j["train"]["checkpoint_every"].get<int>();

  // Derived, never configured directly.
  c.scenario.t_max = c.t_max;
  const ObservationLayout layout = ObservationLayout::from_config(c.scenario);
  c.sac.obs_dim = layout.total_dim();
  c.sac.action_dim = 2;
  c.sac.action_scale = c.v_max;
  // The scripted advisor and trigger share the invocation distance.
  c.advisor.scripted.d_th = c.advisor.trigger.d_th;

  c.provenance = std::move(d.tags);
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const RunConfig& c) {
  json j;
  j["scenario"] = {{"area_x", c.scenario.area_x},
                   {"area_y", c.scenario.area_y},
                   {"ta_size", c.scenario.ta_size},
                   {"la_size", c.scenario.la_size},
                   {"n_ge", {c.scenario.n_ge.lo, c.scenario.n_ge.hi}},
                   {"dv", {c.scenario.dv.lo, c.scenario.dv.hi}},
                   {"tp", c.scenario.tp},
                   {"n_nfz", {c.scenario.n_nfz.lo, c.scenario.n_nfz.hi}},
                   {"n_bz", {c.scenario.n_bz.lo, c.scenario.n_bz.hi}},
                   {"n_rz", {c.scenario.n_rz.lo, c.scenario.n_rz.hi}},
                   {"zone_side", {c.scenario.zone_side.lo, c.scenario.zone_side.hi}},
                   {"n_ou", {c.scenario.n_ou.lo, c.scenario.n_ou.hi}},
                   {"ou_speed_max", c.scenario.ou_speed_max},
                   {"ou_resample_every", c.scenario.ou_resample_every},
                   {"altitude", c.scenario.altitude},
                   {"max_tries", c.scenario.max_tries},
                   {"max_reflect", c.scenario.max_reflect},
                   {"v_max", c.v_max},
                   {"v_limit", c.v_limit}};
  j["channel"] = {{"alpha", c.channel.alpha},
                  {"noise_w", c.channel.noise_w},
                  {"tau", c.channel.tau}};
  j["energy"] = {{"e_total", c.e_total},
                 {"e_limit", c.e_limit},
                 {"rotor",
                  {{"lambda", c.rotor.lambda},
                   {"rho", c.rotor.rho},
                   {"eta", c.rotor.eta},
                   {"s", c.rotor.s},
                   {"rotor_area", c.rotor.rotor_area},
                   {"omega", c.rotor.omega},
                   {"rotor_radius", c.rotor.rotor_radius},
                   {"d0", c.rotor.d0},
                   {"u_tip", c.rotor.u_tip},
                   {"kappa", c.rotor.kappa},
                   {"weight_n", c.rotor.weight_n},
                   {"v0", c.rotor.v0},
                   {"hover_as_printed", c.rotor.hover_as_printed},
                   {"fly_with_induced", c.rotor.fly_with_induced}}}};
  j["reward"] = {{"weights",
                  {{"collect", c.weights.collect},
                   {"ou", c.weights.ou},
                   {"bz", c.weights.bz},
                   {"nfz", c.weights.nfz},
                   {"rz_speed", c.weights.rz_speed},
                   {"boundary", c.weights.boundary},
                   {"landing", c.weights.landing},
                   {"energy", c.weights.energy},
                   {"step", c.weights.step}}},
                 {"radii",
                  {{"d_min", c.radii.d_min},
                   {"d_safe", c.radii.d_safe},
                   {"d_tar_la", c.radii.d_tar_la},
                   {"perception", c.radii.perception}}},
                 {"r1_as_printed", c.reward_flags.r1_as_printed},
                 {"r7_as_printed", c.reward_flags.r7_as_printed}};
  j["sac"] = {{"hidden", c.sac.hidden},
              {"actor_lr", c.sac.actor_lr},
              {"critic_lr", c.sac.critic_lr},
              {"gamma", c.sac.gamma},
              {"temperature", c.sac.temperature},
              {"polyak", c.sac.polyak},
              {"buffer_capacity", c.sac.buffer_capacity},
              {"batch_size", c.sac.batch_size},
              {"warmup_steps", c.sac.warmup_steps}};
  j["advisor"] = {{"mode", c.advisor.mode},
                  {"trigger",
                   {{"d_th", c.advisor.trigger.d_th},
                    {"ou", c.advisor.trigger.ou},
                    {"bz", c.advisor.trigger.bz},
                    {"nfz", c.advisor.trigger.nfz},
                    {"rz", c.advisor.trigger.rz}}},
                  {"ablation",
                   {{"safety", c.advisor.ablation.safety},
                    {"compliance", c.advisor.ablation.compliance},
                    {"data_efficiency", c.advisor.ablation.data_efficiency},
                    {"energy_efficiency", c.advisor.ablation.energy_efficiency},
                    {"stability", c.advisor.ablation.stability}}},
                  {"retry",
                   {{"max_attempts", c.advisor.retry.max_attempts},
                    {"separate_budgets", c.advisor.retry.separate_budgets}}},
                  {"scripted",
                   {{"v_cruise", c.advisor.scripted.v_cruise},
                    {"k_rep", c.advisor.scripted.k_rep}}},
                  {"remote",
                   {{"url", c.advisor.remote.url},
                    {"model", c.advisor.remote.model},
                    {"temperature", c.advisor.remote.temperature},
                    {"timeout_s", c.advisor.remote.timeout_s},
                    {"api_key_env", c.advisor.remote.api_key_env}}},
                  {"replay_path", c.advisor.replay_path}};
  j["episode"] = {{"t_max", c.t_max}, {"collision_radius", c.collision_radius}};
  j["seeds"] = {{"scenario", c.seeds.scenario},
                {"policy", c.seeds.policy},
                {"advisor", c.seeds.advisor},
                {"eval", c.seeds.eval}};
  j["train"] = {{"episodes", c.train.episodes},
                {"policy", c.train.policy},
                {"fp", c.train.fp},
                {"checkpoint_every", c.train.checkpoint_every}};
  return j;
}

json effective_config(const RunConfig& c) {
  json j = config_to_json(c);
  j["_provenance"] = c.provenance;
  return j;
}

bool config_equivalent(const RunConfig& a, const RunConfig& b) {
  return config_to_json(a) == config_to_json(b);
}

EnvParams env_params(const RunConfig& c) {
  EnvParams p;
  p.channel = c.channel;
  p.rotor = c.rotor;
  p.weights = c.weights;
  p.radii = c.radii;
  p.flags = c.reward_flags;
  p.layout = ObservationLayout::from_config(c.scenario);
  p.scales.area_x = c.scenario.area_x;
  p.scales.area_y = c.scenario.area_y;
  p.scales.v_max = c.v_max;
  p.scales.e_total = c.e_total;
  p.scales.dv_max = c.scenario.dv.hi;
  p.scales.perception = c.radii.perception;
  // Best per-slot transfer: the rate at the closest tolerated slant range.
  const double best_gain = channel_gain(std::max(c.radii.d_min, 1e-9), c.channel);
  p.scales.td_cap =
      rate_mbps(snr(c.scenario.tp, best_gain, c.channel.noise_w)) * kHoverSeconds;
  p.v_max = c.v_max;
  p.v_limit = c.v_limit;
  p.e_total = c.e_total;
  p.e_limit = c.e_limit;
  p.t_max = c.t_max;
  p.collision_radius = c.collision_radius;
  return p;
}

Environment make_environment(const RunConfig& c, std::uint64_t scenario_seed,
                             std::uint64_t env_seed) {
  return Environment(sample_scenario(c.scenario, scenario_seed), env_params(c),
                     env_seed);
}

}  // namespace lowalt
