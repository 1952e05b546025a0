#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "lowalt/advisor.hpp"
#include "lowalt/environment.hpp"
#include "lowalt/sac.hpp"
#include "lowalt/world.hpp"

namespace lowalt {

// Independent streams so changing one subsystem's randomness leaves the
// others' draws untouched.
struct SeedConfig {
  std::uint64_t scenario{1};
  std::uint64_t policy{2};
  std::uint64_t advisor{3};
  std::uint64_t eval{4};
};

struct AdvisorConfig {
  std::string mode{"scripted"};  // scripted | remote | replay
  TriggerConfig trigger;
  PromptAblation ablation;
  RetryPolicy retry;
  ScriptedAdvisorConfig scripted;
  RemoteAdvisorConfig remote;
  std::string replay_path;
};

struct TrainConfig {
  int episodes{4000};
  std::string policy{"sac"};  // heuristic | sac | sac_heuristic | sac_llm_fixed_fp | hybrid
  double fp{1.0};             // delegation probability for the fixed-fp policy
  int checkpoint_every{100};
};

// Everything one run needs, resolved from JSON with defaults filled in.
// Derived fields (observation width, action scale, track horizon) are
// computed here, not configured.
struct RunConfig {
  ScenarioConfig scenario;  // t_max mirrors the episode section
  double v_max{10.0};
  double v_limit{5.0};
  ChannelParams channel;
  RotorParams rotor;
  double e_total{1e6};
  double e_limit{8e5};
  RewardWeights weights;
  SafetyRadii radii;
  RewardFlags reward_flags;
  SacConfig sac;
  AdvisorConfig advisor;
  int t_max{400};
  double collision_radius{2.0};
  SeedConfig seeds;
  TrainConfig train;

  // Dotted field path -> paper-default | design-default | user.
  std::map<std::string, std::string> provenance;
};

RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// Values only, stable key order.
nlohmann::json config_to_json(const RunConfig& cfg);

// Values plus a "_provenance" map; feeding the result back into
// config_from_json reproduces the same values.
nlohmann::json effective_config(const RunConfig& cfg);

// Value equality, provenance ignored.
bool config_equivalent(const RunConfig& a, const RunConfig& b);

EnvParams env_params(const RunConfig& cfg);

Environment make_environment(const RunConfig& cfg, std::uint64_t scenario_seed,
                             std::uint64_t env_seed);

}  // namespace lowalt
