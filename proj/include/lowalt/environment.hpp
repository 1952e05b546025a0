#pragma once

#include <Eigen/Core>
#include <json.hpp>
#include <string>
#include <vector>

#include "lowalt/comms.hpp"
#include "lowalt/dynamics.hpp"
#include "lowalt/energy.hpp"
#include "lowalt/observation.hpp"
#include "lowalt/reward.hpp"
#include "lowalt/world.hpp"

namespace lowalt {

enum class ActionSource { kPolicy, kAdvisor };

const char* to_string(ActionSource s);

struct EnvParams {
  ChannelParams channel;
  RotorParams rotor;
  RewardWeights weights;
  SafetyRadii radii;
  RewardFlags flags;
  ObservationLayout layout;
  ObservationScales scales;
  double v_max{10.0};
  double v_limit{5.0};
  double e_total{1e6};
  double e_limit{8e5};
  int t_max{400};
  double collision_radius{2.0};
};

struct SlotEvents {
  bool exited_area{false};
  bool entered_nfz{false};
  bool collided_bz{false};
  bool collided_ou{false};
  bool rz_speed_violation{false};
  bool landed{false};
  bool energy_exhausted{false};
  bool reached_t_max{false};
};

struct SlotRecord {
  int t{0};
  Vec2 pos{0.0, 0.0};
  Vec2 vel{0.0, 0.0};
  Vec2 action{0.0, 0.0};
  ActionSource source{ActionSource::kPolicy};
  RewardBreakdown reward;
  SlotEvents events;
  double td{0.0};
  double energy_slot{0.0};
  double energy_remaining{0.0};
};

struct EpisodeLog {
  nlohmann::json header;  // scenario seed, env seed, policy, run parameters
  std::vector<SlotRecord> slots;
  bool advisor_terminated{false};
  double target_total{0.0};
  double e_total{1e6};
  double e_limit{8e5};

  double total_reward() const;
  double collected() const;
};

std::string episode_log_to_jsonl(const EpisodeLog& log);
EpisodeLog episode_log_from_jsonl(const std::string& text);

struct StepOutcome {
  RewardBreakdown reward;
  SlotEvents events;
  double td{0.0};
  bool done{false};
};

// One data-collection episode over a fixed scenario. Deterministic given the
// scenario and the seed; the only internal randomness is the device-selection
// tie break.
class Environment {
 public:
  Environment(Scenario scenario, EnvParams params, std::uint64_t env_seed);

  const Eigen::VectorXd& reset();
  StepOutcome step(const Vec2& action, ActionSource source);

  // Ends the episode without a step (the advisor gave up). Counts as an
  // unsuccessful, non-collision termination.
  void abort_episode();

  bool done() const { return done_; }
  int t() const { return t_; }
  const Eigen::VectorXd& observation() const { return obs_; }
  const Scenario& scenario() const { return scenario_; }
  const EnvParams& params() const { return params_; }
  const std::vector<GeRuntime>& ges() const { return ges_; }
  const UavState& uav() const { return uav_; }
  const EnergyLedger& energy() const { return ledger_; }
  double last_td() const { return last_td_; }
  std::vector<VisibleOu> visible() const;
  double dist_to_landing() const;
  double min_return_energy_now() const;

  EpisodeLog& log() { return log_; }
  const EpisodeLog& log() const { return log_; }

 private:
  void encode();

  Scenario scenario_;
  EnvParams params_;
  std::uint64_t env_seed_{0};
  Rng rng_;
  UavState uav_;
  std::vector<GeRuntime> ges_;
  EnergyLedger ledger_;
  Eigen::VectorXd obs_;
  EpisodeLog log_;
  double last_td_{0.0};
  int t_{0};
  bool done_{false};
};

}  // namespace lowalt
