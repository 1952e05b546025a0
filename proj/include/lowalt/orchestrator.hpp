#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lowalt/config.hpp"
#include "lowalt/heuristic.hpp"
#include "lowalt/sac.hpp"

namespace lowalt {

enum class PolicyTag { kHeuristic, kSac, kSacHeuristic, kSacLlmFixedFp, kHybrid };

PolicyTag policy_tag_from_string(const std::string& s);
const char* to_string(PolicyTag t);

struct TrainResult {
  std::vector<double> episode_rewards;  // episodes run by this call
  int episodes_done{0};                 // total, including a resumed prefix
  bool aborted{false};                  // advisor transport budget exhausted
  std::string abort_reason;
  std::string abort_checkpoint;
  long advisor_queries{0};
  long advisor_actions{0};
  long advisor_terminations{0};
};

using StepObserver =
    std::function<void(const Environment&, const Vec2&, ActionSource)>;
using LogSink = std::function<void(const EpisodeLog&)>;

// The training and evaluation loop: per-episode scenario draws, action
// dispatch between the learner and the advisor, post-episode gradient
// updates, checkpoint save/resume.
class Orchestrator {
 public:
  explicit Orchestrator(RunConfig cfg);

  // Replaces the config-selected advisor backend (fixtures, mocks).
  void bind_advisor(AdvisorFn fn);
  void set_step_observer(StepObserver cb);
  // Receives every finished training episode's log.
  void set_train_log_sink(LogSink cb);

  // Runs episodes episodes_done..train.episodes-1. Checkpoints land under
  // out_dir (none written when empty).
  TrainResult train(const std::string& out_dir = "");

  // Deterministic-actor rollouts on fresh scenarios from the given seed.
  std::vector<EpisodeLog> evaluate(int n_episodes, std::uint64_t seed);

  void save_checkpoint(const std::string& dir) const;
  // Restores weights, optimizer, buffer, counters and RNG streams.
  void load_checkpoint(const std::string& dir);

  bool has_agent() const { return agent_ != nullptr; }
  SacAgent& agent() { return *agent_; }
  const RunConfig& config() const { return cfg_; }
  PolicyTag tag() const { return tag_; }
  int episodes_done() const { return episodes_done_; }
  long total_steps() const { return total_steps_; }
  const ReplayBuffer& buffer() const { return *buffer_; }

 private:
  struct Dispatch {
    Vec2 action{0.0, 0.0};
    ActionSource source{ActionSource::kPolicy};
    bool episode_failed{false};
    bool transport{false};  // failure was a transport/timeout exhaustion
  };

  Dispatch choose_action(Environment& env, bool training, Rng& policy_rng,
                         Rng& advisor_rng, TrainResult* stats);
  Vec2 random_disc_action(Rng& rng) const;
  AdvisorFn resolve_advisor();
  struct EpisodeRun {
    int steps{0};
    bool transport_abort{false};
  };
  EpisodeRun run_episode(Environment& env, bool training, Rng& policy_rng,
                         Rng& advisor_rng, TrainResult* stats);

  RunConfig cfg_;
  PolicyTag tag_;
  EnvParams env_params_;
  HeuristicParams heuristic_;
  std::unique_ptr<SacAgent> agent_;  // absent for the pure heuristic policy
  std::unique_ptr<ReplayBuffer> buffer_;
  Rng scenario_rng_, policy_rng_, advisor_rng_;
  int episodes_done_{0};
  long total_steps_{0};
  AdvisorFn advisor_;
  StepObserver observer_;
  LogSink log_sink_;
  PromptContext live_ctx_;             // refreshed before each advisor call
  const Environment* live_env_{nullptr};
};

}  // namespace lowalt
