#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lowalt/environment.hpp"

namespace lowalt {

// Per-episode facts the metrics are computed from.
struct TaskOutcome {
  double collected{0.0};
  double total_target{0.0};
  bool collided{false};     // OU or building contact, or no-fly-zone entry
  bool landed_ok{false};    // final position in the landing area within budget
  bool rz_violated{false};  // any speeding slot inside a restricted zone
  double energy_used{0.0};
  double energy_total{1.0};
};

TaskOutcome outcome_from_log(const EpisodeLog& log);

// Ratios over a batch of tasks. Sum-of-sums for the data and energy ratios,
// count ratios for the rest. All throw EmptyDenominator on empty input.
double dcr(const std::vector<TaskOutcome>& outcomes);
double cr(const std::vector<TaskOutcome>& outcomes);
double slr(const std::vector<TaskOutcome>& outcomes);
double rvr(const std::vector<TaskOutcome>& outcomes);
double ecr(const std::vector<TaskOutcome>& outcomes);

struct SweepSpec {
  nlohmann::json base_config = nlohmann::json::object();  // user-form overrides
  std::string variable;                 // alias (N_OU, d_th, ...) or dotted path
  std::vector<nlohmann::json> values;
  std::vector<std::string> policies;
  int train_episodes{500};
  int eval_episodes{20};
  std::uint64_t seed_base{1};
  // Optional pre-trained checkpoint for evaluation-only variables.
  std::string checkpoint_dir;
};

SweepSpec sweep_spec_from_json(const nlohmann::json& doc);

// Variables that only change inference-time behavior share one trained
// checkpoint per policy; everything else trains per cell.
bool sweep_variable_is_eval_only(const std::string& variable);

struct EventCounts {
  int collided_ou{0};
  int collided_bz{0};
  int entered_nfz{0};
  int rz_violations{0};
  int landed{0};
  int energy_exhausted{0};
  int advisor_terminated{0};
};

struct SweepRow {
  std::string variable;
  std::string value;  // printable form
  std::string policy;
  bool failed{false};
  std::string error;
  double dcr{0.0}, cr{0.0}, slr{0.0}, rvr{0.0}, ecr{0.0};
  double reward_mean{0.0};
  double reward_std{0.0};  // population standard deviation
  int n_episodes{0};
  std::uint64_t seed{0};
  EventCounts events;
};

struct TrainSeries {
  std::string policy;
  std::string value;  // "shared" when one run serves every value
  std::vector<double> rewards;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<TrainSeries> series;
};

// Sequential cells; a failing cell is recorded and the sweep continues.
// work_dir holds shared checkpoints; pass "" to keep them in a temp dir.
SweepResult run_sweep(const SweepSpec& spec, const std::string& work_dir = "");

// metrics.csv, rewards.csv, events.csv, failed.csv. Stable order, LF
// endings; reruns of the same sweep reproduce the bytes.
void write_outputs(const SweepResult& result, const std::string& dir);

}  // namespace lowalt
