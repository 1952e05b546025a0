#include "lowalt/evalkit.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lowalt/config.hpp"
#include "lowalt/errors.hpp"
#include "lowalt/orchestrator.hpp"

namespace lowalt {

namespace fs = std::filesystem;
using nlohmann::json;

TaskOutcome outcome_from_log(const EpisodeLog& log) {
  TaskOutcome o;
  o.collected = log.collected();
  o.total_target = log.target_total;
  o.energy_total = log.e_total;
  for (const auto& slot : log.slots) {
    if (slot.events.collided_ou || slot.events.collided_bz ||
        slot.events.entered_nfz)
      o.collided = true;
    if (slot.events.rz_speed_violation) o.rz_violated = true;
  }
  if (!log.slots.empty()) {
    o.energy_used = log.e_total - log.slots.back().energy_remaining;
    o.landed_ok =
        log.slots.back().events.landed && o.energy_used <= log.e_limit;
  }
  return o;
}

namespace {

void require_tasks(const std::vector<TaskOutcome>& o, const char* metric) {
  if (o.empty())
    throw EmptyDenominator(std::string(metric) + " needs at least one task");
}

double count_ratio(const std::vector<TaskOutcome>& outcomes, const char* name,
                   bool (*flag)(const TaskOutcome&)) {
  require_tasks(outcomes, name);
  int n = 0;
  for (const auto& o : outcomes) n += flag(o) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(outcomes.size());
}

}  // namespace

double dcr(const std::vector<TaskOutcome>& outcomes) {
  require_tasks(outcomes, "dcr");
  double got = 0.0, want = 0.0;
  for (const auto& o : outcomes) {
    got += o.collected;
    want += o.total_target;
  }
  if (want <= 0.0) throw EmptyDenominator("dcr: no data to collect");
  return got / want;
}

double cr(const std::vector<TaskOutcome>& outcomes) {
  return count_ratio(outcomes, "cr", [](const TaskOutcome& o) { return o.collided; });
}

double slr(const std::vector<TaskOutcome>& outcomes) {
  return count_ratio(outcomes, "slr", [](const TaskOutcome& o) { return o.landed_ok; });
}

double rvr(const std::vector<TaskOutcome>& outcomes) {
  return count_ratio(outcomes, "rvr", [](const TaskOutcome& o) { return o.rz_violated; });
}

double ecr(const std::vector<TaskOutcome>& outcomes) {
  require_tasks(outcomes, "ecr");
  double used = 0.0, total = 0.0;
  for (const auto& o : outcomes) {
    used += o.energy_used;
    total += o.energy_total;
  }
  if (total <= 0.0) throw EmptyDenominator("ecr: zero total energy");
  return used / total;
}

SweepSpec sweep_spec_from_json(const json& doc) {
  SweepSpec s;
  if (!doc.is_object()) throw ValidationError("sweep spec must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "base_config") s.base_config = value;
    else if (key == "variable") s.variable = value.get<std::string>();
    else if (key == "values") s.values = std::vector<json>(value.begin(), value.end());
    else if (key == "policies") s.policies = value.get<std::vector<std::string>>();
    else if (key == "train_episodes") s.train_episodes = value.get<int>();
    else if (key == "eval_episodes") s.eval_episodes = value.get<int>();
    else if (key == "seed_base") s.seed_base = value.get<std::uint64_t>();
    else if (key == "checkpoint_dir") s.checkpoint_dir = value.get<std::string>();
    else throw ValidationError("unknown sweep field: " + key);
  }
  if (s.variable.empty()) throw ValidationError("sweep needs a variable");
  if (s.values.empty()) throw ValidationError("sweep needs a nonempty value list");
  if (s.policies.empty()) throw ValidationError("sweep needs at least one policy");
  if (s.train_episodes < 1 || s.eval_episodes < 1)
    throw ValidationError("sweep episode counts must be positive");
  return s;
}

namespace {

void set_path(json& doc, const std::string& dotted, json value) {
  json* node = &doc;
  std::size_t begin = 0;
  for (std::size_t dot = dotted.find('.'); dot != std::string::npos;
       dot = dotted.find('.', begin)) {
    node = &(*node)[dotted.substr(begin, dot - begin)];
    begin = dot + 1;
  }
  (*node)[dotted.substr(begin)] = std::move(value);
}

// Alias -> dotted config path; count aliases pin the range to one value.
std::string resolve_variable(const std::string& variable) {
  if (variable == "N_OU" || variable == "n_ou") return "scenario.n_ou";
  if (variable == "N_GE" || variable == "n_ge") return "scenario.n_ge";
  if (variable == "N_NFZ" || variable == "n_nfz") return "scenario.n_nfz";
  if (variable == "N_BZ" || variable == "n_bz") return "scenario.n_bz";
  if (variable == "N_RZ" || variable == "n_rz") return "scenario.n_rz";
  if (variable == "actor_lr") return "sac.actor_lr";
  if (variable == "critic_lr") return "sac.critic_lr";
  if (variable == "batch") return "sac.batch_size";
  if (variable == "weights") return "reward.weights";
  if (variable == "d_th") return "advisor.trigger.d_th";
  if (variable == "prompt_ablation") return "prompt_ablation";  // special form
  return variable;  // already a dotted path
}

json apply_variable(const json& base, const std::string& variable,
                    const json& value) {
  json u = base;
  const std::string path = resolve_variable(variable);
  if (path == "prompt_ablation") {
    const std::string item = value.get<std::string>();
    if (item != "complete")
      set_path(u, "advisor.ablation." + item, false);
    return u;
  }
  if (path.size() > 11 && path.compare(0, 11, "scenario.n_") == 0 &&
      value.is_number_integer()) {
    set_path(u, path, json{value.get<int>(), value.get<int>()});
    return u;
  }
  if (path == "reward.weights") {
    if (!value.is_object())
      throw ValidationError("weights sweep values must be objects");
    for (const auto& [k, v] : value.items())
      set_path(u, "reward.weights." + k, v);
    return u;
  }
  set_path(u, path, value);
  return u;
}

std::string value_label(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

EventCounts count_events(const std::vector<EpisodeLog>& logs) {
  EventCounts e;
  for (const auto& log : logs) {
    bool ou = false, bz = false, nfz = false, rz = false, landed = false,
         energy = false;
    for (const auto& slot : log.slots) {
      ou |= slot.events.collided_ou;
      bz |= slot.events.collided_bz;
      nfz |= slot.events.entered_nfz;
      rz |= slot.events.rz_speed_violation;
      landed |= slot.events.landed;
      energy |= slot.events.energy_exhausted;
    }
    e.collided_ou += ou;
    e.collided_bz += bz;
    e.entered_nfz += nfz;
    e.rz_violations += rz;
    e.landed += landed;
    e.energy_exhausted += energy;
    e.advisor_terminated += log.advisor_terminated;
  }
  return e;
}

}  // namespace

bool sweep_variable_is_eval_only(const std::string& variable) {
  const std::string path = resolve_variable(variable);
  return path == "prompt_ablation" || path.rfind("advisor.", 0) == 0;
}

SweepResult run_sweep(const SweepSpec& spec, const std::string& work_dir) {
  const bool eval_only = sweep_variable_is_eval_only(spec.variable);
  if (!eval_only && !spec.checkpoint_dir.empty())
    throw ValidationError("a shared checkpoint only fits evaluation-only sweeps");

  fs::path shared_root =
      work_dir.empty() ? fs::temp_directory_path() / "lowalt_sweep" : fs::path(work_dir);

  SweepResult result;
  // Shared checkpoints for evaluation-only variables, one per policy.
  std::vector<std::string> shared_ckpt(spec.policies.size());
  if (eval_only) {
    for (std::size_t pi = 0; pi < spec.policies.size(); ++pi) {
      if (!spec.checkpoint_dir.empty()) {
        shared_ckpt[pi] = spec.checkpoint_dir;
        continue;
      }
      json u = spec.base_config;
      set_path(u, "train.policy", spec.policies[pi]);
      set_path(u, "train.episodes", spec.train_episodes);
      set_path(u, "train.checkpoint_every", spec.train_episodes + 1);
      set_path(u, "seeds.scenario", spec.seed_base + pi * 1000);
      set_path(u, "seeds.policy", spec.seed_base + pi * 1000 + 1);
      set_path(u, "seeds.advisor", spec.seed_base + pi * 1000 + 2);
      Orchestrator orch(config_from_json(u));
      TrainResult tr = orch.train("");
      const fs::path dir = shared_root / ("shared_" + spec.policies[pi]);
      orch.save_checkpoint(dir.string());
      shared_ckpt[pi] = dir.string();
      result.series.push_back({spec.policies[pi], "shared",
                               std::move(tr.episode_rewards)});
    }
  }

  for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
    for (std::size_t pi = 0; pi < spec.policies.size(); ++pi) {
      SweepRow row;
      row.variable = spec.variable;
      row.value = value_label(spec.values[vi]);
      row.policy = spec.policies[pi];
      // Matched evaluation scenarios across policies at the same value.
      row.seed = spec.seed_base + 500000 + vi;
      try {
        json u = apply_variable(spec.base_config, spec.variable, spec.values[vi]);
        set_path(u, "train.policy", spec.policies[pi]);
        set_path(u, "train.episodes", spec.train_episodes);
        set_path(u, "train.checkpoint_every", spec.train_episodes + 1);
        set_path(u, "seeds.scenario", spec.seed_base + pi * 1000 + vi * 10);
        set_path(u, "seeds.policy", spec.seed_base + pi * 1000 + vi * 10 + 1);
        set_path(u, "seeds.advisor", spec.seed_base + pi * 1000 + vi * 10 + 2);
        RunConfig cfg = config_from_json(u);

        Orchestrator orch(cfg);
        if (eval_only) {
          if (orch.has_agent()) orch.load_checkpoint(shared_ckpt[pi]);
        } else {
          TrainResult tr = orch.train("");
          if (tr.aborted) throw IoError("training aborted: " + tr.abort_reason);
          result.series.push_back({spec.policies[pi], row.value,
                                   std::move(tr.episode_rewards)});
        }

        const std::vector<EpisodeLog> logs =
            orch.evaluate(spec.eval_episodes, row.seed);
        std::vector<TaskOutcome> outcomes;
        outcomes.reserve(logs.size());
        std::vector<double> rewards;
        rewards.reserve(logs.size());
        for (const auto& log : logs) {
          outcomes.push_back(outcome_from_log(log));
          rewards.push_back(log.total_reward());
        }
        row.dcr = dcr(outcomes);
        row.cr = cr(outcomes);
        row.slr = slr(outcomes);
        row.rvr = rvr(outcomes);
        row.ecr = ecr(outcomes);
        double mean = 0.0;
        for (double r : rewards) mean += r;
        mean /= static_cast<double>(rewards.size());
        double var = 0.0;
        for (double r : rewards) var += (r - mean) * (r - mean);
        var /= static_cast<double>(rewards.size());
        row.reward_mean = mean;
        row.reward_std = std::sqrt(var);
        row.n_episodes = static_cast<int>(logs.size());
        row.events = count_events(logs);
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_outputs(const SweepResult& result, const std::string& dir) {
  fs::create_directories(dir);

  std::ofstream metrics(fs::path(dir) / "metrics.csv", std::ios::binary);
  if (!metrics) throw IoError("cannot write metrics.csv");
  metrics << "variable,value,policy,DCR,CR,SLR,RVR,ECR,reward_mean,reward_std,"
             "n_episodes,seed\n";
  for (const auto& r : result.rows) {
    if (r.failed) continue;
    metrics << r.variable << ',' << r.value << ',' << r.policy << ','
            << fmt_double(r.dcr) << ',' << fmt_double(r.cr) << ','
            << fmt_double(r.slr) << ',' << fmt_double(r.rvr) << ','
            << fmt_double(r.ecr) << ',' << fmt_double(r.reward_mean) << ','
            << fmt_double(r.reward_std) << ',' << r.n_episodes << ','
            << r.seed << '\n';
  }
  metrics.close();

  std::ofstream rewards(fs::path(dir) / "rewards.csv", std::ios::binary);
  if (!rewards) throw IoError("cannot write rewards.csv");
  rewards << "variable,value,policy,episode,reward\n";
  const std::string variable =
      result.rows.empty() ? std::string() : result.rows.front().variable;
  for (const auto& s : result.series)
    for (std::size_t i = 0; i < s.rewards.size(); ++i)
      rewards << variable << ',' << s.value << ',' << s.policy << ',' << i
              << ',' << fmt_double(s.rewards[i]) << '\n';
  rewards.close();

  std::ofstream events(fs::path(dir) / "events.csv", std::ios::binary);
  if (!events) throw IoError("cannot write events.csv");
  events << "variable,value,policy,collided_ou,collided_bz,entered_nfz,"
            "rz_violations,landed,energy_exhausted,advisor_terminated\n";
  for (const auto& r : result.rows) {
    if (r.failed) continue;
    events << r.variable << ',' << r.value << ',' << r.policy << ','
           << r.events.collided_ou << ',' << r.events.collided_bz << ','
           << r.events.entered_nfz << ',' << r.events.rz_violations << ','
           << r.events.landed << ',' << r.events.energy_exhausted << ','
           << r.events.advisor_terminated << '\n';
  }
  events.close();

  std::ofstream failed(fs::path(dir) / "failed.csv", std::ios::binary);
  if (!failed) throw IoError("cannot write failed.csv");
  failed << "variable,value,policy,error\n";
  for (const auto& r : result.rows) {
    if (!r.failed) continue;
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    failed << r.variable << ',' << r.value << ',' << r.policy << ',' << err << '\n';
  }
}

}  // namespace lowalt
