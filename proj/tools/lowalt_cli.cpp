#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lowalt/config.hpp"
#include "lowalt/errors.hpp"
#include "lowalt/evalkit.hpp"
#include "lowalt/orchestrator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lowalt;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kAdvisorAbort = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

int cmd_train(const std::string& config_path, const std::string& resume,
              const std::string& out_dir, bool write_logs) {
  RunConfig cfg = load_config(config_path);
  Orchestrator orch(cfg);
  if (!resume.empty()) orch.load_checkpoint(resume);

  std::ofstream log_stream;
  if (write_logs) {
    fs::create_directories(out_dir);
    log_stream.open(fs::path(out_dir) / "episodes.jsonl",
                    std::ios::binary | std::ios::app);
    orch.set_train_log_sink([&log_stream](const EpisodeLog& log) {
      log_stream << episode_log_to_jsonl(log);
      log_stream.flush();
    });
  }

  const int first_episode = orch.episodes_done();
  TrainResult result = orch.train(out_dir);

  write_file(fs::path(out_dir) / "effective_config.json",
             effective_config(orch.config()).dump(2) + "\n");
  std::ostringstream rewards;
  rewards << "episode,reward\n";
  for (std::size_t i = 0; i < result.episode_rewards.size(); ++i) {
    char value[40];
    std::snprintf(value, sizeof(value), "%.17g", result.episode_rewards[i]);
    rewards << (first_episode + static_cast<int>(i)) << ',' << value << '\n';
  }
  write_file(fs::path(out_dir) / "train_rewards.csv", rewards.str());

  std::cout << "trained episodes " << first_episode << ".." << result.episodes_done - 1
            << ", total env steps " << orch.total_steps()
            << ", advisor queries " << result.advisor_queries << "\n";
  if (result.aborted) {
    std::cerr << "run aborted: " << result.abort_reason;
    if (!result.abort_checkpoint.empty())
      std::cerr << " (resume from " << result.abort_checkpoint << ")";
    std::cerr << "\n";
    return kAdvisorAbort;
  }
  return kOk;
}

int cmd_eval(const std::string& ckpt, int episodes, std::uint64_t seed,
             const std::string& policy, const std::string& config_path,
             const std::string& out_dir) {
  RunConfig cfg;
  if (!config_path.empty()) {
    cfg = load_config(config_path);
  } else if (!ckpt.empty()) {
    json state = json::parse(read_file((fs::path(ckpt) / "trainer_state.json").string()));
    cfg = config_from_json(state.at("config"));
  } else {
    throw ValidationError("eval needs --config or --ckpt");
  }
  if (!policy.empty()) {
    (void)policy_tag_from_string(policy);
    cfg.train.policy = policy;
  }

  Orchestrator orch(cfg);
  if (orch.has_agent()) {
    if (ckpt.empty())
      throw ValidationError("policy " + cfg.train.policy + " needs --ckpt weights");
    orch.load_checkpoint(ckpt);
  }

  const std::vector<EpisodeLog> logs = orch.evaluate(episodes, seed);
  std::string jsonl;
  std::vector<TaskOutcome> outcomes;
  double reward_sum = 0.0, reward_sq = 0.0;
  for (const auto& log : logs) {
    jsonl += episode_log_to_jsonl(log);
    outcomes.push_back(outcome_from_log(log));
    const double r = log.total_reward();
    reward_sum += r;
    reward_sq += r * r;
  }
  write_file(fs::path(out_dir) / "eval_logs.jsonl", jsonl);

  const double n = static_cast<double>(logs.size());
  const double mean = n > 0 ? reward_sum / n : 0.0;
  const double var = n > 0 ? std::max(0.0, reward_sq / n - mean * mean) : 0.0;
  json metrics = {{"policy", cfg.train.policy}, {"n_episodes", logs.size()},
                  {"seed", seed},              {"dcr", dcr(outcomes)},
                  {"cr", cr(outcomes)},        {"slr", slr(outcomes)},
                  {"rvr", rvr(outcomes)},      {"ecr", ecr(outcomes)},
                  {"reward_mean", mean},       {"reward_std", std::sqrt(var)}};
  write_file(fs::path(out_dir) / "metrics.json", metrics.dump(2) + "\n");
  std::cout << metrics.dump() << "\n";
  return kOk;
}

struct ReplayCheck {
  int episodes{0};
  int slots{0};
  int mismatches{0};
};

void check(bool ok, const char* what, int t, ReplayCheck& rc) {
  if (ok) return;
  ++rc.mismatches;
  std::cerr << "  slot " << t << ": " << what << " differs\n";
}

void replay_episode(const EpisodeLog& log, ReplayCheck& rc) {
  ++rc.episodes;
  const RunConfig cfg = config_from_json(log.header.at("config"));
  const std::uint64_t scenario_seed = log.header.at("scenario_seed").get<std::uint64_t>();
  const std::uint64_t env_seed = log.header.at("env_seed").get<std::uint64_t>();
  const std::string policy = log.header.value("policy", "sac");
  const bool audit_dispatch = policy == "hybrid" || policy == "sac_heuristic";

  Environment env = make_environment(cfg, scenario_seed, env_seed);
  env.reset();
  const double tol = 1e-9;
  for (const auto& rec : log.slots) {
    ++rc.slots;
    if (env.done()) {
      check(false, "episode already finished", rec.t, rc);
      break;
    }
    if (audit_dispatch) {
      const bool want = should_invoke(env, cfg.advisor.trigger);
      check(want == (rec.source == ActionSource::kAdvisor), "dispatch source",
            rec.t, rc);
    }
    env.step(rec.action, rec.source);
    const SlotRecord& got = env.log().slots.back();
    check((got.pos - rec.pos).norm() <= tol, "position", rec.t, rc);
    check((got.vel - rec.vel).norm() <= tol, "velocity", rec.t, rc);
    check(std::abs(got.reward.total - rec.reward.total) <= tol, "reward", rec.t, rc);
    check(std::abs(got.td - rec.td) <= tol, "data transfer", rec.t, rc);
    check(std::abs(got.energy_remaining - rec.energy_remaining) <= tol,
          "energy", rec.t, rc);
    const auto& ge = got.events;
    const auto& re = rec.events;
    check(ge.exited_area == re.exited_area && ge.entered_nfz == re.entered_nfz &&
              ge.collided_bz == re.collided_bz && ge.collided_ou == re.collided_ou &&
              ge.rz_speed_violation == re.rz_speed_violation &&
              ge.landed == re.landed && ge.energy_exhausted == re.energy_exhausted &&
              ge.reached_t_max == re.reached_t_max,
          "events", rec.t, rc);
  }
  if (!log.advisor_terminated && !log.slots.empty())
    check(env.done(), "final done flag", log.slots.back().t, rc);
}

int cmd_replay(const std::string& log_path) {
  const std::string text = read_file(log_path);
  ReplayCheck rc;
  // A file may hold several episodes back to back; headers mark the splits.
  std::string chunk;
  auto flush = [&]() {
    if (chunk.empty()) return;
    replay_episode(episode_log_from_jsonl(chunk), rc);
    chunk.clear();
  };
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.value("type", "") == "header")
      flush();
    chunk += line;
    chunk += "\n";
  }
  flush();
  std::cout << "replayed " << rc.episodes << " episode(s), " << rc.slots
            << " slot(s), " << rc.mismatches << " mismatch(es)\n";
  return rc.mismatches == 0 ? kOk : kFailure;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir) {
  json doc = json::parse(read_file(spec_path));
  SweepSpec spec = sweep_spec_from_json(doc);
  SweepResult result = run_sweep(spec, (fs::path(out_dir) / "work").string());
  write_outputs(result, out_dir);
  int failed = 0;
  for (const auto& r : result.rows) failed += r.failed ? 1 : 0;
  std::cout << result.rows.size() << " cell(s), " << failed << " failed, outputs in "
            << out_dir << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV data-collection trajectory planning: train, evaluate, "
               "replay and sweep"};
  app.require_subcommand(1);

  std::string config_path, resume, out_dir, ckpt, policy, log_path, spec_path;
  int episodes = 20;
  std::uint64_t seed = 1;
  bool write_logs = false;

  CLI::App* train = app.add_subcommand("train", "train a policy");
  train->add_option("--config", config_path, "run config JSON")->required();
  train->add_option("--resume", resume, "checkpoint directory to resume from");
  train->add_option("--out", out_dir, "output directory")->default_val("run_out");
  train->add_flag("--logs", write_logs, "write per-episode training logs");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a policy");
  eval->add_option("--ckpt", ckpt, "checkpoint directory");
  eval->add_option("--episodes", episodes, "episode count")->required();
  eval->add_option("--seed", seed, "evaluation seed")->required();
  eval->add_option("--policy", policy, "dispatch policy override");
  eval->add_option("--config", config_path, "run config JSON");
  eval->add_option("--out", out_dir, "output directory")->default_val("eval_out");

  CLI::App* replay = app.add_subcommand("replay", "verify an episode log");
  replay->add_option("--log", log_path, "episode JSONL file")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "run a sweep experiment");
  sweep->add_option("--spec", spec_path, "sweep spec JSON")->required();
  sweep->add_option("--out", out_dir, "output directory")->default_val("sweep_out");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, resume, out_dir, write_logs);
    if (eval->parsed()) return cmd_eval(ckpt, episodes, seed, policy, config_path, out_dir);
    if (replay->parsed()) return cmd_replay(log_path);
    if (sweep->parsed()) return cmd_sweep(spec_path, out_dir);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const VersionMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
