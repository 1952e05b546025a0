#include "lowalt/orchestrator.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "lowalt/errors.hpp"

namespace lowalt {

namespace fs = std::filesystem;
using nlohmann::json;

PolicyTag policy_tag_from_string(const std::string& s) {
  if (s == "heuristic") return PolicyTag::kHeuristic;
  if (s == "sac") return PolicyTag::kSac;
  if (s == "sac_heuristic") return PolicyTag::kSacHeuristic;
  if (s == "sac_llm_fixed_fp") return PolicyTag::kSacLlmFixedFp;
  if (s == "hybrid") return PolicyTag::kHybrid;
  throw ValidationError("unknown policy: " + s);
}

const char* to_string(PolicyTag t) {
  switch (t) {
    case PolicyTag::kHeuristic: return "heuristic";
    case PolicyTag::kSac: return "sac";
    case PolicyTag::kSacHeuristic: return "sac_heuristic";
    case PolicyTag::kSacLlmFixedFp: return "sac_llm_fixed_fp";
    case PolicyTag::kHybrid: return "hybrid";
  }
  return "unknown";
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

constexpr char kBufferMagic[8] = {'l', 'a', 'b', 'u', 'f', 'f', '0', '1'};

void write_buffer(const fs::path& path, const ReplayBuffer& buffer, int obs_dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kBufferMagic, sizeof(kBufferMagic));
  const std::uint64_t dim = static_cast<std::uint64_t>(obs_dim);
  const std::uint64_t n = buffer.size();
  const std::uint64_t head = buffer.head();
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&head), sizeof(head));
  for (std::uint64_t i = 0; i < n; ++i) {
    const Transition& t = buffer.at(i);
    out.write(reinterpret_cast<const char*>(t.obs.data()), obs_dim * sizeof(double));
    out.write(reinterpret_cast<const char*>(t.next_obs.data()), obs_dim * sizeof(double));
    const double a[2] = {t.action.x(), t.action.y()};
    out.write(reinterpret_cast<const char*>(a), sizeof(a));
    out.write(reinterpret_cast<const char*>(&t.reward), sizeof(double));
    const unsigned char done = t.done ? 1 : 0;
    const unsigned char source = t.source == ActionSource::kAdvisor ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&done), 1);
    out.write(reinterpret_cast<const char*>(&source), 1);
  }
}

void read_buffer(const fs::path& path, ReplayBuffer& buffer, int obs_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBufferMagic, sizeof(magic)) != 0)
    throw VersionMismatch("replay buffer sidecar has an unknown format");
  std::uint64_t dim = 0, n = 0, head = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&head), sizeof(head));
  if (!in || dim != static_cast<std::uint64_t>(obs_dim))
    throw ConfigMismatch("replay buffer observation width differs");
  std::vector<Transition> data;
  data.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Transition t;
    t.obs.resize(obs_dim);
    t.next_obs.resize(obs_dim);
    in.read(reinterpret_cast<char*>(t.obs.data()), obs_dim * sizeof(double));
    in.read(reinterpret_cast<char*>(t.next_obs.data()), obs_dim * sizeof(double));
    double a[2];
    in.read(reinterpret_cast<char*>(a), sizeof(a));
    t.action = {a[0], a[1]};
    in.read(reinterpret_cast<char*>(&t.reward), sizeof(double));
    unsigned char done = 0, source = 0;
    in.read(reinterpret_cast<char*>(&done), 1);
    in.read(reinterpret_cast<char*>(&source), 1);
    t.done = done != 0;
    t.source = source ? ActionSource::kAdvisor : ActionSource::kPolicy;
    data.push_back(std::move(t));
  }
  if (!in) throw ParseError("replay buffer sidecar is truncated");
  buffer.restore(std::move(data), head);
}

// Compatibility for resume and cross-policy evaluation: the physics and the
// learner shape must match; dispatch policy, advisor knobs, seeds and the
// episode budget may differ (those are run controls, not state shape).
bool compatible_configs(const RunConfig& a, const RunConfig& b) {
  json ja = config_to_json(a);
  json jb = config_to_json(b);
  for (const char* section : {"advisor", "train", "seeds"}) {
    ja.erase(section);
    jb.erase(section);
  }
  return ja == jb;
}

// Advisor responses travel as the same JSON a remote model would produce, so
// the heuristic-as-advisor path exercises the full extraction pipeline.
std::string format_velocity_response(const Vec2& v, double v_max,
                                     const char* reasoning) {
  Vec2 cmd = clip_speed(v, v_max);
  cmd *= 0.9999;  // keep the four-decimal rounding under the bound
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "{\"vx\": %.4f, \"vy\": %.4f, \"Confidence\": 1.00, "
                "\"Reasoning\": \"%s\"}",
                cmd.x(), cmd.y(), reasoning);
  return buf;
}

}  // namespace

Orchestrator::Orchestrator(RunConfig cfg)
    : cfg_(std::move(cfg)),
      tag_(policy_tag_from_string(cfg_.train.policy)),
      env_params_(env_params(cfg_)),
      scenario_rng_(cfg_.seeds.scenario),
      policy_rng_(cfg_.seeds.policy),
      advisor_rng_(cfg_.seeds.advisor) {
  heuristic_.d_min = cfg_.radii.d_min;
  heuristic_.d_safe = cfg_.radii.d_safe;
  if (tag_ != PolicyTag::kHeuristic) {
    agent_ = std::make_unique<SacAgent>(cfg_.sac, cfg_.seeds.policy);
    buffer_ = std::make_unique<ReplayBuffer>(cfg_.sac.buffer_capacity);
  }
  advisor_ = resolve_advisor();
}

void Orchestrator::bind_advisor(AdvisorFn fn) { advisor_ = std::move(fn); }
void Orchestrator::set_step_observer(StepObserver cb) { observer_ = std::move(cb); }
void Orchestrator::set_train_log_sink(LogSink cb) { log_sink_ = std::move(cb); }

AdvisorFn Orchestrator::resolve_advisor() {
  if (tag_ == PolicyTag::kSacHeuristic) {
    // The baseline policy dressed up as an advisor; shared dispatch path.
    return [this](const std::string&) -> std::variant<std::string, AdvisorError> {
      return format_velocity_response(heuristic_act(*live_env_, heuristic_),
                                      cfg_.v_max, "greedy detour baseline");
    };
  }
  if (cfg_.advisor.mode == "scripted")
    return make_scripted_advisor(cfg_.advisor.scripted, &live_ctx_);
  if (cfg_.advisor.mode == "replay") {
    auto replay = std::make_shared<ReplayAdvisor>(cfg_.advisor.replay_path);
    return [replay](const std::string& p) { return (*replay)(p); };
  }
  auto remote = std::make_shared<RemoteAdvisor>(cfg_.advisor.remote);
  return [remote](const std::string& p) { return (*remote)(p); };
}

Vec2 Orchestrator::random_disc_action(Rng& rng) const {
  const double r = cfg_.v_max * std::sqrt(rng.uniform());
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  return {r * std::cos(theta), r * std::sin(theta)};
}

Orchestrator::Dispatch Orchestrator::choose_action(Environment& env,
                                                   bool training,
                                                   Rng& policy_rng,
                                                   Rng& advisor_rng,
                                                   TrainResult* stats) {
  Dispatch d;
  bool want_advisor = false;
  if (tag_ == PolicyTag::kHybrid || tag_ == PolicyTag::kSacHeuristic) {
    want_advisor = should_invoke(env, cfg_.advisor.trigger);
  } else if (tag_ == PolicyTag::kSacLlmFixedFp) {
    want_advisor = advisor_rng.uniform() < cfg_.train.fp;
  }

  if (want_advisor) {
    live_env_ = &env;
    live_ctx_ = make_prompt_context(env, cfg_.advisor.ablation);
    const AdviseOutcome out = advise(advisor_, live_ctx_, cfg_.advisor.retry);
    if (stats) ++stats->advisor_queries;
    if (out.terminate) {
      if (stats) ++stats->advisor_terminations;
      d.episode_failed = true;
      d.transport = out.last_error &&
                    (out.last_error->kind == AdvisorErrorKind::kTimeout ||
                     out.last_error->kind == AdvisorErrorKind::kTransport);
      return d;
    }
    if (stats) ++stats->advisor_actions;
    d.action = out.action->velocity;
    d.source = ActionSource::kAdvisor;
    return d;
  }

  if (tag_ == PolicyTag::kHeuristic) {
    d.action = heuristic_act(env, heuristic_);
    return d;
  }
  if (training && total_steps_ < cfg_.sac.warmup_steps) {
    d.action = random_disc_action(policy_rng);
    return d;
  }
  d.action = agent_->act(env.observation(), training, policy_rng);
  return d;
}

Orchestrator::EpisodeRun Orchestrator::run_episode(Environment& env,
                                                   bool training,
                                                   Rng& policy_rng,
                                                   Rng& advisor_rng,
                                                   TrainResult* stats) {
  EpisodeRun run;
  while (!env.done()) {
    Dispatch d = choose_action(env, training, policy_rng, advisor_rng, stats);
    if (d.episode_failed) {
      env.abort_episode();
      run.transport_abort = d.transport;
      break;
    }
    const Eigen::VectorXd obs_before = env.observation();
    const StepOutcome out = env.step(d.action, d.source);
    ++run.steps;
    if (training && agent_) {
      buffer_->push({obs_before, env.observation(), d.action, out.reward.total,
                     out.done, d.source});
      ++total_steps_;
    }
    if (observer_) observer_(env, d.action, d.source);
  }
  live_env_ = nullptr;
  return run;
}

TrainResult Orchestrator::train(const std::string& out_dir) {
  TrainResult result;
  if (!out_dir.empty()) fs::create_directories(out_dir);

  auto checkpoint_name = [&](int ep) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ckpt_ep%06d", ep);
    return (fs::path(out_dir) / buf).string();
  };

  while (episodes_done_ < cfg_.train.episodes) {
    const std::uint64_t scenario_seed = scenario_rng_.engine()();
    const std::uint64_t env_seed = scenario_rng_.engine()();
    Environment env = make_environment(cfg_, scenario_seed, env_seed);
    env.reset();
    env.log().header = {{"scenario_seed", scenario_seed},
                        {"env_seed", env_seed},
                        {"policy", to_string(tag_)},
                        {"mode", "train"},
                        {"episode", episodes_done_},
                        {"config", effective_config(cfg_)}};

    const EpisodeRun run =
        run_episode(env, true, policy_rng_, advisor_rng_, &result);
    ++episodes_done_;
    result.episode_rewards.push_back(env.log().total_reward());
    if (log_sink_) log_sink_(env.log());

    // Algorithm note: one gradient pass per environment step taken, batched
    // after the episode ends.
    if (agent_ && total_steps_ >= cfg_.sac.warmup_steps &&
        buffer_->size() >= static_cast<std::size_t>(cfg_.sac.batch_size)) {
      for (int i = 0; i < run.steps; ++i) agent_->update(*buffer_, policy_rng_);
    }

    if (run.transport_abort) {
      result.aborted = true;
      result.abort_reason = "advisor transport budget exhausted";
      if (!out_dir.empty()) {
        result.abort_checkpoint = checkpoint_name(episodes_done_);
        save_checkpoint(result.abort_checkpoint);
      }
      break;
    }

    if (!out_dir.empty() && episodes_done_ % cfg_.train.checkpoint_every == 0)
      save_checkpoint(checkpoint_name(episodes_done_));
  }

  if (!result.aborted && !out_dir.empty())
    save_checkpoint((fs::path(out_dir) / "final").string());
  result.episodes_done = episodes_done_;
  return result;
}

std::vector<EpisodeLog> Orchestrator::evaluate(int n_episodes,
                                               std::uint64_t seed) {
  std::vector<EpisodeLog> logs;
  logs.reserve(std::max(n_episodes, 0));
  Rng scenario_rng(seed);
  Rng advisor_rng(seed ^ 0x9e3779b97f4a7c15ull);
  Rng unused_policy_rng(0);
  for (int i = 0; i < n_episodes; ++i) {
    const std::uint64_t scenario_seed = scenario_rng.engine()();
    const std::uint64_t env_seed = scenario_rng.engine()();
    Environment env = make_environment(cfg_, scenario_seed, env_seed);
    env.reset();
    env.log().header = {{"scenario_seed", scenario_seed},
                        {"env_seed", env_seed},
                        {"policy", to_string(tag_)},
                        {"mode", "eval"},
                        {"episode", i},
                        {"config", effective_config(cfg_)}};
    run_episode(env, false, unused_policy_rng, advisor_rng, nullptr);
    logs.push_back(std::move(env.log()));
  }
  return logs;
}

void Orchestrator::save_checkpoint(const std::string& dir) const {
  fs::create_directories(dir);
  json state = {{"format_version", 1},
                {"episodes_done", episodes_done_},
                {"total_steps", total_steps_},
                {"scenario_rng", scenario_rng_.state()},
                {"policy_rng", policy_rng_.state()},
                {"advisor_rng", advisor_rng_.state()},
                {"config", effective_config(cfg_)}};
  write_file(fs::path(dir) / "trainer_state.json", state.dump(2) + "\n");
  if (!agent_) return;
  SacAgent& a = *agent_;  // accessors are non-const; the nets are not mutated
  write_file(fs::path(dir) / "actor.json",
             save_weights(a.actor_spec(), a.actor(), &a.actor_opt()));
  write_file(fs::path(dir) / "critic1.json",
             save_weights(a.critic_spec(), a.critic1(), &a.critic1_opt()));
  write_file(fs::path(dir) / "critic2.json",
             save_weights(a.critic_spec(), a.critic2(), &a.critic2_opt()));
  write_file(fs::path(dir) / "target1.json",
             save_weights(a.critic_spec(), a.target1(), nullptr));
  write_file(fs::path(dir) / "target2.json",
             save_weights(a.critic_spec(), a.target2(), nullptr));
  write_buffer(fs::path(dir) / "buffer.bin", *buffer_, cfg_.sac.obs_dim);
}

void Orchestrator::load_checkpoint(const std::string& dir) {
  json state = json::parse(read_file(fs::path(dir) / "trainer_state.json"));
  if (!state.contains("format_version") || state["format_version"] != 1)
    throw VersionMismatch("unknown trainer_state format");
  const RunConfig saved = config_from_json(state.at("config"));
  if (!compatible_configs(saved, cfg_))
    throw ConfigMismatch("checkpoint was trained under an incompatible config");

  episodes_done_ = state.at("episodes_done").get<int>();
  total_steps_ = state.at("total_steps").get<long>();
  scenario_rng_.set_state(state.at("scenario_rng").get<std::string>());
  policy_rng_.set_state(state.at("policy_rng").get<std::string>());
  advisor_rng_.set_state(state.at("advisor_rng").get<std::string>());

  if (!agent_) return;
  auto load_net = [&](const char* name, bool need_opt) {
    LoadedNet net = load_weights(read_file(fs::path(dir) / name));
    const MlpSpec& want =
        std::string(name) == "actor.json" ? agent_->actor_spec() : agent_->critic_spec();
    if (net.spec.input_dim != want.input_dim || net.spec.hidden != want.hidden ||
        net.spec.output_dim != want.output_dim ||
        net.spec.activation != want.activation || net.spec.head != want.head)
      throw ConfigMismatch(std::string(name) + " network shape differs");
    if (need_opt && !net.opt)
      throw VersionMismatch(std::string(name) + " lacks optimizer state");
    return net;
  };
  LoadedNet actor = load_net("actor.json", true);
  agent_->actor() = std::move(actor.params);
  agent_->actor_opt() = std::move(*actor.opt);
  LoadedNet c1 = load_net("critic1.json", true);
  agent_->critic1() = std::move(c1.params);
  agent_->critic1_opt() = std::move(*c1.opt);
  LoadedNet c2 = load_net("critic2.json", true);
  agent_->critic2() = std::move(c2.params);
  agent_->critic2_opt() = std::move(*c2.opt);
  agent_->target1() = load_net("target1.json", false).params;
  agent_->target2() = load_net("target2.json", false).params;

  const fs::path buffer_path = fs::path(dir) / "buffer.bin";
  if (!fs::exists(buffer_path))
    throw VersionMismatch("checkpoint lacks the replay buffer sidecar");
  read_buffer(buffer_path, *buffer_, cfg_.sac.obs_dim);
}

}  // namespace lowalt
