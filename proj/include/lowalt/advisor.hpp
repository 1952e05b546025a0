#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lowalt/environment.hpp"

namespace lowalt {

// When to ask for help: any enabled obstacle class within d_th meters.
// Obstacle users count only while inside perception range.
struct TriggerConfig {
  double d_th{15.0};
  bool ou{true};
  bool bz{true};
  bool nfz{true};
  bool rz{true};
};

bool should_invoke(const Environment& env, const TriggerConfig& cfg);

// Guideline toggles for the reasoning section of the prompt. Disabling one
// drops its item and renumbers the rest.
struct PromptAblation {
  bool safety{true};
  bool compliance{true};
  bool data_efficiency{true};
  bool energy_efficiency{true};
  bool stability{true};
};

// Snapshot of everything the prompt mentions, detached from the live
// environment so prompts can be built and tested standalone.
struct PromptContext {
  double area_x{500.0};
  double area_y{500.0};
  double v_max{10.0};
  double v_limit{5.0};
  Vec2 dcu_pos{0.0, 0.0};
  Vec2 dcu_vel{0.0, 0.0};
  double energy_remaining{0.0};
  double energy_total{1.0};
  struct GeInfo {
    Vec2 pos{0.0, 0.0};
    double remaining{0.0};
  };
  std::vector<GeInfo> ges;  // only devices that still hold data
  std::vector<Rect> nfz, bz, rz;
  std::vector<VisibleOu> visible;
  Rect take_off, landing;
  bool inside_rz{false};
  PromptAblation ablation;
};

PromptContext make_prompt_context(const Environment& env,
                                  const PromptAblation& ablation);

// Three fixed sections: task and current state, numbered reasoning
// guidelines, output contract. Deterministic text for a given context.
std::string build_prompt(const PromptContext& ctx);

struct AdvisorAction {
  Vec2 velocity{0.0, 0.0};
  double confidence{0.5};
  std::string reasoning;
};

enum class AdvisorErrorKind { kParseFailure, kSpeedBound, kTimeout, kTransport };

const char* to_string(AdvisorErrorKind k);

struct AdvisorError {
  AdvisorErrorKind kind{AdvisorErrorKind::kParseFailure};
  std::string detail;
};

// Pulls the first JSON object out of the raw reply. vx and vy are required
// numbers; Confidence defaults to 0.5, Reasoning to empty. Rejects commands
// faster than v_max.
std::variant<AdvisorAction, AdvisorError> extract_action(const std::string& raw,
                                                         double v_max);

// A query backend: prompt in, raw text (or transport failure) out.
using AdvisorFn =
    std::function<std::variant<std::string, AdvisorError>(const std::string&)>;

struct RetryPolicy {
  int max_attempts{10};
  // Default: one shared attempt budget for every failure kind. The literal
  // alternative keeps separate budgets for no-action and over-speed replies.
  bool separate_budgets{false};
};

struct AdviseOutcome {
  std::optional<AdvisorAction> action;
  int attempts{0};
  bool terminate{false};  // budget exhausted; the episode ends as a failure
  std::optional<AdvisorError> last_error;
};

AdviseOutcome advise(const AdvisorFn& fn, const PromptContext& ctx,
                     const RetryPolicy& retry);

// Deterministic stand-in for a language model: potential-field steering
// toward the nearest device with data (or the landing area), away from
// obstacles, written out as the same JSON the extractor expects.
struct ScriptedAdvisorConfig {
  double v_cruise{7.0};
  double k_rep{10.0};  // repulsion gain, defaults to the speed bound
  double d_th{15.0};
};

std::string scripted_advisor_response(const PromptContext& ctx,
                                      const ScriptedAdvisorConfig& cfg);

AdvisorFn make_scripted_advisor(const ScriptedAdvisorConfig& cfg,
                                const PromptContext* live_ctx);

std::uint64_t fnv1a64(std::string_view text);

// Captures prompt/response pairs as JSONL for later offline replay.
class AdvisorRecorder {
 public:
  AdvisorRecorder(AdvisorFn inner, std::string path);
  std::variant<std::string, AdvisorError> operator()(const std::string& prompt);

 private:
  AdvisorFn inner_;
  std::string path_;
};

// Replays a recorded fixture; responses queue up per prompt hash.
class ReplayAdvisor {
 public:
  explicit ReplayAdvisor(const std::string& path);
  std::variant<std::string, AdvisorError> operator()(const std::string& prompt);

 private:
  std::map<std::uint64_t, std::deque<std::string>> responses_;
};

// HTTP chat-completions client. The API key comes from the environment
// variable named in the config, never from the file itself.
struct RemoteAdvisorConfig {
  std::string url{"http://127.0.0.1:8080/v1/chat/completions"};
  std::string model{"advisor"};
  double temperature{0.2};
  int timeout_s{30};
  std::string api_key_env{"ADVISOR_API_KEY"};
};

class RemoteAdvisor {
 public:
  explicit RemoteAdvisor(RemoteAdvisorConfig cfg);
  std::variant<std::string, AdvisorError> operator()(const std::string& prompt);

 private:
  RemoteAdvisorConfig cfg_;
};

}  // namespace lowalt
