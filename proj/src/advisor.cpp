#include "lowalt/advisor.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lowalt/errors.hpp"

namespace lowalt {

using nlohmann::json;

bool should_invoke(const Environment& env, const TriggerConfig& cfg) {
  const Vec2 p = env.uav().pos;
  double d = std::numeric_limits<double>::infinity();
  if (cfg.ou) {
    for (const auto& v : env.visible()) d = std::min(d, v.dist);
  }
  if (cfg.bz) d = std::min(d, min_dist_to_zones(p, env.scenario().bz));
  if (cfg.nfz) d = std::min(d, min_dist_to_zones(p, env.scenario().nfz));
  if (cfg.rz) d = std::min(d, min_dist_to_zones(p, env.scenario().rz));
  return d <= cfg.d_th;
}

PromptContext make_prompt_context(const Environment& env,
                                  const PromptAblation& ablation) {
  PromptContext c;
  const auto& s = env.scenario();
  c.area_x = s.area.x_size;
  c.area_y = s.area.y_size;
  c.v_max = env.params().v_max;
  c.v_limit = env.params().v_limit;
  c.dcu_pos = env.uav().pos;
  c.dcu_vel = env.uav().vel;
  c.energy_remaining = env.energy().remaining();
  c.energy_total = env.energy().total;
  for (const auto& g : env.ges())
    if (g.remaining > 0.0) c.ges.push_back({g.spec.pos, g.remaining});
  c.nfz = s.nfz;
  c.bz = s.bz;
  c.rz = s.rz;
  c.visible = env.visible();
  c.take_off = s.take_off;
  c.landing = s.landing;
  c.inside_rz = inside_any(env.uav().pos, s.rz);
  c.ablation = ablation;
  return c;
}

namespace {

void putf(std::string& out, const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  out += buf;
}

void put_point(std::string& out, const Vec2& p) {
  out += "(";
  putf(out, "%.2f", p.x());
  out += ", ";
  putf(out, "%.2f", p.y());
  out += ")";
}

void put_rect_text(std::string& out, const Rect& r) {
  out += "rect(x=";
  putf(out, "%.2f", r.x);
  out += ", y=";
  putf(out, "%.2f", r.y);
  out += ", w=";
  putf(out, "%.2f", r.w);
  out += ", h=";
  putf(out, "%.2f", r.h);
  out += ")";
}

void put_rect_list(std::string& out, const std::vector<Rect>& rs) {
  if (rs.empty()) {
    out += "none";
    return;
  }
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (i) out += "; ";
    put_rect_text(out, rs[i]);
  }
}

}  // namespace

std::string build_prompt(const PromptContext& ctx) {
  std::string p;
  p.reserve(4096);

  // Section 1: task definition and the digested observation.
  p += "You control a data-collection UAV (DCU) flying at a fixed altitude over a ";
  putf(p, "%.0f", ctx.area_x);
  p += " m x ";
  putf(p, "%.0f", ctx.area_y);
  p +=
      " m area.\n"
      "Mission: collect the remaining data from ground elements (GEs) over "
      "wireless links, avoid collisions with buildings and moving obstacle "
      "users (OUs), never enter no-fly zones (NFZs), obey the speed limit "
      "inside restricted zones (RZs), and land inside the landing area before "
      "the energy budget runs out.\n"
      "Current state:\n"
      "- DCU position: ";
  put_point(p, ctx.dcu_pos);
  p += " m, velocity: ";
  put_point(p, ctx.dcu_vel);
  p += " m/s\n- Remaining energy: ";
  putf(p, "%.0f", ctx.energy_remaining);
  p += " J of ";
  putf(p, "%.0f", ctx.energy_total);
  p += " J\n- Take-off area: ";
  put_rect_text(p, ctx.take_off);
  p += "\n- Landing area: ";
  put_rect_text(p, ctx.landing);
  p += "\n- GEs with remaining data: ";
  if (ctx.ges.empty()) {
    p += "none";
  } else {
    for (std::size_t i = 0; i < ctx.ges.size(); ++i) {
      if (i) p += "; ";
      p += "GE at ";
      put_point(p, ctx.ges[i].pos);
      p += " with ";
      putf(p, "%.3f", ctx.ges[i].remaining);
      p += " Mbit left";
    }
  }
  p += "\n- No-fly zones: ";
  put_rect_list(p, ctx.nfz);
  p += "\n- Buildings: ";
  put_rect_list(p, ctx.bz);
  p += "\n- Restricted zones (speed limit ";
  putf(p, "%.1f", ctx.v_limit);
  p += " m/s): ";
  put_rect_list(p, ctx.rz);
  p += "\n- Nearby obstacle users: ";
  if (ctx.visible.empty()) {
    p += "none";
  } else {
    for (std::size_t i = 0; i < ctx.visible.size(); ++i) {
      if (i) p += "; ";
      p += "OU at ";
      put_point(p, ctx.visible[i].pos);
      p += " moving ";
      put_point(p, ctx.visible[i].vel);
      p += " m/s";
    }
  }
  p += ctx.inside_rz ? "\n- The DCU is currently inside a restricted zone.\n"
                     : "\n";

  // Section 2: chain-of-thought guidelines, renumbered around disabled items.
  p += "\nThink step by step before answering, in this order:\n";
  int item = 0;
  auto guideline = [&](bool enabled, const char* label, const char* text) {
    if (!enabled) return;
    char head[16];
    std::snprintf(head, sizeof(head), "%d. ", ++item);
    p += head;
    p += label;
    p += ": ";
    p += text;
    p += "\n";
  };
  guideline(ctx.ablation.safety, "Safety",
            "keep a safe distance from buildings and obstacle users; predict "
            "obstacle motion one step ahead and avoid headings that close in "
            "on them.");
  guideline(ctx.ablation.compliance, "Compliance",
            "never cross into a no-fly zone; while inside a restricted zone "
            "keep speed at or below the limit.");
  guideline(ctx.ablation.data_efficiency, "Data efficiency",
            "prefer headings that approach ground elements which still hold "
            "data.");
  guideline(ctx.ablation.energy_efficiency, "Energy efficiency",
            "avoid wasteful detours and keep enough energy to reach the "
            "landing area.");
  guideline(ctx.ablation.stability, "Stability",
            "avoid abrupt reversals; keep the motion consistent with the "
            "current velocity when options are otherwise equal.");

  // Section 3: action space and the output contract.
  p += "\nAction space: a velocity command (vx, vy) in m/s with "
       "sqrt(vx^2 + vy^2) <= ";
  putf(p, "%.1f", ctx.v_max);
  p += ".\nRespond with exactly one JSON object and nothing else, in this "
       "form:\n"
       "{\"vx\": 4.2, \"vy\": 1.6, \"Confidence\": 0.86, \"Reasoning\": "
       "\"one short sentence\"}\n"
       "\"Confidence\" is a number between 0 and 1. Do not write anything "
       "outside the JSON object.\n";
  return p;
}

const char* to_string(AdvisorErrorKind k) {
  switch (k) {
    case AdvisorErrorKind::kParseFailure: return "parse_failure";
    case AdvisorErrorKind::kSpeedBound: return "speed_bound";
    case AdvisorErrorKind::kTimeout: return "timeout";
    case AdvisorErrorKind::kTransport: return "transport";
  }
  return "unknown";
}

namespace {

// First balanced {...} region outside of string literals, or npos.
std::optional<std::string> first_json_object(const std::string& raw) {
  for (std::size_t start = raw.find('{'); start != std::string::npos;
       start = raw.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
      const char c = raw[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) return raw.substr(start, i - start + 1);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::variant<AdvisorAction, AdvisorError> extract_action(const std::string& raw,
                                                         double v_max) {
  const auto span = first_json_object(raw);
  if (!span)
    return AdvisorError{AdvisorErrorKind::kParseFailure, "no JSON object found"};
  json j = json::parse(*span, nullptr, false);
  if (j.is_discarded())
    return AdvisorError{AdvisorErrorKind::kParseFailure, "malformed JSON object"};
  if (!j.is_object() || !j.contains("vx") || !j.contains("vy") ||
      !j["vx"].is_number() || !j["vy"].is_number())
    return AdvisorError{AdvisorErrorKind::kParseFailure, "vx/vy missing or not numeric"};

  AdvisorAction a;
  a.velocity = {j["vx"].get<double>(), j["vy"].get<double>()};
  if (!std::isfinite(a.velocity.x()) || !std::isfinite(a.velocity.y()))
    return AdvisorError{AdvisorErrorKind::kParseFailure, "non-finite velocity"};

  for (const char* key : {"Confidence", "confidence"}) {
    if (j.contains(key) && j[key].is_number()) {
      a.confidence = j[key].get<double>();
      break;
    }
  }
  for (const char* key : {"Reasoning", "reasoning"}) {
    if (j.contains(key) && j[key].is_string()) {
      a.reasoning = j[key].get<std::string>();
      break;
    }
  }
  if (a.velocity.norm() > v_max)
    return AdvisorError{AdvisorErrorKind::kSpeedBound, "command exceeds the speed bound"};
  return a;
}

AdviseOutcome advise(const AdvisorFn& fn, const PromptContext& ctx,
                     const RetryPolicy& retry) {
  const std::string prompt = build_prompt(ctx);
  AdviseOutcome out;
  int no_action = 0;   // transport failures and unparseable replies
  int over_speed = 0;  // well-formed but too fast
  while (true) {
    if (retry.separate_budgets
            ? (no_action >= retry.max_attempts || over_speed >= retry.max_attempts)
            : (no_action + over_speed >= retry.max_attempts)) {
      out.terminate = true;
      return out;
    }
    ++out.attempts;
    const auto reply = fn(prompt);
    if (std::holds_alternative<AdvisorError>(reply)) {
      out.last_error = std::get<AdvisorError>(reply);
      ++no_action;
      continue;
    }
    const auto parsed = extract_action(std::get<std::string>(reply), ctx.v_max);
    if (std::holds_alternative<AdvisorAction>(parsed)) {
      out.action = std::get<AdvisorAction>(parsed);
      return out;
    }
    out.last_error = std::get<AdvisorError>(parsed);
    if (out.last_error->kind == AdvisorErrorKind::kSpeedBound)
      ++over_speed;
    else
      ++no_action;
  }
}

std::string scripted_advisor_response(const PromptContext& ctx,
                                      const ScriptedAdvisorConfig& cfg) {
  const Vec2 pos = ctx.dcu_pos;

  // Attraction: nearest device that still holds data, otherwise go land.
  Vec2 target = ctx.landing.center();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : ctx.ges) {
    const double d = (g.pos - pos).norm();
    if (d < best) {
      best = d;
      target = g.pos;
    }
  }
  Vec2 v{0.0, 0.0};
  const Vec2 to_target = target - pos;
  if (to_target.norm() > 1e-12) v = to_target.normalized() * cfg.v_cruise;

  // Repulsion from anything threatening within the trigger distance.
  double d_nearest = std::numeric_limits<double>::infinity();
  auto repel = [&](const Vec2& away_dir, double d) {
    d_nearest = std::min(d_nearest, d);
    if (d > cfg.d_th) return;
    v += away_dir * (cfg.k_rep * (cfg.d_th - d) / cfg.d_th);
  };
  for (const auto& ou : ctx.visible) {
    const Vec2 delta = pos - ou.pos;
    const double d = delta.norm();
    repel(d > 1e-12 ? Vec2(delta / d) : Vec2(1.0, 0.0), d);
  }
  for (const auto* zones : {&ctx.bz, &ctx.nfz}) {
    for (const Rect& z : *zones) {
      const double d = dist_point_rect(pos, z);
      Vec2 dir;
      if (d > 1e-12) {
        const Vec2 nearest{std::clamp(pos.x(), z.x, z.x_max()),
                           std::clamp(pos.y(), z.y, z.y_max())};
        dir = (pos - nearest).normalized();
      } else {
        const Vec2 from_center = pos - z.center();
        dir = from_center.norm() > 1e-12 ? Vec2(from_center.normalized())
                                         : Vec2(1.0, 0.0);
      }
      repel(dir, d);
    }
  }

  if (ctx.inside_rz && v.norm() > ctx.v_limit) v *= ctx.v_limit / v.norm();
  if (v.norm() > ctx.v_max) v *= ctx.v_max / v.norm();
  // Headroom so the four-decimal rounding below cannot tip past the bound.
  v *= 0.9999;

  const double conf =
      std::isinf(d_nearest) ? 1.0 : std::clamp(d_nearest / cfg.d_th, 0.0, 1.0);

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"vx\": %.4f, \"vy\": %.4f, \"Confidence\": %.2f, "
                "\"Reasoning\": \"potential field: %zu repulsor(s), heading "
                "for %s\"}",
                v.x(), v.y(), conf,
                ctx.visible.size() + ctx.bz.size() + ctx.nfz.size(),
                ctx.ges.empty() ? "the landing area" : "the nearest loaded GE");
  return buf;
}

AdvisorFn make_scripted_advisor(const ScriptedAdvisorConfig& cfg,
                                const PromptContext* live_ctx) {
  return [cfg, live_ctx](const std::string&) -> std::variant<std::string, AdvisorError> {
    return scripted_advisor_response(*live_ctx, cfg);
  };
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {
std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}
}  // namespace

AdvisorRecorder::AdvisorRecorder(AdvisorFn inner, std::string path)
    : inner_(std::move(inner)), path_(std::move(path)) {
  std::ofstream out(path_, std::ios::trunc);  // start a fresh fixture
  if (!out) throw IoError("cannot open fixture for writing: " + path_);
}

std::variant<std::string, AdvisorError> AdvisorRecorder::operator()(
    const std::string& prompt) {
  auto reply = inner_(prompt);
  if (std::holds_alternative<std::string>(reply)) {
    json line = {{"prompt_hash", hash_hex(fnv1a64(prompt))},
                 {"response_text", std::get<std::string>(reply)}};
    std::ofstream out(path_, std::ios::app);
    out << line.dump() << "\n";
  }
  return reply;
}

ReplayAdvisor::ReplayAdvisor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fixture: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("fixture line: ") + e.what());
    }
    const std::string hash = j.at("prompt_hash").get<std::string>();
    responses_[std::stoull(hash, nullptr, 16)].push_back(
        j.at("response_text").get<std::string>());
  }
}

std::variant<std::string, AdvisorError> ReplayAdvisor::operator()(
    const std::string& prompt) {
  const auto it = responses_.find(fnv1a64(prompt));
  if (it == responses_.end() || it->second.empty())
    return AdvisorError{AdvisorErrorKind::kTransport,
                        "no recorded response for this prompt"};
  // Consume recorded replies in order; keep the last one for repeats.
  std::string text = it->second.front();
  if (it->second.size() > 1) it->second.pop_front();
  return text;
}

}  // namespace lowalt
