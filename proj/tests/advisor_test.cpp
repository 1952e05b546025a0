#include <doctest.h>

#include "lowalt/advisor.hpp"

// httplib must come after anything that includes Eigen.
#include <httplib.h>

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <variant>

#include "lowalt/errors.hpp"

using namespace lowalt;
using nlohmann::json;

namespace {

Scenario trigger_scenario() {
  Scenario s;
  s.area = {500.0, 500.0};
  s.take_off = {0.0, 475.0, 25.0, 25.0};   // center (12.5, 487.5)
  s.landing = {475.0, 0.0, 25.0, 25.0};
  return s;
}

PromptContext east_ge_context() {
  PromptContext c;
  c.area_x = c.area_y = 500.0;
  c.v_max = 10.0;
  c.v_limit = 5.0;
  c.dcu_pos = {0.0, 0.0};
  c.dcu_vel = {0.0, 0.0};
  c.energy_remaining = 9e5;
  c.energy_total = 1e6;
  c.ges.push_back({{100.0, 0.0}, 2.0});
  c.take_off = {0.0, 475.0, 25.0, 25.0};
  c.landing = {475.0, 0.0, 25.0, 25.0};
  return c;
}

AdvisorAction expect_action(const std::variant<AdvisorAction, AdvisorError>& v) {
  REQUIRE(std::holds_alternative<AdvisorAction>(v));
  return std::get<AdvisorAction>(v);
}

AdvisorError expect_error(const std::variant<AdvisorAction, AdvisorError>& v) {
  REQUIRE(std::holds_alternative<AdvisorError>(v));
  return std::get<AdvisorError>(v);
}

AdvisorErrorKind expect_error_kind(const std::variant<std::string, AdvisorError>& v) {
  REQUIRE(std::holds_alternative<AdvisorError>(v));
  return std::get<AdvisorError>(v).kind;
}

}  // namespace

TEST_CASE("trigger distance is inclusive at the threshold") {
  EnvParams p;
  TriggerConfig cfg;  // d_th 15

  Scenario at = trigger_scenario();
  at.bz.push_back({0.0, 460.0, 25.0, 12.5});  // top edge exactly 15 m below
  CHECK(should_invoke(Environment(at, p, 1), cfg));

  Scenario closer = trigger_scenario();
  closer.bz.push_back({0.0, 460.0, 25.0, 12.6});
  CHECK(should_invoke(Environment(closer, p, 1), cfg));

  Scenario farther = trigger_scenario();
  farther.bz.push_back({0.0, 460.0, 25.0, 12.4});
  CHECK_FALSE(should_invoke(Environment(farther, p, 1), cfg));
}

TEST_CASE("trigger classes can be switched off individually") {
  EnvParams p;
  Scenario s = trigger_scenario();
  s.bz.push_back({0.0, 460.0, 25.0, 12.5});
  const Environment env(s, p, 1);

  TriggerConfig cfg;
  cfg.bz = false;
  CHECK_FALSE(should_invoke(env, cfg));
  cfg.bz = true;
  cfg.nfz = cfg.rz = cfg.ou = false;
  CHECK(should_invoke(env, cfg));
}

TEST_CASE("obstacle users trigger only while inside perception range") {
  EnvParams p;  // perception 20
  TriggerConfig cfg;
  cfg.d_th = 25.0;

  Scenario near = trigger_scenario();
  OuTrack tr;
  for (int k = 0; k <= 50; ++k) tr.pos.push_back({12.5, 467.5});  // 20 m away
  for (int k = 0; k < 50; ++k) tr.vel.push_back({0.0, 0.0});
  near.ous.push_back(tr);
  CHECK(should_invoke(Environment(near, p, 1), cfg));

  Scenario blind = trigger_scenario();
  OuTrack far = tr;
  for (auto& q : far.pos) q = {12.5, 465.5};  // 22 m: past perception
  blind.ous.push_back(far);
  CHECK_FALSE(should_invoke(Environment(blind, p, 1), cfg));
}

TEST_CASE("prompt carries all five guidelines in order") {
  PromptContext ctx = east_ge_context();
  const std::string p = build_prompt(ctx);
  const auto pos1 = p.find("1. Safety: ");
  const auto pos2 = p.find("2. Compliance: ");
  const auto pos3 = p.find("3. Data efficiency: ");
  const auto pos4 = p.find("4. Energy efficiency: ");
  const auto pos5 = p.find("5. Stability: ");
  CHECK(pos1 != std::string::npos);
  CHECK(pos2 != std::string::npos);
  CHECK(pos3 != std::string::npos);
  CHECK(pos4 != std::string::npos);
  CHECK(pos5 != std::string::npos);
  CHECK(pos1 < pos2);
  CHECK(pos2 < pos3);
  CHECK(pos3 < pos4);
  CHECK(pos4 < pos5);
  CHECK(build_prompt(ctx) == p);  // deterministic text
}

TEST_CASE("each ablation removes exactly its item and renumbers the rest") {
  const PromptContext base = east_ge_context();
  const std::string full = build_prompt(base);
  const std::string head_mark = "\nThink step by step";
  const std::string tail_mark = "\nAction space:";
  const std::string full_head = full.substr(0, full.find(head_mark));
  const std::string full_tail = full.substr(full.find(tail_mark));

  const char* labels[5] = {"Safety", "Compliance", "Data efficiency",
                           "Energy efficiency", "Stability"};
  for (int off = 0; off < 5; ++off) {
    PromptContext ctx = base;
    ctx.ablation.safety = off != 0;
    ctx.ablation.compliance = off != 1;
    ctx.ablation.data_efficiency = off != 2;
    ctx.ablation.energy_efficiency = off != 3;
    ctx.ablation.stability = off != 4;
    const std::string p = build_prompt(ctx);
    CAPTURE(off);
    CHECK(p.find(std::string(labels[off]) + ":") == std::string::npos);
    for (int keep = 0; keep < 5; ++keep)
      if (keep != off)
        CHECK(p.find(std::string(labels[keep]) + ":") != std::string::npos);
    CHECK(p.find("4. ") != std::string::npos);
    CHECK(p.find("5. ") == std::string::npos);
    // The state digest and the output contract do not depend on the ablation.
    CHECK(p.substr(0, p.find(head_mark)) == full_head);
    CHECK(p.substr(p.find(tail_mark)) == full_tail);
  }
}

TEST_CASE("prompt reflects the digested state") {
  PromptContext ctx = east_ge_context();
  ctx.nfz.push_back({200.0, 200.0, 50.0, 60.0});
  ctx.inside_rz = true;
  const std::string p = build_prompt(ctx);
  CHECK(p.find("(0.00, 0.00)") != std::string::npos);
  CHECK(p.find("GE at (100.00, 0.00) with 2.000 Mbit left") != std::string::npos);
  CHECK(p.find("rect(x=200.00, y=200.00, w=50.00, h=60.00)") != std::string::npos);
  CHECK(p.find("- Buildings: none") != std::string::npos);
  CHECK(p.find("currently inside a restricted zone") != std::string::npos);
  CHECK(p.find("sqrt(vx^2 + vy^2) <= 10.0") != std::string::npos);

  ctx.inside_rz = false;
  CHECK(build_prompt(ctx).find("currently inside") == std::string::npos);
}

TEST_CASE("the documented reply form parses verbatim") {
  const auto v = extract_action(
      "{\"vx\": 4.2, \"vy\": 1.6, \"Confidence\": 0.86, \"Reasoning\": "
      "\"one short sentence\"}",
      10.0);
  const AdvisorAction a = expect_action(v);
  CHECK(a.velocity.x() == 4.2);
  CHECK(a.velocity.y() == 1.6);
  CHECK(a.confidence == 0.86);
  CHECK(a.reasoning == "one short sentence");
}

TEST_CASE("extraction tolerates prose and nested braces") {
  const AdvisorAction buried = expect_action(extract_action(
      "Sure thing! Based on the state, {\"vx\": 1.0, \"vy\": 2.0} should work.",
      10.0));
  CHECK(buried.velocity == Vec2{1.0, 2.0});
  CHECK(buried.confidence == 0.5);  // default when absent

  const AdvisorAction braces = expect_action(extract_action(
      "{\"vx\": 1, \"vy\": 0, \"Reasoning\": \"avoid the {NFZ} ahead}\"}", 10.0));
  CHECK(braces.reasoning == "avoid the {NFZ} ahead}");

  const AdvisorAction lower = expect_action(extract_action(
      "{\"vx\": 0, \"vy\": 1, \"confidence\": 0.25}", 10.0));
  CHECK(lower.confidence == 0.25);
}

TEST_CASE("extraction rejects garbage with the right error kinds") {
  CHECK(expect_error(extract_action("sorry, I cannot help with that", 10.0)).kind ==
        AdvisorErrorKind::kParseFailure);
  CHECK(expect_error(extract_action("{\"vy\": 1.0}", 10.0)).kind ==
        AdvisorErrorKind::kParseFailure);
  CHECK(expect_error(extract_action("{\"vx\": \"fast\", \"vy\": 1}", 10.0)).kind ==
        AdvisorErrorKind::kParseFailure);
  CHECK(expect_error(extract_action("{\"vx\": 1, \"vy\": ", 10.0)).kind ==
        AdvisorErrorKind::kParseFailure);
  // The first balanced object wins even when a better one follows.
  CHECK(expect_error(extract_action("{} {\"vx\": 1, \"vy\": 2}", 10.0)).kind ==
        AdvisorErrorKind::kParseFailure);

  CHECK(expect_error(extract_action("{\"vx\": 8, \"vy\": 8}", 10.0)).kind ==
        AdvisorErrorKind::kSpeedBound);
  // The bound itself is legal.
  CHECK(expect_action(extract_action("{\"vx\": 10, \"vy\": 0}", 10.0)).velocity ==
        Vec2{10.0, 0.0});
}

TEST_CASE("advise succeeds on the tenth attempt with a shared budget") {
  const PromptContext ctx = east_ge_context();
  int calls = 0;
  const AdvisorFn fn = [&](const std::string&) -> std::variant<std::string, AdvisorError> {
    ++calls;
    if (calls < 10) return std::string("no JSON here");
    return std::string("{\"vx\": 1, \"vy\": 0}");
  };
  const AdviseOutcome out = advise(fn, ctx, {});
  CHECK(out.attempts == 10);
  CHECK_FALSE(out.terminate);
  REQUIRE(out.action.has_value());
  CHECK(out.action->velocity == Vec2{1.0, 0.0});
}

TEST_CASE("advise terminates after ten over-speed replies") {
  const PromptContext ctx = east_ge_context();
  int calls = 0;
  const AdvisorFn fn = [&](const std::string&) -> std::variant<std::string, AdvisorError> {
    ++calls;
    return std::string("{\"vx\": 99, \"vy\": 0}");
  };
  const AdviseOutcome out = advise(fn, ctx, {});
  CHECK(out.terminate);
  CHECK(out.attempts == 10);
  CHECK(calls == 10);
  REQUIRE(out.last_error.has_value());
  CHECK(out.last_error->kind == AdvisorErrorKind::kSpeedBound);
}

TEST_CASE("a valid first reply needs one attempt") {
  const PromptContext ctx = east_ge_context();
  const AdvisorFn fn = [](const std::string&) -> std::variant<std::string, AdvisorError> {
    return std::string("{\"vx\": 0, \"vy\": -3}");
  };
  const AdviseOutcome out = advise(fn, ctx, {});
  CHECK(out.attempts == 1);
  CHECK(out.action.has_value());
}

TEST_CASE("separate budgets count failure kinds independently") {
  const PromptContext ctx = east_ge_context();
  int calls = 0;
  // Alternate 9 parse failures and 9 over-speed replies, then a valid one:
  // a shared budget would give up at ten, separate budgets survive to 19.
  const AdvisorFn fn = [&](const std::string&) -> std::variant<std::string, AdvisorError> {
    ++calls;
    if (calls >= 19) return std::string("{\"vx\": 2, \"vy\": 2}");
    if (calls % 2) return std::string("beep");
    return std::string("{\"vx\": 50, \"vy\": 0}");
  };
  RetryPolicy split;
  split.separate_budgets = true;
  const AdviseOutcome out = advise(fn, ctx, split);
  CHECK_FALSE(out.terminate);
  CHECK(out.attempts == 19);

  calls = 0;
  const AdviseOutcome shared = advise(fn, ctx, {});
  CHECK(shared.terminate);
  CHECK(shared.attempts == 10);
}

TEST_CASE("scripted advisor flies at cruise speed toward the loaded device") {
  const PromptContext ctx = east_ge_context();
  const std::string reply = scripted_advisor_response(ctx, {});
  const AdvisorAction a = expect_action(extract_action(reply, ctx.v_max));
  CHECK(a.velocity.x() == doctest::Approx(7.0 * 0.9999).epsilon(1e-4));
  CHECK(a.velocity.y() == 0.0);
  CHECK(a.confidence == 1.0);  // nothing within the trigger distance
  CHECK(a.reasoning.find("nearest loaded GE") != std::string::npos);
  CHECK(scripted_advisor_response(ctx, {}) == reply);  // deterministic
}

TEST_CASE("scripted advisor heads home once the data is gone") {
  PromptContext ctx = east_ge_context();
  ctx.ges.clear();
  const AdvisorAction a =
      expect_action(extract_action(scripted_advisor_response(ctx, {}), ctx.v_max));
  CHECK(a.velocity.x() > 0.0);
  CHECK(a.velocity.y() > 0.0);  // landing center is northeast of the origin
  CHECK(a.velocity.norm() == doctest::Approx(7.0 * 0.9999).epsilon(1e-4));
  CHECK(a.reasoning.find("the landing area") != std::string::npos);
}

TEST_CASE("scripted advisor bends away from a nearby obstacle user") {
  PromptContext ctx = east_ge_context();
  VisibleOu ou;
  ou.pos = {10.0, 5.0};
  ou.dist = ou.pos.norm();
  ctx.visible.push_back(ou);
  const AdvisorAction a =
      expect_action(extract_action(scripted_advisor_response(ctx, {}), ctx.v_max));
  CHECK(a.velocity.y() < 0.0);  // pushed south of the straight-east bearing
  CHECK(a.velocity.norm() <= ctx.v_max);
  CHECK(a.confidence < 1.0);
}

TEST_CASE("scripted advisor respects the restricted-zone speed limit") {
  PromptContext ctx = east_ge_context();
  ctx.inside_rz = true;
  const AdvisorAction a =
      expect_action(extract_action(scripted_advisor_response(ctx, {}), ctx.v_max));
  CHECK(a.velocity.norm() <= ctx.v_limit);
  CHECK(a.velocity.norm() > ctx.v_limit * 0.99);
}

TEST_CASE("scripted advisor never breaches the bound even when crowded") {
  PromptContext ctx = east_ge_context();
  VisibleOu behind;
  behind.pos = {-1.0, 0.0};
  behind.dist = 1.0;
  ctx.visible.push_back(behind);  // shoves the command east, same as the goal
  const std::string reply = scripted_advisor_response(ctx, {});
  const AdvisorAction a = expect_action(extract_action(reply, ctx.v_max));
  CHECK(a.velocity.norm() <= ctx.v_max);
  CHECK(a.velocity.norm() > 9.9);
}

TEST_CASE("scripted confidence scales with the nearest threat") {
  PromptContext ctx = east_ge_context();
  VisibleOu ou;
  ou.pos = {0.0, 7.5};
  ou.dist = 7.5;
  ctx.visible.push_back(ou);
  const AdvisorAction a =
      expect_action(extract_action(scripted_advisor_response(ctx, {}), ctx.v_max));
  CHECK(a.confidence == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("hash function matches the published vectors") {
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("recorded fixtures replay in order and stick on the last reply") {
  const std::string path = "/tmp/lowalt_advisor_fixture_test.jsonl";
  int serial = 0;
  const AdvisorFn inner = [&](const std::string& prompt) -> std::variant<std::string, AdvisorError> {
    if (prompt == "fail") return AdvisorError{AdvisorErrorKind::kTransport, "down"};
    return "{\"vx\": " + std::to_string(++serial) + ", \"vy\": 0}";
  };
  {
    AdvisorRecorder rec(inner, path);
    CHECK(std::holds_alternative<std::string>(rec("alpha")));
    CHECK(std::holds_alternative<std::string>(rec("alpha")));
    CHECK(std::holds_alternative<std::string>(rec("beta")));
    CHECK(std::holds_alternative<AdvisorError>(rec("fail")));  // not recorded
  }

  ReplayAdvisor replay(path);
  CHECK(std::get<std::string>(replay("alpha")).find("\"vx\": 1") != std::string::npos);
  CHECK(std::get<std::string>(replay("alpha")).find("\"vx\": 2") != std::string::npos);
  CHECK(std::get<std::string>(replay("alpha")).find("\"vx\": 2") != std::string::npos);
  CHECK(std::get<std::string>(replay("beta")).find("\"vx\": 3") != std::string::npos);
  CHECK(expect_error_kind(replay("fail")) == AdvisorErrorKind::kTransport);
  std::remove(path.c_str());
}

TEST_CASE("fixture io failures throw") {
  CHECK_THROWS_AS(AdvisorRecorder([](const std::string&) {
                    return std::variant<std::string, AdvisorError>{std::string()};
                  },
                  "/nonexistent_dir_zz/f.jsonl"),
                  IoError);
  CHECK_THROWS_AS(ReplayAdvisor("/nonexistent_dir_zz/f.jsonl"), IoError);
}

TEST_CASE("remote advisor speaks the chat-completions protocol") {
  httplib::Server svr;
  std::atomic<int> mode{0};  // 0 ok, 1 http 500, 2 malformed, 3 stall
  std::string last_auth, last_prompt;
  svr.Post("/v1/chat/completions",
           [&](const httplib::Request& req, httplib::Response& res) {
             last_auth = req.get_header_value("Authorization");
             const json body = json::parse(req.body);
             last_prompt = body["messages"][0]["content"].get<std::string>();
             if (mode == 1) {
               res.status = 500;
               return;
             }
             if (mode == 2) {
               res.set_content("not json", "text/plain");
               return;
             }
             if (mode == 3)
               std::this_thread::sleep_for(std::chrono::milliseconds(2500));
             const json reply = {
                 {"choices",
                  json::array({json{{"message",
                                     json{{"content", "{\"vx\": 1, \"vy\": 2}"}}}}})}};
             res.set_content(reply.dump(), "application/json");
           });
  const int port = svr.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread th([&] { svr.listen_after_bind(); });
  svr.wait_until_ready();

  setenv("LOWALT_TEST_KEY", "sk-test", 1);
  RemoteAdvisorConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.timeout_s = 1;
  cfg.api_key_env = "LOWALT_TEST_KEY";
  RemoteAdvisor advisor(cfg);

  const auto ok = advisor("hello advisor");
  REQUIRE(std::holds_alternative<std::string>(ok));
  CHECK(std::get<std::string>(ok) == "{\"vx\": 1, \"vy\": 2}");
  CHECK(last_auth == "Bearer sk-test");
  CHECK(last_prompt == "hello advisor");

  mode = 1;
  CHECK(expect_error_kind(advisor("x")) == AdvisorErrorKind::kTransport);
  mode = 2;
  CHECK(expect_error_kind(advisor("x")) == AdvisorErrorKind::kTransport);
  mode = 3;
  CHECK(expect_error_kind(advisor("x")) == AdvisorErrorKind::kTimeout);
  mode = 0;

  unsetenv("LOWALT_TEST_KEY");
  svr.stop();
  th.join();

  RemoteAdvisorConfig dead = cfg;
  dead.url = "http://127.0.0.1:1/v1/chat/completions";
  RemoteAdvisor unreachable(dead);
  CHECK(expect_error_kind(unreachable("x")) == AdvisorErrorKind::kTransport);

  RemoteAdvisorConfig bad = cfg;
  bad.url = "no-scheme";
  RemoteAdvisor invalid(bad);
  CHECK(expect_error_kind(invalid("x")) == AdvisorErrorKind::kTransport);
}
