#include <doctest.h>

#include <cmath>

#include "lowalt/environment.hpp"

using namespace lowalt;

namespace {

Scenario base_scenario() {
  Scenario s;
  s.area = {500.0, 500.0};
  s.take_off = {0.0, 475.0, 25.0, 25.0};
  s.landing = {475.0, 0.0, 25.0, 25.0};
  GeSpec g;
  g.pos = {100.0, 400.0};
  g.dv = 2.0;
  g.tp = 0.01;
  s.ges.push_back(g);
  return s;
}

EnvParams base_params() {
  EnvParams p;
  p.t_max = 50;
  return p;
}

}  // namespace

TEST_CASE("reset starts centered, fully charged and repeatable") {
  Environment env(base_scenario(), base_params(), 7);
  const Eigen::VectorXd first = env.observation();
  CHECK(env.uav().pos == Vec2{12.5, 487.5});
  CHECK(env.uav().vel == Vec2{0.0, 0.0});
  CHECK(env.energy().remaining() == 1e6);
  CHECK(env.t() == 0);
  CHECK_FALSE(env.done());
  CHECK(first.size() == 123);

  env.step({5.0, -5.0}, ActionSource::kPolicy);
  const Eigen::VectorXd second = env.reset();
  CHECK(second == first);
  CHECK(env.energy().remaining() == 1e6);
  CHECK(env.log().slots.empty());
}

TEST_CASE("flying into a no-fly zone ends the episode") {
  Scenario s = base_scenario();
  s.nfz.push_back({0.0, 455.0, 30.0, 15.0});
  Environment env(s, base_params(), 1);
  auto out = env.step({0.0, -10.0}, ActionSource::kPolicy);
  CHECK_FALSE(out.done);
  out = env.step({0.0, -10.0}, ActionSource::kPolicy);
  CHECK(out.events.entered_nfz);
  CHECK(out.done);
  CHECK(out.reward.r4 == -0.4);
  CHECK(env.done());
  CHECK_THROWS_AS(env.step({0.0, 0.0}, ActionSource::kPolicy), EpisodeFinished);
}

TEST_CASE("touching the landing pad ends the episode") {
  Scenario s = base_scenario();
  s.take_off = {450.0, 0.0, 25.0, 25.0};
  Environment env(s, base_params(), 1);
  auto out = env.step({10.0, 0.0}, ActionSource::kPolicy);
  CHECK_FALSE(out.events.landed);
  out = env.step({10.0, 0.0}, ActionSource::kPolicy);
  CHECK(out.events.landed);
  CHECK(out.done);
}

TEST_CASE("walker contact within the collision radius is terminal") {
  Scenario s = base_scenario();
  OuTrack tr;
  for (int k = 0; k <= 50; ++k) tr.pos.push_back({12.5, 467.5});
  for (int k = 0; k < 50; ++k) tr.vel.push_back({0.0, 0.0});
  s.ous.push_back(tr);
  Environment env(s, base_params(), 1);
  auto out = env.step({0.0, -10.0}, ActionSource::kPolicy);
  CHECK_FALSE(out.events.collided_ou);  // 10 m away
  out = env.step({0.0, -10.0}, ActionSource::kPolicy);
  CHECK(out.events.collided_ou);  // direct hit
  CHECK(out.done);
  CHECK(out.td == 0.0);  // no collection on the crash slot
}

TEST_CASE("speeding inside a restricted zone is penalized but not terminal") {
  Scenario s = base_scenario();
  s.rz.push_back({0.0, 460.0, 50.0, 20.0});
  Environment env(s, base_params(), 1);
  env.step({0.0, -7.0}, ActionSource::kPolicy);
  auto out = env.step({0.0, -7.0}, ActionSource::kPolicy);
  CHECK(out.events.rz_speed_violation);
  CHECK(out.reward.r5 < 0.0);
  CHECK_FALSE(out.done);
  // Slowing down inside the zone clears the event.
  out = env.step({0.0, -4.0}, ActionSource::kPolicy);
  CHECK_FALSE(out.events.rz_speed_violation);
}

TEST_CASE("attempted exits clamp, penalize and continue") {
  Environment env(base_scenario(), base_params(), 1);
  env.step({0.0, 10.0}, ActionSource::kPolicy);
  auto out = env.step({0.0, 10.0}, ActionSource::kPolicy);
  CHECK(out.events.exited_area);
  CHECK(env.uav().pos.y() == 500.0);
  CHECK(out.reward.r6 == -0.4);
  CHECK_FALSE(out.done);
}

TEST_CASE("running past the energy budget terminates") {
  EnvParams p = base_params();
  p.e_limit = 100.0;  // a single slot costs more than this
  Environment env(base_scenario(), p, 1);
  const auto out = env.step({0.0, 0.0}, ActionSource::kPolicy);
  CHECK(out.events.energy_exhausted);
  CHECK(out.done);
}

TEST_CASE("the slot horizon terminates the episode") {
  EnvParams p = base_params();
  p.t_max = 3;
  Environment env(base_scenario(), p, 1);
  env.step({1.0, 0.0}, ActionSource::kPolicy);
  env.step({1.0, 0.0}, ActionSource::kPolicy);
  const auto out = env.step({1.0, 0.0}, ActionSource::kPolicy);
  CHECK(out.events.reached_t_max);
  CHECK(out.done);
}

TEST_CASE("advisor abort flags the log without a slot record") {
  Environment env(base_scenario(), base_params(), 1);
  env.step({1.0, 0.0}, ActionSource::kPolicy);
  env.abort_episode();
  CHECK(env.done());
  CHECK(env.log().advisor_terminated);
  CHECK(env.log().slots.size() == 1);
}

TEST_CASE("data and energy books balance over a random episode") {
  ScenarioConfig cfg;
  cfg.area_x = cfg.area_y = 250.0;
  cfg.n_ge = {5, 5};
  cfg.n_ou = {2, 2};
  cfg.n_nfz = cfg.n_bz = cfg.n_rz = {1, 1};
  cfg.t_max = 80;
  const Scenario s = sample_scenario(cfg, 11);

  EnvParams p = base_params();
  p.t_max = 80;
  p.layout = ObservationLayout::from_config(cfg);
  p.scales.area_x = p.scales.area_y = 250.0;

  Environment env(s, p, 3);
  Rng rng(5);
  double td_sum = 0.0;
  double prev_remaining = env.energy().remaining();
  while (!env.done()) {
    const Vec2 a{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
    const auto out = env.step(a, ActionSource::kPolicy);
    td_sum += out.td;
    CHECK(env.energy().remaining() < prev_remaining);  // strictly draining
    prev_remaining = env.energy().remaining();
    CHECK(env.observation().size() == p.layout.total_dim());
  }
  double left = 0.0;
  for (const auto& g : env.ges()) left += g.remaining;
  double initial = 0.0;
  for (const auto& g : s.ges) initial += g.dv;
  CHECK(td_sum == doctest::Approx(initial - left).epsilon(1e-9));
  CHECK(env.log().collected() == doctest::Approx(td_sum));
  CHECK(env.log().target_total == doctest::Approx(initial));

  // Termination reason recorded on the last slot only.
  const auto& slots = env.log().slots;
  REQUIRE(!slots.empty());
  const auto terminal = [](const SlotEvents& e) {
    return e.entered_nfz || e.collided_bz || e.collided_ou || e.landed ||
           e.energy_exhausted || e.reached_t_max;
  };
  for (std::size_t i = 0; i + 1 < slots.size(); ++i)
    CHECK_FALSE(terminal(slots[i].events));
  CHECK(terminal(slots.back().events));
}

TEST_CASE("identical seeds replay identical episodes") {
  ScenarioConfig cfg;
  cfg.t_max = 40;
  const Scenario s = sample_scenario(cfg, 21);
  EnvParams p = base_params();
  p.t_max = 40;

  auto run = [&]() {
    Environment env(s, p, 77);
    Rng rng(9);
    while (!env.done())
      env.step({rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)},
               ActionSource::kPolicy);
    return episode_log_to_jsonl(env.log());
  };
  CHECK(run() == run());
}

TEST_CASE("episode logs round-trip byte for byte") {
  Scenario s = base_scenario();
  s.rz.push_back({0.0, 440.0, 60.0, 30.0});
  Environment env(s, base_params(), 2);
  Rng rng(4);
  while (!env.done())
    env.step({rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)},
             ActionSource::kPolicy);
  env.log().header = {{"scenario_seed", 21}, {"env_seed", 2}, {"policy", "test"}};
  const std::string t1 = episode_log_to_jsonl(env.log());
  const EpisodeLog back = episode_log_from_jsonl(t1);
  const std::string t2 = episode_log_to_jsonl(back);
  CHECK(t1 == t2);
  CHECK(back.slots.size() == env.log().slots.size());
  CHECK(back.target_total == env.log().target_total);
}

TEST_CASE("malformed logs are rejected") {
  CHECK_THROWS_AS(episode_log_from_jsonl(""), ParseError);
  CHECK_THROWS_AS(episode_log_from_jsonl("{\"t\":0}\n"), ParseError);
  CHECK_THROWS_AS(episode_log_from_jsonl("not json\n"), ParseError);
}
