#include <doctest.h>

#include "lowalt/observation.hpp"

using namespace lowalt;

namespace {

Scenario tiny_scenario() {
  Scenario s;
  s.area = {500.0, 500.0};
  s.take_off = {0.0, 475.0, 25.0, 25.0};
  s.landing = {475.0, 0.0, 25.0, 25.0};
  s.nfz = {{100.0, 100.0, 50.0, 60.0}};
  s.rz = {{300.0, 50.0, 80.0, 40.0}, {20.0, 200.0, 60.0, 60.0}};
  s.bz = {{200.0, 300.0, 70.0, 50.0}};
  return s;
}

std::vector<GeRuntime> two_ges() {
  std::vector<GeRuntime> g(2);
  g[0].spec.pos = {50.0, 100.0};
  g[0].remaining = 1.5;
  g[1].spec.pos = {250.0, 400.0};
  g[1].remaining = 3.0;
  return g;
}

}  // namespace

TEST_CASE("default layout is 123 wide") {
  ObservationLayout l;
  CHECK(l.total_dim() == 123);
}

TEST_CASE("layout follows the configured maxima") {
  ScenarioConfig cfg;
  cfg.n_ge = {5, 5};
  cfg.n_ou = {2, 2};
  cfg.n_nfz = cfg.n_bz = cfg.n_rz = {1, 1};
  const ObservationLayout l = ObservationLayout::from_config(cfg);
  CHECK(l.max_ge == 5);
  CHECK(l.max_zone == 1);
  CHECK(l.max_ou == 2);
  CHECK(l.total_dim() == 5 * 3 + 3 * 1 * 4 + 2 * 4 + 14);
}

TEST_CASE("block placement and normalization") {
  const Scenario s = tiny_scenario();
  const auto ges = two_ges();
  UavState uav;
  uav.pos = {250.0, 250.0};
  uav.vel = {5.0, -2.5};
  ObservationLayout layout;
  ObservationScales sc;
  sc.td_cap = 4.0;

  std::vector<VisibleOu> vis(1);
  vis[0] = {0, {260.0, 240.0}, {1.0, 2.0}, 0.0};

  const Eigen::VectorXd o = encode_observation(s, ges, uav, 5e5, 2.0, vis,
                                               layout, sc);
  REQUIRE(o.size() == 123);

  // Device block: two live entries then zero padding.
  CHECK(o[0] == doctest::Approx(50.0 / 500.0));
  CHECK(o[1] == doctest::Approx(100.0 / 500.0));
  CHECK(o[2] == doctest::Approx(1.5 / 3.0));
  CHECK(o[3] == doctest::Approx(250.0 / 500.0));
  CHECK(o[5] == doctest::Approx(1.0));
  for (int k = 6; k < 45; ++k) CHECK(o[k] == 0.0);

  // Zone blocks: no-fly first, then restricted, then buildings.
  CHECK(o[45] == doctest::Approx(100.0 / 500.0));  // nfz x
  CHECK(o[48] == doctest::Approx(60.0 / 500.0));   // nfz h
  for (int k = 49; k < 57; ++k) CHECK(o[k] == 0.0);  // nfz padding
  CHECK(o[57] == doctest::Approx(300.0 / 500.0));  // first rz
  CHECK(o[61] == doctest::Approx(20.0 / 500.0));   // second rz
  for (int k = 65; k < 69; ++k) CHECK(o[k] == 0.0);  // rz padding
  CHECK(o[69] == doctest::Approx(200.0 / 500.0));  // bz
  for (int k = 73; k < 81; ++k) CHECK(o[k] == 0.0);  // bz padding

  // Obstacle-user block: offsets over the perception range.
  CHECK(o[81] == doctest::Approx(10.0 / 20.0));
  CHECK(o[82] == doctest::Approx(-10.0 / 20.0));
  CHECK(o[83] == doctest::Approx(0.1));
  CHECK(o[84] == doctest::Approx(0.2));
  for (int k = 85; k < 109; ++k) CHECK(o[k] == 0.0);

  // Own-state block.
  CHECK(o[109] == doctest::Approx(0.5));
  CHECK(o[110] == doctest::Approx(0.5));
  CHECK(o[111] == doctest::Approx(0.5));
  CHECK(o[112] == doctest::Approx(-0.25));
  CHECK(o[113] == doctest::Approx(0.5));
  CHECK(o[114] == doctest::Approx(0.5));  // last transfer over its cap
  CHECK(o[115] == doctest::Approx(0.0));
  CHECK(o[116] == doctest::Approx(475.0 / 500.0));
  CHECK(o[119] == doctest::Approx(475.0 / 500.0));
  CHECK(o[122] == doctest::Approx(25.0 / 500.0));
}

TEST_CASE("length never depends on the element counts") {
  const Scenario s = tiny_scenario();
  UavState uav;
  uav.pos = {250.0, 250.0};
  ObservationLayout layout;
  ObservationScales sc;
  const auto empty = encode_observation(s, {}, uav, 1e6, 0.0, {}, layout, sc);
  CHECK(empty.size() == 123);
  const auto some = encode_observation(s, two_ges(), uav, 1e6, 0.0, {}, layout, sc);
  CHECK(some.size() == 123);
  // Obstacle block is zero when nobody is in range.
  for (int k = 81; k < 109; ++k) CHECK(empty[k] == 0.0);
}

TEST_CASE("too many elements for the layout is an error") {
  Scenario s = tiny_scenario();
  UavState uav;
  ObservationLayout layout;
  layout.max_ge = 1;
  ObservationScales sc;
  CHECK_THROWS_AS(encode_observation(s, two_ges(), uav, 1e6, 0.0, {}, layout, sc),
                  ShapeMismatch);
  layout = ObservationLayout{};
  layout.max_zone = 1;
  CHECK_THROWS_AS(encode_observation(s, {}, uav, 1e6, 0.0, {}, layout, sc),
                  ShapeMismatch);
}

TEST_CASE("extra visible walkers beyond the slots are dropped") {
  const Scenario s = tiny_scenario();
  UavState uav;
  uav.pos = {250.0, 250.0};
  ObservationLayout layout;
  layout.max_ou = 2;
  ObservationScales sc;
  std::vector<VisibleOu> vis(3);
  for (int i = 0; i < 3; ++i)
    vis[i] = {i, {250.0 + i + 1.0, 250.0}, {0.0, 0.0}, i + 1.0};
  const auto o = encode_observation(s, {}, uav, 1e6, 0.0, vis, layout, sc);
  const int base = 15 * 3 + 3 * 3 * 4;
  CHECK(o[base] == doctest::Approx(1.0 / 20.0));
  CHECK(o[base + 4] == doctest::Approx(2.0 / 20.0));
  CHECK(o.size() == 15 * 3 + 36 + 2 * 4 + 14);
}
