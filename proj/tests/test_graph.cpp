#include <doctest.h>

#include "netrl/graph.hpp"

using namespace netrl;

namespace {

// Always returns the same action and counts its calls.
class ConstantAgent final : public Agent {
 public:
  explicit ConstantAgent(int a) : action_(a) {}
  void begin_episode(std::uint64_t) override { calls = 0; }
  int act(const Observation&) override {
    ++calls;
    return action_;
  }
  int calls = 0;

 private:
  int action_;
};

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("switch rules") {
  CHECK(active_unit(SwitchRule::kCartPoleAngle, {0.0, false}) == 1);
  CHECK(active_unit(SwitchRule::kCartPoleAngle, {0.1, false}) == 0);
  CHECK(active_unit(SwitchRule::kCartPoleAngle, {-0.1, false}) == 0);
  // Exactly at the threshold the recentring unit stays in charge.
  CHECK(active_unit(SwitchRule::kCartPoleAngle, {kStabiliserThresholdRad, false}) == 1);
  CHECK(active_unit(SwitchRule::kDoorKeyHasKey, {0.0, false}) == 0);
  CHECK(active_unit(SwitchRule::kDoorKeyHasKey, {0.0, true}) == 1);
}

TEST_CASE("local graph applies only the active unit's actions") {
  // Unit 1 pushes right forever, so the pole falls left past 5 degrees
  // and unit 0 (pushing left) takes over.
  CartPoleEnv env;
  ConstantAgent stab(0), recentre(1);
  GraphConfig cfg;
  const auto r = run_graph_episode(cfg, env, {&stab, &recentre}, 3);
  REQUIRE(r.switches.size() >= 2);
  CHECK(r.switches[0].from == -1);
  CHECK(r.switches[0].to == 1);
  CHECK(r.switches[1].to == 0);
  CHECK(r.active_ticks[0] + r.active_ticks[1] == r.steps);
  // Units keep acting on the last observation they were sent.
  CHECK(recentre.calls == r.steps);
  CHECK(stab.calls == r.steps - r.switches[1].tick);
  CHECK(r.e2e_latencies_ms[1].size() == static_cast<std::size_t>(r.active_ticks[1]));
}

TEST_CASE("graph episodes are deterministic with an impaired channel") {
  CartPoleEnv env;
  ConstantAgent a(0), b(1);
  GraphConfig cfg;
  cfg.channels[1] = place(SyntheticModel{30, 10, 0.02}, Placement::kSplit);
  cfg.net_seed = 5;
  const auto x = run_graph_episode(cfg, env, {&a, &b}, 8);
  const auto y = run_graph_episode(cfg, env, {&a, &b}, 8);
  CHECK(x.episode_return == y.episode_return);
  CHECK(x.e2e_latencies_ms[1] == y.e2e_latencies_ms[1]);
  for (double l : x.e2e_latencies_ms[1]) CHECK(l >= 0.0);
}

TEST_CASE("doorkey graph with the scripted solver in both units") {
  DoorKeyEnv env;
  ScriptedDoorKeyAgent seek(env), go(env);
  GraphConfig cfg;
  cfg.rule = SwitchRule::kDoorKeyHasKey;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = run_graph_episode(cfg, env, {&seek, &go}, seed);
    CHECK(r.success);
    REQUIRE(r.switches.size() == 2);
    CHECK(r.switches[1].to == 1);
  }
}

}
