#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "netrl/agent.hpp"
#include "netrl/cartpole.hpp"
#include "netrl/doorkey.hpp"
#include "netrl/env.hpp"
#include "netrl/profiles.hpp"

namespace netrl {

inline constexpr double kStabiliserThresholdRad = 5.0 * 3.14159265358979323846 / 180.0;

enum class SwitchRule {
  // Unit 0 (stabiliser) when |theta| > 5 degrees, unit 1 (recentring) otherwise.
  kCartPoleAngle,
  // Unit 0 (key-seeking) until the key is held, then unit 1 (goal navigation).
  kDoorKeyHasKey,
};

int active_unit(SwitchRule rule, const SwitchInputs& inputs);

struct SwitchEvent {
  int tick = 0;
  int from = -1;  // -1 at episode start
  int to = 0;
};

struct GraphConfig {
  double control_period_ms = 20.0;
  SwitchRule rule = SwitchRule::kCartPoleAngle;
  // Per unit: shim models between the router and the unit; nullopt means
  // the unit runs beside the environment with no channel.
  std::array<std::optional<ChannelModels>, 2> channels;
  std::uint64_t net_seed = 0;
  int max_ticks = 100'000;
};

struct GraphEpisodeResult {
  std::uint64_t seed = 0;
  double episode_return = 0.0;
  int steps = 0;
  bool success = false;
  std::vector<SwitchEvent> switches;
  std::array<int, 2> active_ticks{};
  // Observation emission to application of the action computed from it,
  // for actions that took effect, per unit.
  std::array<std::vector<double>, 2> e2e_latencies_ms;
};

// Runs one episode with a router beside the environment. Each tick the
// router picks the active unit from the current state and forwards the
// observation to it; every unit acts on its newest observation and the
// environment applies the newest fresh action from the active unit, else
// holds its previous action.
GraphEpisodeResult run_graph_episode(const GraphConfig& config, Environment& env,
                                     std::array<Agent*, 2> units, std::uint64_t seed);

// CartPole with the recentring objective: 1 - (x / x_threshold)^2 per step.
class RecenteringCartPole final : public Environment {
 public:
  explicit RecenteringCartPole(CartPoleParams params = {}) : params_(params), inner_(params) {}
  Observation reset(std::uint64_t seed) override { return inner_.reset(seed); }
  StepResult step(int action) override;
  int action_count() const override { return inner_.action_count(); }
  int default_action() const override { return inner_.default_action(); }
  bool success() const override { return inner_.success(); }
  SwitchInputs switch_inputs() const override { return inner_.switch_inputs(); }
  std::string_view name() const override { return "cartpole-recentring"; }

 private:
  CartPoleParams params_;
  CartPoleEnv inner_;
};

// Oracle controller with full state access: shortest path to the key,
// then the door, then the goal.
DoorKeyAction scripted_doorkey_action(const DoorKeyState& state);

class ScriptedDoorKeyAgent final : public Agent {
 public:
  explicit ScriptedDoorKeyAgent(const DoorKeyEnv& env) : env_(env) {}
  void begin_episode(std::uint64_t) override {}
  int act(const Observation&) override {
    return static_cast<int>(scripted_doorkey_action(env_.state()));
  }

 private:
  const DoorKeyEnv& env_;
};

}  // namespace netrl
