#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "netrl/agent.hpp"
#include "netrl/env.hpp"
#include "netrl/netshim.hpp"
#include "netrl/random.hpp"

namespace netrl {

enum class DeploymentMode { kLocal, kSimNet, kEdgeReal };

DeploymentMode parse_mode(std::string_view name);
std::string_view to_string(DeploymentMode mode);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LoopConfig {
  double control_period_ms = 20.0;  // 50 Hz
  DeploymentMode mode = DeploymentMode::kLocal;
  std::optional<NetworkModel> obs_model;  // environment -> agent
  std::optional<NetworkModel> act_model;  // agent -> environment
  // Mixed with each episode seed to seed the two shims.
  std::uint64_t net_seed = 0;
  // Hard cap on ticks per episode, on top of the environment's own limit.
  int max_ticks = 100'000;
  bool record_ticks = false;

  // SimNet needs both shim models; Local forbids them.
  void validate() const;
};

// Virtual time, advanced only by the loop.
class SimulatedClock {
 public:
  explicit SimulatedClock(double period_ms)
      : period_us_(static_cast<std::uint64_t>(period_ms * 1000.0 + 0.5)) {}
  Timestamp now() const { return now_; }
  void advance() { now_.micros += period_us_; }
  void reset() { now_ = Timestamp{}; }
  std::uint64_t period_us() const { return period_us_; }

 private:
  std::uint64_t period_us_;
  Timestamp now_{};
};

struct TickRecord {
  int tick = 0;
  std::optional<std::uint32_t> obs_consumed;  // fresh observation taken this tick
  std::optional<int> agent_action;            // empty while the agent has nothing to act on
  std::optional<std::uint32_t> action_sent;
  std::optional<std::uint32_t> action_applied;  // fresh action applied this tick
  int applied_action = 0;
  double reward = 0.0;
  bool done = false;
};

struct EpisodeResult {
  std::uint64_t seed = 0;
  double episode_return = 0.0;
  int steps = 0;
  bool success = false;
  std::vector<double> obs_latencies_ms;
  std::vector<double> act_latencies_ms;
  // Observation emission to environment receipt of the action computed from it.
  std::vector<double> e2e_latencies_ms;
  int obs_dropped = 0;
  int act_dropped = 0;
  // Shim logs, in submission order; empty in local mode.
  std::vector<RealizedRecord> obs_realized;
  std::vector<RealizedRecord> act_realized;
  std::vector<TickRecord> ticks;  // filled when LoopConfig::record_ticks
};

// Fixed-rate loop: the environment ticks every control period whether or not
// the agent has answered. Per tick: the environment emits an observation;
// the agent takes the newest non-stale delivered observation (or keeps the
// last one) and sends an action; the environment applies the newest
// non-stale delivered action, else holds the previous one (the default
// action before any arrives); the environment steps once.
class ImpairedLoop final : public EnvLoop {
 public:
  ImpairedLoop(const LoopConfig& config, Environment& env);

  std::optional<Observation> reset(std::uint64_t seed) override;
  LoopStep step(int action) override;
  double episode_return() const override { return result_.episode_return; }
  bool episode_success() const override { return result_.success; }
  int action_count() const override { return env_.action_count(); }

  bool done() const { return done_; }
  int tick() const { return tick_; }
  // Finalizes latency/drop accounting for the current episode.
  EpisodeResult finish();

 private:
  void begin_tick();
  void finish_tick(std::optional<int> action);

  LoopConfig config_;
  Environment& env_;
  SimulatedClock clock_;
  std::optional<NetworkShim> obs_shim_;
  std::optional<NetworkShim> act_shim_;

  Observation env_obs_;
  std::optional<Observation> agent_obs_;
  std::optional<SeqNum> last_obs_consumed_;
  std::optional<SeqNum> last_act_applied_;
  std::uint32_t next_obs_seq_ = 0;
  std::uint32_t next_act_seq_ = 0;
  // Send time of the observation each action was computed from, by action seq.
  std::vector<Timestamp> action_source_ts_;
  std::vector<Timestamp> obs_send_ts_;
  std::optional<Timestamp> agent_obs_ts_;
  int applied_ = 0;
  int tick_ = 0;
  bool done_ = true;
  bool truncated_ = false;
  double last_reward_ = 0.0;
  EpisodeResult result_;
  TickRecord pending_;
};

// Environment seed for evaluation episode `episode`. Regimes and modes share
// it, so every condition starts from the same initial states.
inline std::uint64_t evaluation_env_seed(std::uint64_t seed, int episode) {
  return derive_seed({seed, hash_name("eval-episode"), static_cast<std::uint64_t>(episode)});
}

// Runs one episode of `agent` in `env` under `config`.
EpisodeResult run_episode(const LoopConfig& config, Environment& env, Agent& agent,
                          std::uint64_t seed);

}  // namespace netrl
