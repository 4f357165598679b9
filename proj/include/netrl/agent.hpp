#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrl/buffers.hpp"
#include "netrl/env.hpp"
#include "netrl/mlp.hpp"
#include "netrl/wire.hpp"

namespace netrl {

// Flattens an observation into policy features. Grid bytes are scaled by
// 1/10 so object ids land in [0, 1].
std::vector<double> observation_features(const Observation& obs);
std::size_t observation_dim(EnvKind env);

// Temporal context fed to a policy: frame stack of depth k plus an optional
// one-hot history of the last h actions.
struct ContextSpec {
  std::size_t obs_dim = 4;
  std::size_t action_count = 2;
  std::size_t stack = 1;    // k
  std::size_t history = 0;  // h

  std::size_t input_dim() const { return stack * obs_dim + history * action_count; }
  friend bool operator==(const ContextSpec&, const ContextSpec&) = default;
};

class AgentContext {
 public:
  explicit AgentContext(const ContextSpec& spec);

  void clear();
  // Pushes the observation consumed this tick and returns the policy input.
  std::span<const double> observe(const Observation& obs);
  void record_action(int action);
  std::span<const double> features() const { return features_; }

 private:
  void refresh();

  FrameStackBuffer frames_;
  ActionHistoryBuffer actions_;
  std::vector<double> features_;
};

// Anything that maps the observation consumed each tick to an action.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual void begin_episode(std::uint64_t seed) = 0;
  virtual int act(const Observation& obs) = 0;
};

struct LoopStep {
  Observation obs;  // what the agent holds at the next tick
  double reward = 0.0;
  bool done = false;
  bool truncated = false;
};

// Agent-side view of one deployment-mode loop. The trainer and the
// evaluator drive every mode through this interface.
class EnvLoop {
 public:
  virtual ~EnvLoop() = default;
  // Starts an episode. Empty if it ended before any observation reached
  // the agent.
  virtual std::optional<Observation> reset(std::uint64_t seed) = 0;
  virtual LoopStep step(int action) = 0;
  virtual double episode_return() const = 0;
  virtual bool episode_success() const = 0;
  virtual int action_count() const = 0;
};

struct PolicyFile {
  PolicyMLP policy;
  ContextSpec context;
  std::string env = "cartpole";
  std::string regime = "baseline";
  std::uint64_t seed = 0;
};

class PolicyFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_policy(const PolicyFile& file, const std::filesystem::path& path);
PolicyFile load_policy(const std::filesystem::path& path);

enum class ActionSelection { kGreedy, kSample };

class MlpAgent final : public Agent {
 public:
  MlpAgent(PolicyMLP policy, ContextSpec context,
           ActionSelection selection = ActionSelection::kGreedy);

  void begin_episode(std::uint64_t seed) override;
  int act(const Observation& obs) override;

  const PolicyMLP& policy() const { return policy_; }
  const ContextSpec& context_spec() const { return spec_; }

 private:
  PolicyMLP policy_;
  ContextSpec spec_;
  AgentContext context_;
  ActionSelection selection_;
  Rng rng_;
  MlpCache cache_;
};

// Uniform random actions; deterministic under the episode seed.
class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(int action_count) : action_count_(action_count) {}
  void begin_episode(std::uint64_t seed) override { rng_ = Rng(seed); }
  int act(const Observation&) override {
    return static_cast<int>(rng_.below(static_cast<std::uint64_t>(action_count_)));
  }

 private:
  int action_count_;
  Rng rng_;
};

}  // namespace netrl
