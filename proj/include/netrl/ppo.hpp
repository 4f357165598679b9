#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrl/agent.hpp"
#include "netrl/mlp.hpp"

namespace netrl {

struct TrainerConfig {
  int rollout = 2048;
  int epochs = 10;
  int minibatch = 64;
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  double learning_rate = 3e-4;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  std::int64_t total_steps = 150'000;
  std::size_t hidden = 64;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int iteration, const std::string& what)
      : std::runtime_error("training diverged at iteration " + std::to_string(iteration) + ": " +
                           what),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// One transition as the learner sees it.
struct Transition {
  std::vector<double> input;
  int action = 0;
  double log_prob = 0.0;
  double value = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

// Generalized advantage estimation over a rollout. `terminal[t]` marks that
// the episode ended after step t (no bootstrap across it); `last_value`
// bootstraps the final step when it is not terminal.
struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const bool> terminal, double last_value, double gamma,
                      double lambda);

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Clipped-surrogate loss averaged over `batch`, with advantages normalized
// over the batch when `normalize_advantages` is set. Adds dL/dparams to
// `grad` (same layout as policy.params()).
LossTerms ppo_loss(const PolicyMLP& policy, std::span<const Transition* const> batch,
                   const TrainerConfig& config, bool normalize_advantages,
                   std::span<double> grad);

class Adam {
 public:
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-5);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<double> m_, v_;
};

struct TrainResult {
  PolicyMLP policy;
  ContextSpec context;
  std::vector<double> curve;  // mean episode return per iteration
  std::int64_t steps = 0;
  int episodes = 0;
};

using IterationCallback = std::function<void(int iteration, std::int64_t steps, double mean_return)>;

// PPO with GAE over rollouts collected through `loop`; the loop decides the
// deployment mode. Deterministic under config.seed for simulated loops.
TrainResult train_policy(EnvLoop& loop, const ContextSpec& context, const TrainerConfig& config,
                         const IterationCallback& on_iteration = {});

}  // namespace netrl
