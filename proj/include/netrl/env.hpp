#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "netrl/wire.hpp"

namespace netrl {

class EpisodeDoneError : public std::logic_error {
 public:
  EpisodeDoneError() : std::logic_error("step called on a finished episode") {}
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;  // done because the step limit was hit
};

// Inputs the policy-graph switch rules read from the environment state.
struct SwitchInputs {
  double theta = 0.0;
  bool has_key = false;
};

// A steppable environment as served behind the wire protocol:
// Reset -> Observation, Action -> Observation | EpisodeEnd.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Observation reset(std::uint64_t seed) = 0;
  virtual StepResult step(int action) = 0;

  virtual int action_count() const = 0;
  // Applied before the first action reaches the environment.
  virtual int default_action() const = 0;
  virtual bool success() const = 0;
  virtual SwitchInputs switch_inputs() const = 0;
  virtual std::string_view name() const = 0;
};

enum class EnvKind { kCartPole, kDoorKey };

EnvKind parse_env_kind(std::string_view name);
std::string_view to_string(EnvKind kind);
// `fixed_layout_seed` pins every DoorKey reset to one layout.
std::unique_ptr<Environment> make_environment(EnvKind kind,
                                              std::optional<std::uint64_t> fixed_layout_seed = {});

}  // namespace netrl
