#include "netrl/env.hpp"

#include "netrl/cartpole.hpp"
#include "netrl/doorkey.hpp"

namespace netrl {

EnvKind parse_env_kind(std::string_view name) {
  if (name == "cartpole") return EnvKind::kCartPole;
  if (name == "doorkey") return EnvKind::kDoorKey;
  throw std::invalid_argument("unknown environment '" + std::string(name) + "'");
}

std::string_view to_string(EnvKind kind) {
  return kind == EnvKind::kCartPole ? "cartpole" : "doorkey";
}

std::unique_ptr<Environment> make_environment(EnvKind kind,
                                              std::optional<std::uint64_t> fixed_layout_seed) {
  if (kind == EnvKind::kCartPole) return std::make_unique<CartPoleEnv>();
  return std::make_unique<DoorKeyEnv>(DoorKeyOptions{fixed_layout_seed});
}

}  // namespace netrl
