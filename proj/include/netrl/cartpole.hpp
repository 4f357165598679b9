#pragma once

#include <cstdint>

#include "netrl/env.hpp"

namespace netrl {

struct CartPoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double force_mag = 10.0;
  double tau = 0.02;  // seconds; equals the control period
  double x_threshold = 2.4;
  double theta_threshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  int max_steps = 500;
};

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  int steps = 0;
  bool done = false;

  friend bool operator==(const CartPoleState&, const CartPoleState&) = default;
};

enum class CartPoleAction : int { kLeft = 0, kRight = 1 };

struct CartPoleStep {
  CartPoleState state;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;
};

struct CartPoleAccel {
  double x_ddot;
  double theta_ddot;
};

CartPoleAccel cartpole_accel(const CartPoleState& s, double force, const CartPoleParams& p = {});

CartPoleState cartpole_reset(std::uint64_t seed);

// One semi-implicit Euler step of the canonical cart-pole equations.
CartPoleStep cartpole_step(const CartPoleState& state, CartPoleAction action,
                           const CartPoleParams& params = {});

double cartpole_energy(const CartPoleState& s, const CartPoleParams& p = {});

class CartPoleEnv final : public Environment {
 public:
  explicit CartPoleEnv(CartPoleParams params = {}) : params_(params) {}

  Observation reset(std::uint64_t seed) override;
  StepResult step(int action) override;

  int action_count() const override { return 2; }
  int default_action() const override { return static_cast<int>(CartPoleAction::kLeft); }
  bool success() const override { return state_.steps >= params_.max_steps; }
  SwitchInputs switch_inputs() const override { return {state_.theta, false}; }
  std::string_view name() const override { return "cartpole"; }

  const CartPoleState& state() const { return state_; }
  void set_state(const CartPoleState& s) { state_ = s; }

 private:
  CartPoleParams params_;
  CartPoleState state_;
};

VectorObservation cartpole_observation(const CartPoleState& s);

}  // namespace netrl
