#include "netrl/cartpole.hpp"

#include <cmath>

#include "netrl/random.hpp"

namespace netrl {

CartPoleAccel cartpole_accel(const CartPoleState& s, double force, const CartPoleParams& p) {
  const double total_mass = p.cart_mass + p.pole_mass;
  const double polemass_length = p.pole_mass * p.half_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_ddot =
      (p.gravity * sin_t - cos_t * temp) /
      (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
  const double x_ddot = temp - polemass_length * theta_ddot * cos_t / total_mass;
  return {x_ddot, theta_ddot};
}

CartPoleState cartpole_reset(std::uint64_t seed) {
  Rng rng(derive_seed({seed, hash_name("cartpole")}));
  CartPoleState s;
  s.x = rng.uniform(-0.05, 0.05);
  s.x_dot = rng.uniform(-0.05, 0.05);
  s.theta = rng.uniform(-0.05, 0.05);
  s.theta_dot = rng.uniform(-0.05, 0.05);
  return s;
}

CartPoleStep cartpole_step(const CartPoleState& state, CartPoleAction action,
                           const CartPoleParams& params) {
  if (state.done) throw EpisodeDoneError();
  const double force =
      action == CartPoleAction::kRight ? params.force_mag : -params.force_mag;
  const auto acc = cartpole_accel(state, force, params);

  CartPoleStep out;
  CartPoleState& s = out.state;
  s = state;
  s.x_dot = state.x_dot + params.tau * acc.x_ddot;
  s.x = state.x + params.tau * s.x_dot;
  s.theta_dot = state.theta_dot + params.tau * acc.theta_ddot;
  s.theta = state.theta + params.tau * s.theta_dot;
  s.steps = state.steps + 1;

  const bool failed = std::abs(s.x) > params.x_threshold ||
                      std::abs(s.theta) > params.theta_threshold;
  out.truncated = !failed && s.steps >= params.max_steps;
  s.done = failed || out.truncated;
  out.done = s.done;
  out.reward = 1.0;
  return out;
}

double cartpole_energy(const CartPoleState& s, const CartPoleParams& p) {
  // Cart translational + pole (uniform rod, centre at half_length) kinetic
  // energy plus pole potential energy relative to the pivot.
  const double l = p.half_length;
  const double vx_pole = s.x_dot + l * s.theta_dot * std::cos(s.theta);
  const double vy_pole = -l * s.theta_dot * std::sin(s.theta);
  const double inertia = p.pole_mass * (2.0 * l) * (2.0 * l) / 12.0;
  const double kinetic = 0.5 * p.cart_mass * s.x_dot * s.x_dot +
                         0.5 * p.pole_mass * (vx_pole * vx_pole + vy_pole * vy_pole) +
                         0.5 * inertia * s.theta_dot * s.theta_dot;
  const double potential = p.pole_mass * p.gravity * l * std::cos(s.theta);
  return kinetic + potential;
}

VectorObservation cartpole_observation(const CartPoleState& s) {
  return VectorObservation{{s.x, s.x_dot, s.theta, s.theta_dot}};
}

Observation CartPoleEnv::reset(std::uint64_t seed) {
  state_ = cartpole_reset(seed);
  return cartpole_observation(state_);
}

StepResult CartPoleEnv::step(int action) {
  const auto r = cartpole_step(state_, action == 1 ? CartPoleAction::kRight : CartPoleAction::kLeft,
                               params_);
  state_ = r.state;
  return StepResult{cartpole_observation(state_), r.reward, r.done, r.truncated};
}

}  // namespace netrl
