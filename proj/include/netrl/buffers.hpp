#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace netrl {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Stack depth for a delay of `delay_steps` control periods.
constexpr std::size_t stack_depth_for_delay(std::size_t delay_steps) { return delay_steps + 1; }

// Last k observations, oldest first, zero-padded until k have been pushed.
class FrameStackBuffer {
 public:
  FrameStackBuffer(std::size_t k, std::size_t obs_dim);

  std::span<const double> push(std::span<const double> obs);
  std::span<const double> stacked() const { return stacked_; }
  void clear();

  std::size_t depth() const { return k_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t output_dim() const { return k_ * obs_dim_; }

 private:
  std::size_t k_;
  std::size_t obs_dim_;
  std::vector<double> stacked_;
};

// Last h actions, one-hot, oldest first, zero-padded.
class ActionHistoryBuffer {
 public:
  ActionHistoryBuffer(std::size_t h, std::size_t action_count);

  void push(int action);
  std::span<const double> encoded() const { return encoded_; }
  void clear();

  std::size_t length() const { return h_; }
  std::size_t output_dim() const { return h_ * action_count_; }

 private:
  std::size_t h_;
  std::size_t action_count_;
  std::vector<double> encoded_;
};

}  // namespace netrl
