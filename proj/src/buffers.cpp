#include "netrl/buffers.hpp"

#include <algorithm>
#include <string>

namespace netrl {

FrameStackBuffer::FrameStackBuffer(std::size_t k, std::size_t obs_dim)
    : k_(k), obs_dim_(obs_dim), stacked_(k * obs_dim, 0.0) {
  if (k == 0 || obs_dim == 0) throw ShapeError("frame stack needs k >= 1 and obs_dim >= 1");
}

std::span<const double> FrameStackBuffer::push(std::span<const double> obs) {
  if (obs.size() != obs_dim_) {
    throw ShapeError("frame stack expects " + std::to_string(obs_dim_) + " values, got " +
                     std::to_string(obs.size()));
  }
  std::copy(stacked_.begin() + static_cast<std::ptrdiff_t>(obs_dim_), stacked_.end(),
            stacked_.begin());
  std::copy(obs.begin(), obs.end(), stacked_.end() - static_cast<std::ptrdiff_t>(obs_dim_));
  return stacked_;
}

void FrameStackBuffer::clear() { std::fill(stacked_.begin(), stacked_.end(), 0.0); }

ActionHistoryBuffer::ActionHistoryBuffer(std::size_t h, std::size_t action_count)
    : h_(h), action_count_(action_count), encoded_(h * action_count, 0.0) {
  if (action_count == 0) throw ShapeError("action history needs at least one action");
}

void ActionHistoryBuffer::push(int action) {
  if (action < 0 || static_cast<std::size_t>(action) >= action_count_) {
    throw ShapeError("action id " + std::to_string(action) + " out of range");
  }
  if (h_ == 0) return;
  std::copy(encoded_.begin() + static_cast<std::ptrdiff_t>(action_count_), encoded_.end(),
            encoded_.begin());
  auto last = encoded_.end() - static_cast<std::ptrdiff_t>(action_count_);
  std::fill(last, encoded_.end(), 0.0);
  last[action] = 1.0;
}

void ActionHistoryBuffer::clear() { std::fill(encoded_.begin(), encoded_.end(), 0.0); }

}  // namespace netrl
