#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrl/agent.hpp"
#include "netrl/env.hpp"
#include "netrl/loop.hpp"
#include "netrl/tracer.hpp"
#include "netrl/wire.hpp"

namespace netrl {

// Transport failure during an episode, tagged with the tick it happened on.
class ChannelError : public std::runtime_error {
 public:
  ChannelError(int tick, const std::string& what)
      : std::runtime_error("tick " + std::to_string(tick) + ": " + what), tick_(tick) {}
  int tick() const { return tick_; }

 private:
  int tick_;
};

// Session setup failed: no peer, or a peer speaking another wire version.
class HandshakeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Single-producer single-consumer hand-off between the receive context and
// the tick context.
template <typename T>
class SpscChannel {
 public:
  void push(T value) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(std::move(value));
    }
    cv_.notify_one();
  }
  std::optional<T> try_pop() {
    std::lock_guard lock(mu_);
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }
  // Waits until an item is available or `deadline` passes.
  std::optional<T> pop_until(std::chrono::steady_clock::time_point deadline) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_until(lock, deadline, [this] { return !items_.empty(); })) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
};

struct ServiceConfig {
  std::string address = "127.0.0.1";  // env host: bind address; agent host: env address
  std::uint16_t port = 47000;
  double control_period_ms = 20.0;
  // How long after emitting an observation the env host waits for the
  // reply before stepping with the held action.
  double action_window_ms = 15.0;
  int episodes = 50;
  std::uint64_t seed = 0;  // episode seeds derive from this, as in evaluation
  int handshake_timeout_ms = 5000;
  int idle_timeout_ms = 10000;

  void validate() const;
};

struct ServiceReport {
  std::vector<EpisodeResult> episodes;  // completed episodes only
  std::vector<std::string> aborted;     // reason per aborted episode
  int decode_failures = 0;
  int late_actions = 0;  // replies that missed their action window
  // Env host: observation emission to action receipt. Agent host: one-way
  // observation latency against the shared session epoch.
  LatencyTrace trace;
};

// Serves the environment on `config.port`; returns after config.episodes.
// `on_ready` fires once the socket is bound, before the handshake.
ServiceReport run_env_host(const ServiceConfig& config, Environment& env,
                           const std::function<void()>& on_ready = {});

// Connects to the env host and answers every fresh observation with one
// action until the env host has finished config.episodes episodes.
ServiceReport run_agent_host(const ServiceConfig& config, Agent& agent);

}  // namespace netrl
