#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "netrl/random.hpp"
#include "netrl/wire.hpp"

namespace netrl {

// Delay ~ max(0, N(mu, sigma^2)) ms, loss ~ Bernoulli(p_loss).
struct SyntheticModel {
  double mu_ms = 0.0;
  double sigma_ms = 0.0;
  double p_loss = 0.0;
};

// Delays drawn uniformly with replacement from a recorded trace.
struct TraceModel {
  std::vector<double> delays_ms;
  double p_loss = 0.0;
};

using NetworkModel = std::variant<SyntheticModel, TraceModel>;

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const NetworkModel& model);
std::string describe(const NetworkModel& model);

// Expected delay of the model (clipped-normal mean for synthetic models).
double mean_delay_ms(const NetworkModel& model);

bool is_passthrough(const NetworkModel& model);

double sample_delay(const NetworkModel& model, Rng& rng);
bool sample_loss(const NetworkModel& model, Rng& rng);

struct RealizedRecord {
  SeqNum seq;
  Timestamp submitted;
  std::optional<double> delay_ms;  // empty when dropped

  bool dropped() const { return !delay_ms.has_value(); }
};

// Delays or drops messages according to one network model. Each instance
// owns its own random stream; per message the loss draw comes first, then
// the delay draw, and both are always consumed.
class NetworkShim {
 public:
  NetworkShim(NetworkModel model, std::uint64_t seed);

  bool submit(Message msg, Timestamp now);

  // Removes and returns every message due at or before `now`, ordered by
  // (delivery time, arrival order).
  std::vector<Message> poll_deliverable(Timestamp now);

  // Earliest pending delivery time, if any.
  std::optional<Timestamp> next_delivery() const;

  std::size_t in_flight() const { return queue_.size(); }
  const std::vector<RealizedRecord>& realized_log() const { return log_; }
  const NetworkModel& model() const { return model_; }

 private:
  struct Entry {
    Timestamp delivery;
    std::uint64_t order;
    Message msg;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.delivery != b.delivery) return a.delivery > b.delivery;
      return a.order > b.order;
    }
  };

  NetworkModel model_;
  Rng rng_;
  std::uint64_t arrivals_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::vector<RealizedRecord> log_;
};

// Closed-form moments of max(0, X) for X ~ N(mu, sigma^2).
struct ClippedNormalMoments {
  double mean;
  double stddev;
};
ClippedNormalMoments clipped_normal_moments(double mu, double sigma);

}  // namespace netrl
