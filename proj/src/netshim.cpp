#include "netrl/netshim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace netrl {
namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ModelError("p_loss must lie in [0, 1]");
}

}  // namespace

void validate(const NetworkModel& model) {
  if (const auto* s = std::get_if<SyntheticModel>(&model)) {
    if (!(s->mu_ms >= 0.0) || !std::isfinite(s->mu_ms)) throw ModelError("mu_ms must be >= 0");
    if (!(s->sigma_ms >= 0.0) || !std::isfinite(s->sigma_ms)) {
      throw ModelError("sigma_ms must be >= 0");
    }
    check_probability(s->p_loss);
    return;
  }
  const auto& t = std::get<TraceModel>(model);
  if (t.delays_ms.empty()) throw ModelError("trace model needs at least one delay");
  for (double d : t.delays_ms) {
    if (!std::isfinite(d)) throw ModelError("trace delays must be finite");
  }
  check_probability(t.p_loss);
}

std::string describe(const NetworkModel& model) {
  std::ostringstream os;
  if (const auto* s = std::get_if<SyntheticModel>(&model)) {
    os << "synthetic(mu=" << s->mu_ms << "ms, sigma=" << s->sigma_ms << "ms, p_loss=" << s->p_loss
       << ")";
  } else {
    const auto& t = std::get<TraceModel>(model);
    os << "trace(n=" << t.delays_ms.size() << ", p_loss=" << t.p_loss << ")";
  }
  return os.str();
}

ClippedNormalMoments clipped_normal_moments(double mu, double sigma) {
  if (sigma <= 0.0) return {std::max(0.0, mu), 0.0};
  const double a = mu / sigma;
  const double cdf = normal_cdf(a);
  const double pdf = normal_pdf(a);
  const double mean = mu * cdf + sigma * pdf;
  const double second = (mu * mu + sigma * sigma) * cdf + mu * sigma * pdf;
  return {mean, std::sqrt(std::max(0.0, second - mean * mean))};
}

double mean_delay_ms(const NetworkModel& model) {
  if (const auto* s = std::get_if<SyntheticModel>(&model)) {
    return clipped_normal_moments(s->mu_ms, s->sigma_ms).mean;
  }
  const auto& t = std::get<TraceModel>(model);
  double sum = 0.0;
  for (double d : t.delays_ms) sum += std::max(0.0, d);
  return t.delays_ms.empty() ? 0.0 : sum / static_cast<double>(t.delays_ms.size());
}

bool is_passthrough(const NetworkModel& model) {
  if (const auto* s = std::get_if<SyntheticModel>(&model)) {
    return s->mu_ms == 0.0 && s->sigma_ms == 0.0 && s->p_loss == 0.0;
  }
  const auto& t = std::get<TraceModel>(model);
  return t.p_loss == 0.0 &&
         std::all_of(t.delays_ms.begin(), t.delays_ms.end(), [](double d) { return d <= 0.0; });
}

double sample_delay(const NetworkModel& model, Rng& rng) {
  if (const auto* s = std::get_if<SyntheticModel>(&model)) {
    return std::max(0.0, rng.normal(s->mu_ms, s->sigma_ms));
  }
  const auto& t = std::get<TraceModel>(model);
  const double d = t.delays_ms[rng.below(t.delays_ms.size())];
  return std::max(0.0, d);
}

bool sample_loss(const NetworkModel& model, Rng& rng) {
  const double p = std::visit([](const auto& m) { return m.p_loss; }, model);
  return rng.bernoulli(p);
}

NetworkShim::NetworkShim(NetworkModel model, std::uint64_t seed)
    : model_(std::move(model)), rng_(seed) {
  validate(model_);
}

bool NetworkShim::submit(Message msg, Timestamp now) {
  const bool lost = sample_loss(model_, rng_);
  const double delay = sample_delay(model_, rng_);
  if (lost) {
    log_.push_back({msg.seq, now, std::nullopt});
    return false;
  }
  log_.push_back({msg.seq, now, delay});
  const auto delay_us = static_cast<std::uint64_t>(std::llround(delay * 1000.0));
  queue_.push(Entry{Timestamp{now.micros + delay_us}, arrivals_++, std::move(msg)});
  return true;
}

std::vector<Message> NetworkShim::poll_deliverable(Timestamp now) {
  std::vector<Message> out;
  while (!queue_.empty() && queue_.top().delivery <= now) {
    // top() is const; the entry is discarded right after the copy.
    out.push_back(queue_.top().msg);
    queue_.pop();
  }
  return out;
}

std::optional<Timestamp> NetworkShim::next_delivery() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().delivery;
}

}  // namespace netrl
