#include "netrl/loop.hpp"

#include <algorithm>

#include "netrl/random.hpp"
#include "netrl/tracer.hpp"

namespace netrl {
namespace {

// Newest message by sequence number among one poll's deliveries.
const Message* newest(const std::vector<Message>& delivered) {
  const Message* best = nullptr;
  for (const auto& m : delivered) {
    if (best == nullptr || m.seq > best->seq) best = &m;
  }
  return best;
}

bool fresh(SeqNum incoming, const std::optional<SeqNum>& last) {
  return !last.has_value() || !is_stale(incoming, *last);
}

}  // namespace

DeploymentMode parse_mode(std::string_view name) {
  if (name == "local") return DeploymentMode::kLocal;
  if (name == "simnet") return DeploymentMode::kSimNet;
  if (name == "edge") return DeploymentMode::kEdgeReal;
  throw ConfigError("unknown deployment mode '" + std::string(name) + "'");
}

std::string_view to_string(DeploymentMode mode) {
  switch (mode) {
    case DeploymentMode::kLocal: return "local";
    case DeploymentMode::kSimNet: return "simnet";
    case DeploymentMode::kEdgeReal: return "edge";
  }
  return "?";
}

void LoopConfig::validate() const {
  if (!(control_period_ms > 0.0)) throw ConfigError("control period must be positive");
  if (max_ticks <= 0) throw ConfigError("max_ticks must be positive");
  switch (mode) {
    case DeploymentMode::kLocal:
      if (obs_model || act_model) throw ConfigError("local mode takes no shim models");
      break;
    case DeploymentMode::kSimNet:
      if (!obs_model || !act_model) throw ConfigError("simnet mode needs both shim models");
      netrl::validate(*obs_model);
      netrl::validate(*act_model);
      break;
    case DeploymentMode::kEdgeReal:
      break;
  }
}

ImpairedLoop::ImpairedLoop(const LoopConfig& config, Environment& env)
    : config_(config), env_(env), clock_(config.control_period_ms) {
  config_.validate();
  if (config_.mode == DeploymentMode::kEdgeReal) {
    throw ConfigError("edge mode runs through the networked services, not the simulated loop");
  }
}

std::optional<Observation> ImpairedLoop::reset(std::uint64_t seed) {
  result_ = EpisodeResult{};
  result_.seed = seed;
  tick_ = 0;
  clock_.reset();
  done_ = false;
  truncated_ = false;
  last_reward_ = 0.0;
  agent_obs_.reset();
  agent_obs_ts_.reset();
  last_obs_consumed_.reset();
  last_act_applied_.reset();
  next_obs_seq_ = 0;
  next_act_seq_ = 0;
  action_source_ts_.clear();
  obs_send_ts_.clear();
  applied_ = env_.default_action();
  env_obs_ = env_.reset(seed);

  if (config_.mode == DeploymentMode::kSimNet) {
    obs_shim_.emplace(*config_.obs_model,
                      derive_seed({config_.net_seed, seed, hash_name("obs-channel")}));
    act_shim_.emplace(*config_.act_model,
                      derive_seed({config_.net_seed, seed, hash_name("act-channel")}));
  }

  begin_tick();
  while (!agent_obs_) {
    finish_tick(std::nullopt);
    if (done_) return std::nullopt;
    begin_tick();
  }
  return agent_obs_;
}

void ImpairedLoop::begin_tick() {
  pending_ = TickRecord{};
  pending_.tick = tick_;
  const Timestamp now = clock_.now();
  const SeqNum seq{next_obs_seq_++};

  if (!obs_shim_) {
    agent_obs_ = env_obs_;
    agent_obs_ts_ = now;
    last_obs_consumed_ = seq;
    pending_.obs_consumed = seq.value;
    return;
  }

  obs_shim_->submit(make_observation(seq, now, env_obs_), now);
  const auto delivered = obs_shim_->poll_deliverable(now);
  const Message* m = newest(delivered);
  if (m != nullptr && fresh(m->seq, last_obs_consumed_)) {
    agent_obs_ = observation_of(*m);
    agent_obs_ts_ = m->send_ts;
    last_obs_consumed_ = m->seq;
    pending_.obs_consumed = m->seq.value;
  }
}

void ImpairedLoop::finish_tick(std::optional<int> action) {
  const Timestamp now = clock_.now();
  if (action) {
    const SeqNum seq{next_act_seq_++};
    action_source_ts_.push_back(*agent_obs_ts_);
    pending_.agent_action = *action;
    pending_.action_sent = seq.value;
    if (!act_shim_) {
      applied_ = *action;
      last_act_applied_ = seq;
      pending_.action_applied = seq.value;
      result_.e2e_latencies_ms.push_back(latency_ms(action_source_ts_[seq.value], now));
    } else {
      act_shim_->submit(Message{seq, now, ActionBody{static_cast<std::uint8_t>(*action)}}, now);
    }
  }
  if (act_shim_) {
    const auto delivered = act_shim_->poll_deliverable(now);
    const Message* m = newest(delivered);
    if (m != nullptr && fresh(m->seq, last_act_applied_)) {
      applied_ = std::get<ActionBody>(m->payload).id;
      last_act_applied_ = m->seq;
      pending_.action_applied = m->seq.value;
      result_.e2e_latencies_ms.push_back(latency_ms(action_source_ts_[m->seq.value], now));
    }
  }

  const StepResult r = env_.step(applied_);
  env_obs_ = r.obs;
  last_reward_ = r.reward;
  result_.episode_return += r.reward;
  result_.steps += 1;
  pending_.applied_action = applied_;
  pending_.reward = r.reward;
  pending_.done = r.done;
  if (r.done) {
    done_ = true;
    truncated_ = r.truncated;
    result_.success = env_.success();
  }
  ++tick_;
  clock_.advance();
  if (!done_ && tick_ >= config_.max_ticks) {
    done_ = true;
    truncated_ = true;
  }
  if (config_.record_ticks) result_.ticks.push_back(pending_);
}

LoopStep ImpairedLoop::step(int action) {
  if (done_) throw EpisodeDoneError();
  finish_tick(action);
  if (!done_) begin_tick();
  return LoopStep{*agent_obs_, last_reward_, done_, truncated_};
}

EpisodeResult ImpairedLoop::finish() {
  EpisodeResult out = result_;
  auto collect = [](const std::optional<NetworkShim>& shim, std::vector<double>& latencies,
                    int& dropped) {
    if (!shim) return;
    for (const auto& rec : shim->realized_log()) {
      if (rec.dropped()) {
        ++dropped;
      } else {
        latencies.push_back(*rec.delay_ms);
      }
    }
  };
  collect(obs_shim_, out.obs_latencies_ms, out.obs_dropped);
  collect(act_shim_, out.act_latencies_ms, out.act_dropped);
  if (obs_shim_) out.obs_realized = obs_shim_->realized_log();
  if (act_shim_) out.act_realized = act_shim_->realized_log();
  return out;
}

EpisodeResult run_episode(const LoopConfig& config, Environment& env, Agent& agent,
                          std::uint64_t seed) {
  ImpairedLoop loop(config, env);
  agent.begin_episode(derive_seed({seed, hash_name("agent")}));
  auto obs = loop.reset(seed);
  if (obs) {
    for (;;) {
      const LoopStep st = loop.step(agent.act(*obs));
      if (st.done) break;
      obs = st.obs;
    }
  }
  return loop.finish();
}

}  // namespace netrl
