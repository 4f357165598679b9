#include "netrl/mode3.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <iostream>
#include <thread>

#include "netrl/random.hpp"
#include "netrl/tracer.hpp"

namespace netrl {
namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t steady_micros() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now().time_since_epoch())
          .count());
}

Clock::duration millis(double ms) {
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double, std::milli>(ms));
}

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw ConfigError("not an IPv4 address: " + host);
  }
  return addr;
}

struct Inbound {
  Message msg;
  Timestamp recv_ts;
  sockaddr_in from;
};

// Owns the datagram socket and the receive context. Frames that fail to
// decode are counted and skipped; a version mismatch is remembered so the
// handshake can refuse the peer.
class Endpoint {
 public:
  Endpoint() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  }
  ~Endpoint() {
    stop();
    ::close(fd_);
  }
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;

  void bind_to(const sockaddr_in& addr) {
    const int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
      throw std::runtime_error(std::string("bind: ") + std::strerror(errno));
    }
  }

  void set_epoch(std::uint64_t epoch_us) { epoch_us_.store(epoch_us); }
  std::uint64_t epoch() const { return epoch_us_.load(); }
  Timestamp now() const { return Timestamp{steady_micros() - epoch_us_.load()}; }

  void start() {
    running_ = true;
    thread_ = std::thread([this] { receive_loop(); });
  }
  void stop() {
    running_ = false;
    if (thread_.joinable()) thread_.join();
  }

  bool send(const Message& msg, const sockaddr_in& to) {
    const auto bytes = encode_message(msg);
    const auto n = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                            reinterpret_cast<const sockaddr*>(&to), sizeof to);
    return n == static_cast<ssize_t>(bytes.size());
  }

  SpscChannel<Inbound>& inbox() { return inbox_; }
  int decode_failures() const { return decode_failures_.load(); }
  bool version_mismatch() const { return version_mismatch_.load(); }

 private:
  void receive_loop() {
    std::vector<std::uint8_t> buf(kHeaderBytes + kMaxPayloadBytes);
    while (running_) {
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, 50) <= 0) continue;
      sockaddr_in from{};
      socklen_t len = sizeof from;
      const auto n = ::recvfrom(fd_, buf.data(), buf.size(), 0,
                                reinterpret_cast<sockaddr*>(&from), &len);
      if (n <= 0) continue;
      const Timestamp recv_ts = now();
      try {
        auto decoded = decode_message(std::span(buf.data(), static_cast<std::size_t>(n)));
        inbox_.push(Inbound{std::move(decoded.message), recv_ts, from});
      } catch (const DecodeError& e) {
        decode_failures_.fetch_add(1);
        if (e.code() == DecodeErrc::kBadVersion) version_mismatch_ = true;
      }
    }
  }

  int fd_ = -1;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> epoch_us_{0};
  std::atomic<int> decode_failures_{0};
  std::atomic<bool> version_mismatch_{false};
  std::thread thread_;
  SpscChannel<Inbound> inbox_;
};

// Control messages: the agent opens with Reset(kHello); the env host acks
// with Reset(epoch) so both sides share one session epoch on one machine.
constexpr std::uint64_t kHello = 0x68656c6c6f;  // "hello"

}  // namespace

void ServiceConfig::validate() const {
  if (!(control_period_ms > 0.0)) throw ConfigError("control period must be positive");
  if (!(action_window_ms >= 0.0 && action_window_ms < control_period_ms)) {
    throw ConfigError("action window must lie in [0, control period)");
  }
  if (episodes <= 0) throw ConfigError("episodes must be positive");
  if (handshake_timeout_ms <= 0 || idle_timeout_ms <= 0) throw ConfigError("timeouts must be positive");
}

ServiceReport run_env_host(const ServiceConfig& config, Environment& env,
                           const std::function<void()>& on_ready) {
  config.validate();
  Endpoint ep;
  ep.bind_to(make_addr(config.address, config.port));
  ep.set_epoch(steady_micros());
  ep.start();
  if (on_ready) on_ready();

  ServiceReport report;
  // Handshake.
  std::optional<sockaddr_in> peer;
  const auto hs_deadline = Clock::now() + std::chrono::milliseconds(config.handshake_timeout_ms);
  while (!peer) {
    auto in = ep.inbox().pop_until(std::min(hs_deadline, Clock::now() + millis(50)));
    if (ep.version_mismatch()) {
      throw HandshakeError("refusing peer: wire version mismatch (expected v" +
                           std::to_string(kWireVersion) + ")");
    }
    if (in) {
      const auto* r = std::get_if<ResetBody>(&in->msg.payload);
      if (r != nullptr && r->seed == kHello) peer = in->from;
      continue;
    }
    if (Clock::now() >= hs_deadline) throw HandshakeError("no agent host connected before timeout");
  }
  std::uint32_t ctl_seq = 0;
  ep.send(Message{SeqNum{ctl_seq++}, ep.now(), ResetBody{ep.epoch()}}, *peer);

  std::uint32_t obs_seq = 0;
  std::optional<SeqNum> last_act;
  const auto period = millis(config.control_period_ms);
  const auto window = millis(config.action_window_ms);

  for (int e = 0; e < config.episodes; ++e) {
    const std::uint64_t seed = evaluation_env_seed(config.seed, e);
    EpisodeResult result;
    result.seed = seed;
    int tick = 0;
    try {
      Observation obs = env.reset(seed);
      if (!ep.send(Message{SeqNum{ctl_seq++}, ep.now(), ResetBody{seed}}, *peer)) {
        throw ChannelError(tick, "send failed");
      }
      int applied = env.default_action();
      auto tick_start = Clock::now();
      for (;; ++tick) {
        const Timestamp sent = ep.now();
        if (!ep.send(make_observation(SeqNum{obs_seq++}, sent, obs), *peer)) {
          throw ChannelError(tick, "send failed");
        }
        // Apply the newest fresh action that arrives inside the window. The
        // agent answers each observation once, so on a lossless link the
        // reply to observation n carries action seq n and the wait can end
        // there; otherwise the full window is used.
        const std::uint32_t current = obs_seq - 1;
        const auto deadline = tick_start + window;
        bool answered = false;
        while (auto in = answered ? ep.inbox().try_pop() : ep.inbox().pop_until(deadline)) {
          const auto* a = std::get_if<ActionBody>(&in->msg.payload);
          if (a == nullptr) continue;
          if (last_act && is_stale(in->msg.seq, *last_act)) continue;
          last_act = in->msg.seq;
          applied = a->id;
          if (in->msg.seq.value >= current) {
            answered = true;
            result.e2e_latencies_ms.push_back(latency_ms(sent, in->recv_ts));
            report.trace.record(sent, in->recv_ts, SeqNum{current});
          }
        }
        if (!answered) ++report.late_actions;
        const StepResult r = env.step(applied);
        obs = r.obs;
        result.episode_return += r.reward;
        result.steps += 1;
        if (r.done) break;
        tick_start += period;
        std::this_thread::sleep_until(tick_start);
      }
      result.success = env.success();
      EpisodeEndBody end{result.episode_return, static_cast<std::uint32_t>(result.steps),
                         result.success};
      if (!ep.send(Message{SeqNum{ctl_seq++}, ep.now(), end}, *peer)) {
        throw ChannelError(tick, "send failed");
      }
      report.episodes.push_back(std::move(result));
    } catch (const ChannelError& err) {
      report.aborted.push_back("episode " + std::to_string(e) + ": " + err.what());
      std::cerr << "episode " << e << " aborted: " << err.what() << '\n';
    }
  }
  report.decode_failures = ep.decode_failures();
  return report;
}

ServiceReport run_agent_host(const ServiceConfig& config, Agent& agent) {
  config.validate();
  Endpoint ep;
  ep.bind_to(make_addr("0.0.0.0", 0));
  ep.start();
  const sockaddr_in env_addr = make_addr(config.address, config.port);

  // Say hello until the env host acks with its epoch.
  const auto hs_deadline = Clock::now() + std::chrono::milliseconds(config.handshake_timeout_ms);
  bool acked = false;
  while (!acked) {
    if (Clock::now() >= hs_deadline) throw HandshakeError("env host did not answer before timeout");
    ep.send(Message{SeqNum{0}, Timestamp{}, ResetBody{kHello}}, env_addr);
    const auto wait_until = std::min(hs_deadline, Clock::now() + std::chrono::milliseconds(100));
    while (auto in = ep.inbox().pop_until(wait_until)) {
      if (const auto* r = std::get_if<ResetBody>(&in->msg.payload)) {
        ep.set_epoch(r->seed);
        acked = true;
        break;
      }
    }
    if (ep.version_mismatch()) {
      throw HandshakeError("refusing env host: wire version mismatch (expected v" +
                           std::to_string(kWireVersion) + ")");
    }
  }

  ServiceReport report;
  std::optional<SeqNum> last_obs;
  std::uint32_t act_seq = 0;
  EpisodeResult current;
  bool in_episode = false;
  const auto idle = std::chrono::milliseconds(config.idle_timeout_ms);
  while (static_cast<int>(report.episodes.size()) < config.episodes) {
    auto in = ep.inbox().pop_until(Clock::now() + idle);
    if (!in) throw ChannelError(static_cast<int>(current.steps), "env host went silent");
    const Message& m = in->msg;
    if (const auto* r = std::get_if<ResetBody>(&m.payload)) {
      if (r->seed == ep.epoch()) continue;  // duplicate ack
      agent.begin_episode(derive_seed({r->seed, hash_name("agent")}));
      current = EpisodeResult{};
      current.seed = r->seed;
      in_episode = true;
    } else if (const auto* end = std::get_if<EpisodeEndBody>(&m.payload)) {
      current.episode_return = end->episode_return;
      current.steps = static_cast<int>(end->steps);
      current.success = end->success;
      report.episodes.push_back(current);
      in_episode = false;
    } else if (m.kind() == MessageKind::kObservation) {
      if (last_obs && is_stale(m.seq, *last_obs)) continue;
      last_obs = m.seq;
      if (!in_episode) continue;
      current.obs_latencies_ms.push_back(latency_ms(m.send_ts, in->recv_ts));
      report.trace.record(m.send_ts, in->recv_ts, m.seq);
      const int action = agent.act(observation_of(m));
      ep.send(Message{SeqNum{act_seq++}, ep.now(), ActionBody{static_cast<std::uint8_t>(action)}},
              env_addr);
    }
  }
  report.decode_failures = ep.decode_failures();
  return report;
}

}  // namespace netrl
