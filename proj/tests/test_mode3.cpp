#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <thread>

#include "netrl/cartpole.hpp"
#include "netrl/mode3.hpp"

using namespace netrl;

namespace {

// Pushes toward the side the pole is falling to.
class LeanAgent final : public Agent {
 public:
  void begin_episode(std::uint64_t) override {}
  int act(const Observation& obs) override {
    const auto& v = std::get<VectorObservation>(obs).values;
    return v[2] + 0.5 * v[3] > 0 ? 1 : 0;
  }
};

ServiceConfig fast_config(std::uint16_t port) {
  ServiceConfig c;
  c.port = port;
  c.control_period_ms = 4;
  c.action_window_ms = 3;
  c.episodes = 3;
  c.seed = 17;
  c.handshake_timeout_ms = 3000;
  c.idle_timeout_ms = 3000;
  return c;
}

}  // namespace

TEST_SUITE("mode3") {

TEST_CASE("spsc channel hands items over in order and times out") {
  SpscChannel<int> ch;
  std::thread producer([&] {
    for (int i = 0; i < 1000; ++i) ch.push(i);
  });
  for (int i = 0; i < 1000; ++i) {
    const auto v = ch.pop_until(std::chrono::steady_clock::now() + std::chrono::seconds(2));
    REQUIRE(v.has_value());
    CHECK(*v == i);
  }
  producer.join();
  CHECK_FALSE(ch.try_pop().has_value());
  CHECK_FALSE(ch.pop_until(std::chrono::steady_clock::now() + std::chrono::milliseconds(5)).has_value());
}

TEST_CASE("loopback session matches local mode") {
  const auto cfg = fast_config(47611);
  CartPoleEnv env;
  std::promise<void> ready;
  auto host = std::async(std::launch::async, [&] {
    return run_env_host(cfg, env, [&] { ready.set_value(); });
  });
  ready.get_future().wait();
  LeanAgent agent;
  const auto agent_report = run_agent_host(cfg, agent);
  const auto env_report = host.get();
  REQUIRE(env_report.episodes.size() == 3);
  CHECK(env_report.aborted.empty());
  CHECK(agent_report.episodes.size() == 3);

  CartPoleEnv local_env;
  LeanAgent local_agent;
  LoopConfig local;
  for (int e = 0; e < 3; ++e) {
    const auto want = run_episode(local, local_env, local_agent, evaluation_env_seed(cfg.seed, e));
    CHECK(env_report.episodes[e].seed == want.seed);
    CHECK(env_report.episodes[e].episode_return == doctest::Approx(want.episode_return).epsilon(0.02));
    CHECK(agent_report.episodes[e].episode_return == env_report.episodes[e].episode_return);
  }
  CHECK_FALSE(env_report.trace.samples().empty());
}

TEST_CASE("env host refuses a peer speaking another wire version") {
  auto cfg = fast_config(47612);
  CartPoleEnv env;
  std::promise<void> ready;
  auto host = std::async(std::launch::async, [&] {
    return run_env_host(cfg, env, [&] { ready.set_value(); });
  });
  ready.get_future().wait();

  auto frame = encode_message({SeqNum{0}, Timestamp{}, ResetBody{0x68656c6c6f}});
  frame[4] = kWireVersion + 1;
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  sockaddr_in to{};
  to.sin_family = AF_INET;
  to.sin_port = htons(cfg.port);
  ::inet_pton(AF_INET, "127.0.0.1", &to.sin_addr);
  for (int i = 0; i < 3; ++i) {
    ::sendto(fd, frame.data(), frame.size(), 0, reinterpret_cast<sockaddr*>(&to), sizeof to);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ::close(fd);
  CHECK_THROWS_AS(host.get(), HandshakeError);
}

TEST_CASE("agent host gives up when nobody answers") {
  auto cfg = fast_config(47613);
  cfg.handshake_timeout_ms = 200;
  LeanAgent agent;
  CHECK_THROWS_AS(run_agent_host(cfg, agent), HandshakeError);
}

TEST_CASE("service settings are validated") {
  ServiceConfig c;
  c.action_window_ms = c.control_period_ms;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ServiceConfig{};
  c.episodes = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

}
