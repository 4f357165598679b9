#include "netrl/graph.hpp"

#include <cmath>
#include <queue>
#include <utility>

#include "netrl/loop.hpp"
#include "netrl/netshim.hpp"
#include "netrl/random.hpp"
#include "netrl/tracer.hpp"

namespace netrl {

int active_unit(SwitchRule rule, const SwitchInputs& inputs) {
  switch (rule) {
    case SwitchRule::kCartPoleAngle:
      return std::abs(inputs.theta) > kStabiliserThresholdRad ? 0 : 1;
    case SwitchRule::kDoorKeyHasKey:
      return inputs.has_key ? 1 : 0;
  }
  return 0;
}

namespace {

const Message* newest(const std::vector<Message>& delivered) {
  const Message* best = nullptr;
  for (const auto& m : delivered) {
    if (best == nullptr || m.seq > best->seq) best = &m;
  }
  return best;
}

bool fresh(SeqNum incoming, const std::optional<SeqNum>& last) {
  return !last || !is_stale(incoming, *last);
}

// One router<->unit link. Without shims, messages arrive in the same tick.
struct UnitLink {
  std::optional<NetworkShim> obs_shim;
  std::optional<NetworkShim> act_shim;
  std::vector<Message> obs_inbox;  // used when there is no shim
  std::vector<Message> act_inbox;

  void send_obs(Message m, Timestamp now) {
    if (obs_shim) obs_shim->submit(std::move(m), now);
    else obs_inbox.push_back(std::move(m));
  }
  void send_act(Message m, Timestamp now) {
    if (act_shim) act_shim->submit(std::move(m), now);
    else act_inbox.push_back(std::move(m));
  }
  std::vector<Message> take_obs(Timestamp now) {
    if (obs_shim) return obs_shim->poll_deliverable(now);
    return std::exchange(obs_inbox, {});
  }
  std::vector<Message> take_act(Timestamp now) {
    if (act_shim) return act_shim->poll_deliverable(now);
    return std::exchange(act_inbox, {});
  }
};

struct UnitState {
  std::optional<Observation> held;
  std::optional<SeqNum> last_obs;
  std::optional<SeqNum> last_act;  // router side
  std::uint32_t next_act_seq = 0;
  std::vector<Timestamp> action_source_ts;
  std::optional<Timestamp> held_ts;
};

}  // namespace

GraphEpisodeResult run_graph_episode(const GraphConfig& config, Environment& env,
                                     std::array<Agent*, 2> units, std::uint64_t seed) {
  GraphEpisodeResult out;
  out.seed = seed;
  SimulatedClock clock(config.control_period_ms);
  std::array<UnitLink, 2> links;
  std::array<UnitState, 2> st;
  for (int u = 0; u < 2; ++u) {
    if (const auto& ch = config.channels[u]) {
      const auto base = derive_seed({config.net_seed, seed, static_cast<std::uint64_t>(u)});
      links[u].obs_shim.emplace(ch->obs, derive_seed({base, hash_name("obs-channel")}));
      links[u].act_shim.emplace(ch->act, derive_seed({base, hash_name("act-channel")}));
    }
    units[u]->begin_episode(derive_seed({seed, hash_name("unit"), static_cast<std::uint64_t>(u)}));
  }

  Observation env_obs = env.reset(seed);
  int applied = env.default_action();
  int current = -1;
  std::uint32_t next_obs_seq = 0;

  for (int tick = 0; tick < config.max_ticks; ++tick) {
    const Timestamp now = clock.now();
    const int active = active_unit(config.rule, env.switch_inputs());
    if (active != current) {
      out.switches.push_back({tick, current, active});
      current = active;
    }
    out.active_ticks[active] += 1;
    links[active].send_obs(make_observation(SeqNum{next_obs_seq++}, now, env_obs), now);

    for (int u = 0; u < 2; ++u) {
      auto& s = st[u];
      const auto delivered = links[u].take_obs(now);
      if (const Message* m = newest(delivered); m != nullptr && fresh(m->seq, s.last_obs)) {
        s.held = observation_of(*m);
        s.held_ts = m->send_ts;
        s.last_obs = m->seq;
      }
      if (!s.held) continue;
      const int action = units[u]->act(*s.held);
      const SeqNum seq{s.next_act_seq++};
      s.action_source_ts.push_back(*s.held_ts);
      links[u].send_act(Message{seq, now, ActionBody{static_cast<std::uint8_t>(action)}}, now);
    }

    for (int u = 0; u < 2; ++u) {
      auto& s = st[u];
      const auto delivered = links[u].take_act(now);
      const Message* m = newest(delivered);
      if (m == nullptr || !fresh(m->seq, s.last_act)) continue;
      s.last_act = m->seq;
      if (u != active) continue;  // inactive units' actions are discarded
      applied = std::get<ActionBody>(m->payload).id;
      out.e2e_latencies_ms[u].push_back(latency_ms(s.action_source_ts[m->seq.value], now));
    }

    const StepResult r = env.step(applied);
    env_obs = r.obs;
    out.episode_return += r.reward;
    out.steps += 1;
    clock.advance();
    if (r.done) {
      out.success = env.success();
      break;
    }
  }
  return out;
}

StepResult RecenteringCartPole::step(int action) {
  StepResult r = inner_.step(action);
  const double x = inner_.state().x / params_.x_threshold;
  r.reward = 1.0 - x * x;
  return r;
}

DoorKeyAction scripted_doorkey_action(const DoorKeyState& s) {
  Cell target_cell = Cell::kGoal;
  DoorKeyAction interact = DoorKeyAction::kForward;
  if (!s.has_key) {
    target_cell = Cell::kKey;
    interact = DoorKeyAction::kPickup;
  } else {
    for (int y = 0; y < kDoorKeySize; ++y) {
      for (int x = 0; x < kDoorKeySize; ++x) {
        if (s.grid[y][x] == Cell::kDoorLocked) {
          target_cell = Cell::kDoorLocked;
          interact = DoorKeyAction::kToggle;
        }
      }
    }
  }
  if (s.at(s.front()) == target_cell) return interact;

  // Breadth-first search over poses; the first action on a shortest path
  // to any pose facing the target is returned.
  struct Pose {
    GridPos p;
    Dir d;
  };
  constexpr int kPoses = kDoorKeySize * kDoorKeySize * 4;
  auto index = [](Pose q) { return (q.p.y * kDoorKeySize + q.p.x) * 4 + static_cast<int>(q.d); };
  std::array<int, kPoses> first{};
  first.fill(-1);
  std::queue<Pose> frontier;
  const Pose start{s.agent, s.dir};
  first[index(start)] = -2;
  frontier.push(start);
  while (!frontier.empty()) {
    const Pose q = frontier.front();
    frontier.pop();
    const std::array<std::pair<DoorKeyAction, Pose>, 3> moves{{
        {DoorKeyAction::kTurnLeft, {q.p, turn_left(q.d)}},
        {DoorKeyAction::kTurnRight, {q.p, turn_right(q.d)}},
        {DoorKeyAction::kForward, {step_toward(q.p, q.d), q.d}},
    }};
    for (const auto& [action, next] : moves) {
      if (action == DoorKeyAction::kForward) {
        const Cell c = s.at(next.p);
        if (c != Cell::kEmpty && c != Cell::kDoorOpen) continue;
      }
      const int i = index(next);
      if (first[i] != -1) continue;
      const int inherited = first[index(q)];
      first[i] = inherited == -2 ? static_cast<int>(action) : inherited;
      if (s.at(step_toward(next.p, next.d)) == target_cell) {
        return static_cast<DoorKeyAction>(first[i]);
      }
      frontier.push(next);
    }
  }
  return DoorKeyAction::kForward;
}

}  // namespace netrl
