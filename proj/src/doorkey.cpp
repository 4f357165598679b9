#include "netrl/doorkey.hpp"

#include "netrl/random.hpp"

namespace netrl {

GridPos step_toward(GridPos p, Dir d) {
  switch (d) {
    case Dir::kNorth: return {p.x, p.y - 1};
    case Dir::kEast: return {p.x + 1, p.y};
    case Dir::kSouth: return {p.x, p.y + 1};
    case Dir::kWest: return {p.x - 1, p.y};
  }
  return p;
}

Dir turn_left(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 3) % 4); }
Dir turn_right(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 1) % 4); }

Cell DoorKeyState::at(GridPos p) const {
  if (p.x < 0 || p.y < 0 || p.x >= kDoorKeySize || p.y >= kDoorKeySize) return Cell::kWall;
  return grid[p.y][p.x];
}

void DoorKeyState::set(GridPos p, Cell c) { grid[p.y][p.x] = c; }

DoorKeyState doorkey_reset(std::uint64_t seed) {
  Rng rng(derive_seed({seed, hash_name("doorkey")}));
  DoorKeyState s;
  for (auto& row : s.grid) row.fill(Cell::kEmpty);
  for (int i = 0; i < kDoorKeySize; ++i) {
    s.grid[0][i] = s.grid[kDoorKeySize - 1][i] = Cell::kWall;
    s.grid[i][0] = s.grid[i][kDoorKeySize - 1] = Cell::kWall;
  }

  const int inner_lo = 1;
  const int inner_hi = kDoorKeySize - 2;  // inclusive
  // Wall column leaves at least one free column on each side.
  const int split = 2 + static_cast<int>(rng.below(inner_hi - 2));  // [2, 5]
  for (int y = inner_lo; y <= inner_hi; ++y) s.grid[y][split] = Cell::kWall;
  const int door_row = inner_lo + static_cast<int>(rng.below(inner_hi - inner_lo + 1));
  s.grid[door_row][split] = Cell::kDoorLocked;

  auto random_cell = [&rng](int x_lo, int x_hi) {
    return GridPos{x_lo + static_cast<int>(rng.below(x_hi - x_lo + 1)),
                   inner_lo + static_cast<int>(rng.below(inner_hi - inner_lo + 1))};
  };

  s.agent = random_cell(inner_lo, split - 1);
  s.dir = static_cast<Dir>(rng.below(4));
  GridPos key = random_cell(inner_lo, split - 1);
  while (key == s.agent) key = random_cell(inner_lo, split - 1);
  s.set(key, Cell::kKey);
  s.set(random_cell(split + 1, inner_hi), Cell::kGoal);
  return s;
}

DoorKeyStep doorkey_step(const DoorKeyState& state, DoorKeyAction action) {
  if (state.done) throw EpisodeDoneError();
  DoorKeyStep out;
  DoorKeyState& s = out.state;
  s = state;
  s.steps += 1;
  out.reward = -kDoorKeyStepPenalty;

  const GridPos ahead = s.front();
  const Cell target = s.at(ahead);
  switch (action) {
    case DoorKeyAction::kTurnLeft:
      s.dir = turn_left(s.dir);
      break;
    case DoorKeyAction::kTurnRight:
      s.dir = turn_right(s.dir);
      break;
    case DoorKeyAction::kForward:
      if (target == Cell::kEmpty || target == Cell::kDoorOpen || target == Cell::kGoal) {
        s.agent = ahead;
      }
      if (target == Cell::kGoal) {
        s.success = true;
        s.done = true;
        out.reward += 1.0;
      }
      break;
    case DoorKeyAction::kPickup:
      if (target == Cell::kKey && !s.has_key) {
        s.has_key = true;
        s.set(ahead, Cell::kEmpty);
      }
      break;
    case DoorKeyAction::kToggle:
      // Open doors stay open; a locked door needs the key.
      if (target == Cell::kDoorLocked && s.has_key) s.set(ahead, Cell::kDoorOpen);
      break;
  }

  if (!s.done && s.steps >= kDoorKeyMaxSteps) {
    s.done = true;
    out.truncated = true;
  }
  out.done = s.done;
  return out;
}

namespace {

struct Encoded {
  std::uint8_t object;
  std::uint8_t state;
};

Encoded encode(Cell c) {
  using namespace view_code;
  switch (c) {
    case Cell::kEmpty: return {kEmpty, 0};
    case Cell::kWall: return {kWall, 0};
    case Cell::kKey: return {kKey, 0};
    case Cell::kDoorLocked: return {kDoor, kStateLocked};
    case Cell::kDoorOpen: return {kDoor, kStateOpen};
    case Cell::kGoal: return {kGoal, 0};
  }
  return {kUnseen, 0};
}

bool blocks_sight(Cell c) { return c == Cell::kWall || c == Cell::kDoorLocked; }

}  // namespace

GridObservation render_egocentric(const DoorKeyState& state) {
  constexpr int n = kViewSize;
  constexpr int anchor_col = n / 2;
  constexpr int anchor_row = n - 1;
  const GridPos fwd = step_toward({0, 0}, state.dir);
  const GridPos right = step_toward({0, 0}, turn_right(state.dir));

  std::array<std::array<Cell, n>, n> view{};  // [row][col]
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int ahead = anchor_row - r;
      const int side = c - anchor_col;
      const GridPos world{state.agent.x + ahead * fwd.x + side * right.x,
                          state.agent.y + ahead * fwd.y + side * right.y};
      view[r][c] = state.at(world);
    }
  }
  // The agent's own cell holds whatever it carries.
  view[anchor_row][anchor_col] = state.has_key ? Cell::kKey : Cell::kEmpty;

  // Visibility sweeps row by row away from the agent, spreading sideways
  // and forward through cells that do not block sight.
  std::array<std::array<bool, n>, n> seen{};
  seen[anchor_row][anchor_col] = true;
  for (int r = n - 1; r >= 0; --r) {
    for (int c = 0; c < n - 1; ++c) {
      if (!seen[r][c] || blocks_sight(view[r][c])) continue;
      seen[r][c + 1] = true;
      if (r > 0) seen[r - 1][c + 1] = seen[r - 1][c] = true;
    }
    for (int c = n - 1; c > 0; --c) {
      if (!seen[r][c] || blocks_sight(view[r][c])) continue;
      seen[r][c - 1] = true;
      if (r > 0) seen[r - 1][c - 1] = seen[r - 1][c] = true;
    }
  }

  GridObservation obs;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const std::size_t base = (static_cast<std::size_t>(r) * n + c) * kGridChannels;
      if (!seen[r][c]) continue;  // stays unseen
      const auto e = encode(view[r][c]);
      obs.cells[base] = e.object;
      obs.cells[base + 1] = e.state;
    }
  }
  return obs;
}

Observation DoorKeyEnv::reset(std::uint64_t seed) {
  state_ = doorkey_reset(options_.fixed_layout_seed.value_or(seed));
  return render_egocentric(state_);
}

StepResult DoorKeyEnv::step(int action) {
  if (action < 0 || action >= kDoorKeyActionCount) {
    throw std::out_of_range("doorkey action out of range");
  }
  const auto r = doorkey_step(state_, static_cast<DoorKeyAction>(action));
  state_ = r.state;
  return StepResult{render_egocentric(state_), r.reward, r.done, r.truncated};
}

}  // namespace netrl
