#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "netrl/env.hpp"

namespace netrl {

inline constexpr int kDoorKeySize = 8;
inline constexpr int kDoorKeyMaxSteps = 1000;
inline constexpr double kDoorKeyStepPenalty = 0.01;
inline constexpr int kViewSize = 7;

enum class Cell : std::uint8_t { kEmpty, kWall, kKey, kDoorLocked, kDoorOpen, kGoal };

// Headings, clockwise. y grows southwards.
enum class Dir : std::uint8_t { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

enum class DoorKeyAction : int {
  kTurnLeft = 0,
  kTurnRight = 1,
  kForward = 2,
  kPickup = 3,
  kToggle = 4,
};
inline constexpr int kDoorKeyActionCount = 5;

struct GridPos {
  int x = 0;
  int y = 0;
  friend bool operator==(GridPos, GridPos) = default;
};

GridPos step_toward(GridPos p, Dir d);
Dir turn_left(Dir d);
Dir turn_right(Dir d);

struct DoorKeyState {
  std::array<std::array<Cell, kDoorKeySize>, kDoorKeySize> grid{};  // [y][x]
  GridPos agent;
  Dir dir = Dir::kEast;
  bool has_key = false;
  int steps = 0;
  bool done = false;
  bool success = false;

  Cell at(GridPos p) const;
  void set(GridPos p, Cell c);
  GridPos front() const { return step_toward(agent, dir); }

  friend bool operator==(const DoorKeyState&, const DoorKeyState&) = default;
};

struct DoorKeyStep {
  DoorKeyState state;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;
};

// Layout: border walls, a wall column holding one locked door, key and
// agent on the near side, goal on the far side.
DoorKeyState doorkey_reset(std::uint64_t seed);
DoorKeyStep doorkey_step(const DoorKeyState& state, DoorKeyAction action);

// Object ids follow the common gridworld encoding.
namespace view_code {
inline constexpr std::uint8_t kUnseen = 0;
inline constexpr std::uint8_t kEmpty = 1;
inline constexpr std::uint8_t kWall = 2;
inline constexpr std::uint8_t kDoor = 4;
inline constexpr std::uint8_t kKey = 5;
inline constexpr std::uint8_t kGoal = 8;
inline constexpr std::uint8_t kStateOpen = 0;
inline constexpr std::uint8_t kStateLocked = 2;
}  // namespace view_code

// 7x7x3 agent-centric view: the agent sits at row 6, column 3, facing up.
// Channels are (object id, state, 0). Walls and locked doors block sight;
// occluded cells encode as all-zero. The agent's own cell shows the carried
// key, if any.
GridObservation render_egocentric(const DoorKeyState& state);

struct DoorKeyOptions {
  // When set, every reset reuses this layout seed (agent start included).
  std::optional<std::uint64_t> fixed_layout_seed;
};

class DoorKeyEnv final : public Environment {
 public:
  explicit DoorKeyEnv(DoorKeyOptions options = {}) : options_(options) {}

  Observation reset(std::uint64_t seed) override;
  StepResult step(int action) override;

  int action_count() const override { return kDoorKeyActionCount; }
  int default_action() const override { return static_cast<int>(DoorKeyAction::kForward); }
  bool success() const override { return state_.success; }
  SwitchInputs switch_inputs() const override { return {0.0, state_.has_key}; }
  std::string_view name() const override { return "doorkey"; }

  const DoorKeyState& state() const { return state_; }
  void set_state(const DoorKeyState& s) { state_ = s; }

 private:
  DoorKeyOptions options_;
  DoorKeyState state_;
};

}  // namespace netrl
