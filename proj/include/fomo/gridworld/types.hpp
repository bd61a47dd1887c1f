#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fomo::grid {

// Compact-encoding ids (first channel).
enum class ObjectType : uint8_t {
  kUnseen = 0,
  kEmpty = 1,
  kWall = 2,
  kFloor = 3,
  kDoor = 4,
  kKey = 5,
  kBall = 6,
  kBox = 7,
  kGoal = 8,
  kLava = 9,
  kAgent = 10,
};
inline constexpr int kNumObjectTypes = 11;

enum class Color : uint8_t { kRed = 0, kGreen, kBlue, kPurple, kYellow, kGrey };
inline constexpr int kNumColors = 6;

enum class DoorState : uint8_t { kOpen = 0, kClosed = 1, kLocked = 2 };
inline constexpr int kNumDoorStates = 3;

// 0 = east, then clockwise (y grows downward).
enum class Direction : uint8_t { kEast = 0, kSouth = 1, kWest = 2, kNorth = 3 };

enum class Action : uint8_t {
  kTurnLeft = 0,
  kTurnRight = 1,
  kForward = 2,
  kPickup = 3,
  kDrop = 4,
  kToggle = 5,
  kDone = 6,
};
inline constexpr int kNumActions = 7;

struct Pos {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pos&, const Pos&) = default;
};

Pos dir_vec(Direction d);
inline Direction turn_left(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 3) % 4);
}
inline Direction turn_right(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 1) % 4);
}

// An object small enough to sit inside a box.
struct Item {
  ObjectType type = ObjectType::kKey;
  Color color = Color::kRed;
  friend bool operator==(const Item&, const Item&) = default;
};

// A grid cell, or an object held by the agent. `door` is meaningful only for
// doors (kOpen otherwise) and `contains` only for boxes.
struct Cell {
  ObjectType type = ObjectType::kEmpty;
  Color color = Color::kRed;
  DoorState door = DoorState::kOpen;
  std::optional<Item> contains;

  friend bool operator==(const Cell&, const Cell&) = default;

  static Cell empty() { return {}; }
  static Cell wall() { return {ObjectType::kWall, Color::kGrey, DoorState::kOpen, {}}; }
  static Cell goal() { return {ObjectType::kGoal, Color::kGreen, DoorState::kOpen, {}}; }
  static Cell lava() { return {ObjectType::kLava, Color::kRed, DoorState::kOpen, {}}; }
  static Cell door_of(Color c, DoorState s) { return {ObjectType::kDoor, c, s, {}}; }
  static Cell key(Color c) { return {ObjectType::kKey, c, DoorState::kOpen, {}}; }
  static Cell ball(Color c) { return {ObjectType::kBall, c, DoorState::kOpen, {}}; }
  static Cell box(Color c, std::optional<Item> inside = {}) {
    return {ObjectType::kBox, c, DoorState::kOpen, inside};
  }

  bool can_pickup() const {
    return type == ObjectType::kKey || type == ObjectType::kBall || type == ObjectType::kBox;
  }
  // Whether the agent may stand on this cell.
  bool can_overlap() const {
    return type == ObjectType::kEmpty || type == ObjectType::kFloor ||
           type == ObjectType::kGoal || type == ObjectType::kLava ||
           (type == ObjectType::kDoor && door == DoorState::kOpen);
  }
  bool see_behind() const {
    if (type == ObjectType::kWall) return false;
    if (type == ObjectType::kDoor) return door == DoorState::kOpen;
    return true;
  }
};

// What ends an episode with reward.
struct Mission {
  enum class Kind : uint8_t { kReachGoal, kPickupObject };
  Kind kind = Kind::kReachGoal;
  ObjectType target_type = ObjectType::kGoal;
  Color target_color = Color::kGreen;
  friend bool operator==(const Mission&, const Mission&) = default;
};

struct GridState {
  int width = 0;
  int height = 0;
  std::vector<Cell> cells;  // row-major, index y * width + x
  Pos agent_pos;
  Direction agent_dir = Direction::kEast;
  std::optional<Cell> carried;
  int step = 0;
  int max_steps = 1;
  bool episode_done = false;
  Mission mission;
  // NoisyTV distractor; fixed in place, cannot be picked up.
  std::optional<Pos> noisy_ball;

  friend bool operator==(const GridState&, const GridState&) = default;

  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
  const Cell& at(Pos p) const { return cells[static_cast<size_t>(p.y * width + p.x)]; }
  Cell& at(Pos p) { return cells[static_cast<size_t>(p.y * width + p.x)]; }
  Pos front_pos() const {
    const Pos d = dir_vec(agent_dir);
    return {agent_pos.x + d.x, agent_pos.y + d.y};
  }
};

// ----------------------------------------------------------------------------
// Task specification

struct MultiRoomTask {
  int num_rooms = 2;
  int max_room_size = 4;
};
struct DoorKeyTask {
  int size = 5;
};
struct KeyCorridorTask {
  int room_size = 3;
  int num_rows = 3;
};
struct ObstructedMazeTask {};

using TaskFamily = std::variant<MultiRoomTask, DoorKeyTask, KeyCorridorTask, ObstructedMazeTask>;

struct TaskSpec {
  TaskFamily family = DoorKeyTask{};
  bool noisy_tv = false;
  uint64_t seed = 0;
  int max_steps = 0;  // 0 selects the per-family default
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parses labels like "MultiRoom-N7-S4", "MultiRoomNoisyTV-N7-S4",
// "DoorKey-5x5", "KeyCorridorS3R3", "ObstructedMaze-2Dlh".
TaskSpec parse_task_label(const std::string& label);
std::string task_label(const TaskSpec& spec);

// The nine task labels accepted by run configurations.
const std::vector<std::string>& supported_task_labels();

int default_max_steps(const TaskSpec& spec);

}  // namespace fomo::grid
