#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fomo/common/rng.hpp"
#include "fomo/gridworld/types.hpp"

namespace fomo::grid {

// Builds the initial state for a task. Throws ConfigError when the task
// parameters cannot fit the grid. Identical specs give identical states.
GridState generate(const TaskSpec& spec);

struct StepResult {
  double reward = 0.0;
  bool done = false;
};

// Advances `state` in place. Reward is 1 - 0.9 * step / max_steps on mission
// success and 0 otherwise. Throws std::logic_error if the episode is over.
StepResult step(GridState& state, Action action, Rng& rng);

// NoisyTV wrapper: on the trigger action (toggle while not facing a door or a
// box) the noisy ball takes a fresh uniformly sampled color. `step` calls this
// itself; it is exposed for direct testing.
void apply_noisy_tv(GridState& state, Action action, Rng& rng);
bool is_noisy_tv_trigger(const GridState& state, Action action);

// 64-bit FNV-1a over agent pose, carried object, and every cell. Stable
// across processes; the step counter is not part of the hash.
uint64_t state_fingerprint(const GridState& state);

// ----------------------------------------------------------------------------
// Observations

enum class Scope : uint8_t { kPartial, kFull };

struct ObsConfig {
  int view_size = 7;
  int tile_size = 8;
  bool render_rgb = true;
};

// Interleaved 8-bit RGB raster.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // (y * width + x) * 3 + channel
  friend bool operator==(const Raster&, const Raster&) = default;
};

// Compact integer encoding: 3 bytes per cell (object id, color id, door state).
struct CompactGrid {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // (y * width + x) * 3 + channel
  friend bool operator==(const CompactGrid&, const CompactGrid&) = default;
  const uint8_t* cell(int x, int y) const { return &data[static_cast<size_t>((y * width + x) * 3)]; }
};

struct Observation {
  CompactGrid compact_partial;
  Raster rgb_partial;  // empty when rendering is disabled
  std::optional<CompactGrid> compact_full;
  std::optional<Raster> rgb_full;
  // Proprioceptive metadata the agent always knows.
  Direction agent_dir = Direction::kEast;
  Pos agent_pos;
  std::optional<Item> carried;  // type/color of the held object
  friend bool operator==(const Observation&, const Observation&) = default;
};

// Partial view: V x V window with the agent at (V/2, V-1) facing up.
// Full view: the whole grid in world coordinates, agent drawn in place.
Observation observe(const GridState& state, Scope scope, const ObsConfig& config = {});

// Visibility mask of the egocentric window, same layout as compact_partial.
std::vector<bool> visibility_mask(const GridState& state, int view_size);

Raster render_full(const GridState& state, int tile_size);

// PNG (8-bit RGB, no interlace). Deterministic byte output.
std::vector<uint8_t> encode_png(const Raster& raster);
Raster decode_png(const std::vector<uint8_t>& bytes);

}  // namespace fomo::grid
