#pragma once

#include <optional>
#include <vector>

#include "fomo/gridworld/env.hpp"

namespace fomo::grid {

// Shortest turn/forward sequence that leaves the agent facing `target` from an
// adjacent cell. Never steps on goal or lava cells.
std::optional<std::vector<Action>> navigate_to_face(const GridState& state, Pos target);

// Scripted solver: breadth-first search over simulator states where each edge
// is "walk to an object and interact with it" (pickup, toggle, drop, enter the
// goal). Every candidate is executed through step(), so a returned sequence is
// a verified solution of the episode. Returns nullopt when no solution exists
// within `max_nodes` expanded states or the step budget.
std::optional<std::vector<Action>> solve(const GridState& start, int max_nodes = 20000);

}  // namespace fomo::grid
