#pragma once

#include "fomo/gridworld/env.hpp"
#include "fomo/nn/torso.hpp"

namespace fomo {

// Frame layout a network sees for a given observation scope.
inline nn::FrameSpec frame_spec(nn::TorsoKind kind, grid::Scope scope, const grid::GridState& layout,
                                const grid::ObsConfig& obs) {
  int w = scope == grid::Scope::kFull ? layout.width : obs.view_size;
  int h = scope == grid::Scope::kFull ? layout.height : obs.view_size;
  if (kind == nn::TorsoKind::kConv) {
    w *= obs.tile_size;
    h *= obs.tile_size;
  }
  return {kind, w, h};
}

inline const std::vector<uint8_t>& frame_bytes(const grid::Observation& o, grid::Scope scope, nn::TorsoKind kind) {
  if (scope == grid::Scope::kFull) {
    if (!o.compact_full) throw std::invalid_argument("observation lacks the full view");
    return kind == nn::TorsoKind::kCompact ? o.compact_full->data : o.rgb_full.value().pixels;
  }
  return kind == nn::TorsoKind::kCompact ? o.compact_partial.data : o.rgb_partial.pixels;
}

}  // namespace fomo
