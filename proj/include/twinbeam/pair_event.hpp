#pragma once

#include <cstdint>

#include "twinbeam/core/vec.hpp"

namespace twinbeam {

/// One generated photon pair, in continuous detector-plane coordinates
/// (meters). The idler position is the conjugate of the signal position plus
/// the cross-correlation jitter.
struct PairEvent {
  Vec2 signal_pos_m;
  Vec2 idler_pos_m;
  std::int64_t frame_index = 0;
};

}  // namespace twinbeam
