#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "twinbeam/config.hpp"
#include "twinbeam/core/grid.hpp"
#include "twinbeam/core/region.hpp"
#include "twinbeam/core/rng.hpp"
#include "twinbeam/pair_event.hpp"

namespace twinbeam {

/// One camera frame of binned superpixels. Counting frames hold 0/1 fired
/// flags once thresholded, intensity frames hold real counts.
struct Frame {
  Regime regime = Regime::counting;
  int binning = 8;
  std::int64_t frame_index = 0;
  /// True when values are already binary fired flags (post-threshold).
  bool thresholded = false;
  Grid2D<double> values;
  RegionRect signal_region;
  RegionRect idler_region;
};

/// Detection-event coordinates of one frame, split by beam region. Each
/// superpixel contributes at most one event.
struct EventList {
  std::vector<Vec2i> signal_events;
  std::vector<Vec2i> idler_events;
  std::int64_t frame_index = 0;
};

/// Photon-counting acquisition: per-beam quantum-efficiency thinning, mapping
/// to superpixels, dark events, and a binary fired/not-fired readout (the
/// thresholded intensified readout collapses multiple hits on one superpixel
/// into a single event).
Frame detect_counting(std::span<const PairEvent> pairs,
                      const ExperimentConfig& config, Philox& rng);

/// Low-gain acquisition: efficiency-scaled intensity plus additive Gaussian
/// readout noise, clamped to [0, saturation].
Frame detect_intensity(const Frame& ideal_intensity,
                       const ExperimentConfig& config, Philox& rng);

/// Thresholds a counting frame into per-region event lists. Frames holding
/// binary fired flags pass through (any positive value is an event).
/// Throws std::invalid_argument for threshold <= 0.
EventList extract_events(const Frame& frame, double threshold);

}  // namespace twinbeam
