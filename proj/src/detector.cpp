#include "twinbeam/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twinbeam {

namespace {

Frame make_blank_frame(const ExperimentConfig& config, Regime regime,
                       std::int64_t frame_index) {
  Frame frame;
  frame.regime = regime;
  frame.binning = config.binning();
  frame.frame_index = frame_index;
  frame.values = Grid2D<double>(config.grid_width(), config.grid_height());
  frame.signal_region = config.geometry.signal_region;
  frame.idler_region = config.geometry.idler_region;
  return frame;
}

void add_dark_events(Frame& frame, const RegionRect& region, double rate,
                     Philox& rng) {
  if (rate <= 0.0 || region.empty()) return;
  const std::uint64_t n = rng.poisson(rate * static_cast<double>(region.area()));
  for (std::uint64_t i = 0; i < n; ++i) {
    const int x = region.x0 + static_cast<int>(rng.uniform() * region.width());
    const int y = region.y0 + static_cast<int>(rng.uniform() * region.height());
    frame.values(std::min(x, region.x1 - 1), std::min(y, region.y1 - 1)) = 1.0;
  }
}

}  // namespace

Frame detect_counting(std::span<const PairEvent> pairs,
                      const ExperimentConfig& config, Philox& rng) {
  if (config.regime != Regime::counting) {
    throw std::invalid_argument("detect_counting: config regime is not counting");
  }
  Frame frame = make_blank_frame(
      config, Regime::counting, pairs.empty() ? 0 : pairs.front().frame_index);
  frame.thresholded = true;
  const double pitch = config.superpixel_m();
  const auto& signal_region = frame.signal_region;
  const auto& idler_region = frame.idler_region;

  auto land = [&](const Vec2& pos_m, const RegionRect& region, double qe) {
    if (rng.uniform() >= qe) return;  // photon lost
    const int x = static_cast<int>(std::floor(pos_m.x / pitch));
    const int y = static_cast<int>(std::floor(pos_m.y / pitch));
    if (!region.contains(x, y)) return;  // missed the labeled area
    frame.values(x, y) = 1.0;
  };

  for (const PairEvent& pair : pairs) {
    land(pair.signal_pos_m, signal_region, config.detector.qe_signal);
    land(pair.idler_pos_m, idler_region, config.detector.qe_idler);
  }

  add_dark_events(frame, signal_region, config.detector.dark_event_rate, rng);
  add_dark_events(frame, idler_region, config.detector.dark_event_rate, rng);
  return frame;
}

Frame detect_intensity(const Frame& ideal_intensity,
                       const ExperimentConfig& config, Philox& rng) {
  if (config.regime != Regime::intensity) {
    throw std::invalid_argument("detect_intensity: config regime is not intensity");
  }
  Frame frame = ideal_intensity;
  frame.regime = Regime::intensity;
  const double sigma = config.detector.readout_noise_counts;
  const double saturation = config.detector.saturation_counts;
  const auto& signal_region = frame.signal_region;

  for (int y = 0; y < frame.values.height(); ++y) {
    for (int x = 0; x < frame.values.width(); ++x) {
      const double qe = signal_region.contains(x, y)
                            ? config.detector.qe_signal
                            : config.detector.qe_idler;
      double v = qe * frame.values(x, y);
      if (sigma > 0.0) v += sigma * rng.normal();
      frame.values(x, y) = std::clamp(v, 0.0, saturation);
    }
  }
  return frame;
}

EventList extract_events(const Frame& frame, double threshold) {
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("extract_events: threshold must be positive");
  }
  EventList events;
  events.frame_index = frame.frame_index;
  auto scan = [&](const RegionRect& region, std::vector<Vec2i>& out) {
    for (int y = region.y0; y < region.y1; ++y) {
      for (int x = region.x0; x < region.x1; ++x) {
        const double v = frame.values(x, y);
        const bool fired = frame.thresholded ? v > 0.0 : v > threshold;
        if (fired) out.push_back({x, y});
      }
    }
  };
  scan(frame.signal_region, events.signal_events);
  scan(frame.idler_region, events.idler_events);
  return events;
}

}  // namespace twinbeam
