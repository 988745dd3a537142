#include "twinbeam/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "twinbeam/core/fft.hpp"
#include "twinbeam/core/math.hpp"
#include "twinbeam/core/parallel.hpp"
#include "twinbeam/core/rng.hpp"
#include "twinbeam/synth.hpp"

namespace twinbeam {

namespace {

Vec2i argmax_of(const Grid2D<double>& grid) {
  Vec2i best{0, 0};
  double best_value = grid(0, 0);
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (grid(x, y) > best_value) {
        best_value = grid(x, y);
        best = {x, y};
      }
    }
  }
  return best;
}

void finalize_peak(CorrelationMap& map) {
  map.peak_location = argmax_of(map.values);
  map.peak_value = map.values(map.peak_location.x, map.peak_location.y);
}

}  // namespace

CorrelationMap counting_xc_histogram(const std::vector<EventList>& events,
                                     const GeometryParams& geometry,
                                     int window, int n_blocks) {
  if (events.size() < 2) {
    throw std::invalid_argument("counting_xc_histogram: need at least 2 frames");
  }
  if (window < 3 || window % 2 == 0) {
    throw std::invalid_argument("counting_xc_histogram: window must be odd >= 3");
  }
  const int n_frames = static_cast<int>(events.size());
  n_blocks = std::clamp(n_blocks, 1, n_frames);

  std::size_t total_events = 0;
  for (const EventList& e : events) {
    total_events += e.signal_events.size() + e.idler_events.size();
  }
  if (total_events == 0) {
    throw std::runtime_error("counting_xc_histogram: no events in any frame");
  }

  const int half = window / 2;
  std::vector<Grid2D<double>> blocks(n_blocks,
                                     Grid2D<double>(window, window, 0.0));

  // Conjugated idler coordinates are shared by the true and the
  // frame-shuffled pairing; cache them per frame.
  std::vector<std::vector<Vec2i>> conjugated(events.size());
  for (std::size_t f = 0; f < events.size(); ++f) {
    conjugated[f].reserve(events[f].idler_events.size());
    for (const Vec2i& idler : events[f].idler_events) {
      conjugated[f].push_back(conjugate_event(idler, geometry));
    }
  }

  auto accumulate = [&](Grid2D<double>& hist, const std::vector<Vec2i>& signal,
                        const std::vector<Vec2i>& conj_idler, double weight) {
    for (const Vec2i& s : signal) {
      for (const Vec2i& c : conj_idler) {
        const int dx = s.x - c.x;
        const int dy = s.y - c.y;
        if (dx >= -half && dx <= half && dy >= -half && dy <= half) {
          hist(dx + half, dy + half) += weight;
        }
      }
    }
  };

  for (int f = 0; f < n_frames; ++f) {
    const int block =
        static_cast<int>(static_cast<long long>(f) * n_blocks / n_frames);
    accumulate(blocks[block], events[f].signal_events, conjugated[f], 1.0);
    const int partner = (f + 1) % n_frames;  // accidental background estimate
    accumulate(blocks[block], events[f].signal_events, conjugated[partner],
               -1.0);
  }

  CorrelationMap map;
  map.values = Grid2D<double>(window, window, 0.0);
  for (const auto& block : blocks) {
    for (int y = 0; y < window; ++y) {
      for (int x = 0; x < window; ++x) {
        map.values(x, y) += block(x, y);
      }
    }
  }
  map.n_samples = n_frames;
  map.center = {half, half};
  map.components = std::move(blocks);
  finalize_peak(map);
  return map;
}

PhotocountMoments estimate_efficiencies(const std::vector<EventList>& events) {
  if (events.size() < 2) {
    throw std::invalid_argument("estimate_efficiencies: need at least 2 frames");
  }
  const double n = static_cast<double>(events.size());
  double sum_s = 0.0, sum_i = 0.0, sum_si = 0.0;
  for (const EventList& e : events) {
    const double ns = static_cast<double>(e.signal_events.size());
    const double ni = static_cast<double>(e.idler_events.size());
    sum_s += ns;
    sum_i += ni;
    sum_si += ns * ni;
  }
  PhotocountMoments moments;
  moments.n_frames = static_cast<std::int64_t>(events.size());
  moments.mean_signal = sum_s / n;
  moments.mean_idler = sum_i / n;
  if (moments.mean_signal <= 0.0 || moments.mean_idler <= 0.0) {
    throw std::runtime_error("estimate_efficiencies: zero mean counts");
  }
  moments.cross_covariance =
      sum_si / n - moments.mean_signal * moments.mean_idler;
  moments.eff_idler_est = moments.cross_covariance / moments.mean_signal;
  moments.eff_signal_est = moments.cross_covariance / moments.mean_idler;
  return moments;
}

namespace {

constexpr int kRecenterPad = 4;

/// Re-centers a padded map on its maximum; fails when the maximum sits deeper
/// than the padding allows.
bool recenter(const Grid2D<double>& padded, int window, Grid2D<double>& out) {
  const Vec2i peak = argmax_of(padded);
  const int padded_center = padded.width() / 2;
  const int off_x = peak.x - padded_center;
  const int off_y = peak.y - padded_center;
  if (std::abs(off_x) > kRecenterPad || std::abs(off_y) > kRecenterPad) {
    return false;
  }
  const int half = window / 2;
  out = Grid2D<double>(window, window);
  for (int y = 0; y < window; ++y) {
    for (int x = 0; x < window; ++x) {
      out(x, y) = padded(x - half + padded_center + off_x,
                         y - half + padded_center + off_y);
    }
  }
  return true;
}

bool window_fits(const Vec2i& center, int reach, const RegionRect& region) {
  return center.x - reach >= region.x0 && center.x + reach < region.x1 &&
         center.y - reach >= region.y0 && center.y + reach < region.y1;
}

}  // namespace

IntensityMaps intensity_correlation_maps(
    const std::vector<Frame>& stack, const std::vector<Vec2i>& reference_points,
    const GeometryParams& geometry, int window) {
  if (stack.size() < 2) {
    throw std::invalid_argument("intensity_correlation_maps: need >= 2 frames");
  }
  if (window < 3 || window % 2 == 0) {
    throw std::invalid_argument(
        "intensity_correlation_maps: window must be odd >= 3");
  }
  const int padded = window + 2 * kRecenterPad;
  const int reach = padded / 2;
  const RegionRect& idler = stack.front().idler_region;
  const RegionRect& signal = stack.front().signal_region;
  const double n_frames = static_cast<double>(stack.size());

  struct PointState {
    Vec2i ac_center;
    Vec2i xc_center;
    Grid2D<double> ac_prod, ac_sum;
    Grid2D<double> xc_prod, xc_sum;
    double ref_sum = 0.0;
  };

  std::vector<PointState> points;
  points.reserve(reference_points.size());
  for (const Vec2i& ref : reference_points) {
    if (!idler.contains(ref.x, ref.y)) {
      std::cerr << "intensity_correlation_maps: reference point (" << ref.x
                << ", " << ref.y << ") outside the idler region, skipped\n";
      continue;
    }
    PointState st;
    st.ac_center = ref;
    st.xc_center = conjugate_event(ref, geometry);
    if (!window_fits(st.ac_center, reach, idler) ||
        !window_fits(st.xc_center, reach, signal)) {
      std::cerr << "intensity_correlation_maps: window around (" << ref.x
                << ", " << ref.y << ") does not fit the regions, skipped\n";
      continue;
    }
    st.ac_prod = Grid2D<double>(padded, padded, 0.0);
    st.ac_sum = Grid2D<double>(padded, padded, 0.0);
    st.xc_prod = Grid2D<double>(padded, padded, 0.0);
    st.xc_sum = Grid2D<double>(padded, padded, 0.0);
    points.push_back(std::move(st));
  }
  if (points.empty()) {
    throw std::runtime_error(
        "intensity_correlation_maps: no usable reference points");
  }

  // One-pass covariance sums, frames in index order (deterministic).
  for (const Frame& frame : stack) {
    for (PointState& st : points) {
      const double ref_value = frame.values(st.ac_center.x, st.ac_center.y);
      st.ref_sum += ref_value;
      for (int wy = 0; wy < padded; ++wy) {
        const int ay = st.ac_center.y - reach + wy;
        const int xy = st.xc_center.y - reach + wy;
        for (int wx = 0; wx < padded; ++wx) {
          const double av = frame.values(st.ac_center.x - reach + wx, ay);
          const double xv = frame.values(st.xc_center.x - reach + wx, xy);
          st.ac_prod(wx, wy) += ref_value * av;
          st.ac_sum(wx, wy) += av;
          st.xc_prod(wx, wy) += ref_value * xv;
          st.xc_sum(wx, wy) += xv;
        }
      }
    }
  }

  IntensityMaps maps;
  maps.ac.values = Grid2D<double>(window, window, 0.0);
  maps.xc.values = Grid2D<double>(window, window, 0.0);
  maps.ac.n_samples = maps.xc.n_samples = stack.size();
  maps.ac.center = maps.xc.center = {window / 2, window / 2};

  int used = 0;
  for (PointState& st : points) {
    const double ref_mean = st.ref_sum / n_frames;
    Grid2D<double> ac_padded(padded, padded);
    Grid2D<double> xc_padded(padded, padded);
    for (int wy = 0; wy < padded; ++wy) {
      for (int wx = 0; wx < padded; ++wx) {
        ac_padded(wx, wy) = st.ac_prod(wx, wy) / n_frames -
                            ref_mean * (st.ac_sum(wx, wy) / n_frames);
        xc_padded(wx, wy) = st.xc_prod(wx, wy) / n_frames -
                            ref_mean * (st.xc_sum(wx, wy) / n_frames);
      }
    }
    Grid2D<double> ac_centered, xc_centered;
    if (!recenter(ac_padded, window, ac_centered) ||
        !recenter(xc_padded, window, xc_centered)) {
      std::cerr << "intensity_correlation_maps: map peak beyond re-centering "
                   "pad, point skipped\n";
      continue;
    }
    for (int wy = 0; wy < window; ++wy) {
      for (int wx = 0; wx < window; ++wx) {
        maps.ac.values(wx, wy) += ac_centered(wx, wy);
        maps.xc.values(wx, wy) += xc_centered(wx, wy);
      }
    }
    maps.ac.components.push_back(std::move(ac_centered));
    maps.xc.components.push_back(std::move(xc_centered));
    ++used;
  }
  if (used == 0) {
    throw std::runtime_error(
        "intensity_correlation_maps: every reference point was skipped");
  }
  for (auto* map : {&maps.ac, &maps.xc}) {
    for (double& v : map->values) v /= used;
    finalize_peak(*map);
  }
  return maps;
}

std::vector<Vec2i> select_reference_points(const std::vector<Frame>& stack,
                                           const ExperimentConfig& config,
                                           int n_points, int window) {
  if (stack.empty()) {
    throw std::invalid_argument("select_reference_points: empty stack");
  }
  const RegionRect& idler = config.geometry.idler_region;
  const RegionRect& signal = config.geometry.signal_region;
  const int reach = (window + 2 * kRecenterPad) / 2;

  Grid2D<double> mean(idler.width(), idler.height(), 0.0);
  for (const Frame& frame : stack) {
    for (int y = 0; y < idler.height(); ++y) {
      for (int x = 0; x < idler.width(); ++x) {
        mean(x, y) += frame.values(idler.x0 + x, idler.y0 + y);
      }
    }
  }

  std::vector<double> region_means(mean.begin(), mean.end());
  std::nth_element(region_means.begin(),
                   region_means.begin() + region_means.size() / 2,
                   region_means.end());
  const double floor = region_means[region_means.size() / 2];

  std::vector<Vec2i> eligible;
  for (int y = 0; y < idler.height(); ++y) {
    for (int x = 0; x < idler.width(); ++x) {
      if (mean(x, y) < floor) continue;
      const Vec2i ref{idler.x0 + x, idler.y0 + y};
      if (!window_fits(ref, reach, idler)) continue;
      const Vec2i conj = conjugate_event(ref, config.geometry);
      if (!window_fits(conj, reach, signal)) continue;
      eligible.push_back(ref);
    }
  }
  if (eligible.empty()) {
    throw std::runtime_error(
        "select_reference_points: no superpixel admits the window");
  }

  Philox rng(config.rng_seed, 0, kSubReferencePoints);
  for (std::size_t i = eligible.size() - 1; i > 0; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(eligible[i], eligible[std::min(j, i)]);
  }
  if (static_cast<int>(eligible.size()) > n_points) {
    eligible.resize(n_points);
  }
  return eligible;
}

namespace {

struct CutFwhm {
  double fwhm = 0.0;
  bool crossed = true;
};

/// Half-maximum width of one cut by linear interpolation, walking outward
/// from the peak.
CutFwhm cut_fwhm_interpolated(const std::vector<double>& cut, int peak) {
  const double half = cut[peak] * 0.5;
  const int n = static_cast<int>(cut.size());
  CutFwhm result;
  double left = 0.0, right = 0.0;
  bool found_left = false, found_right = false;
  for (int i = peak; i > 0; --i) {
    if (cut[i - 1] <= half && cut[i] > half) {
      const double t = (half - cut[i - 1]) / (cut[i] - cut[i - 1]);
      left = (i - 1) + t;
      found_left = true;
      break;
    }
  }
  for (int i = peak; i + 1 < n; ++i) {
    if (cut[i + 1] <= half && cut[i] > half) {
      const double t = (cut[i] - half) / (cut[i] - cut[i + 1]);
      right = i + t;
      found_right = true;
      break;
    }
  }
  if (!found_left || !found_right) {
    result.crossed = false;
    return result;
  }
  result.fwhm = right - left;
  return result;
}

/// Quadratic fit of log(value) over the points above 1/5 of the peak.
double cut_fwhm_gaussian(const std::vector<double>& cut, int peak) {
  const double floor = cut[peak] * 0.2;
  int lo = peak, hi = peak;
  while (lo > 0 && cut[lo - 1] > floor) --lo;
  while (hi + 1 < static_cast<int>(cut.size()) && cut[hi + 1] > floor) ++hi;
  if (hi - lo + 1 < 3) return 0.0;

  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, b0 = 0, b1 = 0, b2 = 0;
  for (int i = lo; i <= hi; ++i) {
    const double x = i - peak;
    const double v = std::log(cut[i]);
    s0 += 1;
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
    b0 += v;
    b1 += v * x;
    b2 += v * x * x;
  }
  // Solve the 3x3 normal equations by elimination.
  const double d = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s2 * s3) +
                   s2 * (s1 * s3 - s2 * s2);
  if (std::abs(d) < 1e-30) return 0.0;
  const double c = (s0 * (s2 * b2 - s3 * b1) - s1 * (s1 * b2 - s3 * b0) +
                    s2 * (s1 * b1 - s2 * b0)) /
                   d;
  if (c >= 0.0) return 0.0;
  const double sigma = std::sqrt(-0.5 / c);
  return kFwhmPerSigma * sigma;
}

struct AxisWidths {
  double interp_x = 0.0, interp_y = 0.0;
  double gauss_x = 0.0, gauss_y = 0.0;
};

AxisWidths widths_of_map(const Grid2D<double>& values) {
  const Vec2i peak = argmax_of(values);
  if (peak.x <= 0 || peak.x >= values.width() - 1 || peak.y <= 0 ||
      peak.y >= values.height() - 1) {
    throw std::runtime_error("extract_fwhm: peak on the window boundary");
  }
  std::vector<double> row(values.width());
  std::vector<double> col(values.height());
  for (int x = 0; x < values.width(); ++x) row[x] = values(x, peak.y);
  for (int y = 0; y < values.height(); ++y) col[y] = values(peak.x, y);

  const CutFwhm rx = cut_fwhm_interpolated(row, peak.x);
  const CutFwhm ry = cut_fwhm_interpolated(col, peak.y);
  if (!rx.crossed || !ry.crossed) {
    throw std::range_error(
        "extract_fwhm: half maximum not crossed inside the window");
  }
  AxisWidths w;
  w.interp_x = rx.fwhm;
  w.interp_y = ry.fwhm;
  w.gauss_x = cut_fwhm_gaussian(row, peak.x);
  w.gauss_y = cut_fwhm_gaussian(col, peak.y);
  return w;
}

constexpr double kFloorSuperpixels = 1.5;

}  // namespace

WidthEstimate extract_fwhm(const CorrelationMap& map, double pixel_pitch_m,
                           int bootstrap_rounds, std::uint64_t bootstrap_seed) {
  const AxisWidths widths = widths_of_map(map.values);

  WidthEstimate estimate;
  estimate.method = WidthMethod::interpolated;
  estimate.fwhm_radial_sp = widths.interp_x;
  estimate.fwhm_azimuthal_sp = widths.interp_y;
  estimate.fwhm_radial_m = widths.interp_x * pixel_pitch_m;
  estimate.fwhm_azimuthal_m = widths.interp_y * pixel_pitch_m;
  estimate.gauss_radial_m = widths.gauss_x * pixel_pitch_m;
  estimate.gauss_azimuthal_m = widths.gauss_y * pixel_pitch_m;
  estimate.radial_at_floor = widths.interp_x <= kFloorSuperpixels;
  estimate.azimuthal_at_floor = widths.interp_y <= kFloorSuperpixels;
  auto disagree = [](double a, double b) {
    return a > 0.0 && b > 0.0 && std::abs(a - b) > 0.10 * a;
  };
  estimate.methods_disagree =
      disagree(estimate.fwhm_radial_m, estimate.gauss_radial_m) ||
      disagree(estimate.fwhm_azimuthal_m, estimate.gauss_azimuthal_m);

  const std::size_t n_components = map.components.size();
  if (n_components >= 2 && bootstrap_rounds > 0) {
    Philox rng(bootstrap_seed, 0, kSubBootstrap);
    const int w = map.values.width();
    const int h = map.values.height();
    std::vector<double> sample_x, sample_y;
    sample_x.reserve(bootstrap_rounds);
    sample_y.reserve(bootstrap_rounds);
    Grid2D<double> mean(w, h);
    for (int round = 0; round < bootstrap_rounds; ++round) {
      mean.fill(0.0);
      for (std::size_t k = 0; k < n_components; ++k) {
        const std::size_t pick = static_cast<std::size_t>(
            rng.uniform() * static_cast<double>(n_components));
        const Grid2D<double>& comp =
            map.components[std::min(pick, n_components - 1)];
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) mean(x, y) += comp(x, y);
        }
      }
      try {
        const AxisWidths resampled = widths_of_map(mean);
        sample_x.push_back(resampled.interp_x);
        sample_y.push_back(resampled.interp_y);
      } catch (const std::exception&) {
        // Degenerate resample; ignored.
      }
    }
    auto stddev = [](const std::vector<double>& xs) {
      if (xs.size() < 2) return 0.0;
      const double mean_x =
          std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
      double ss = 0.0;
      for (const double x : xs) ss += sq(x - mean_x);
      return std::sqrt(ss / (xs.size() - 1));
    };
    estimate.err_radial_m = stddev(sample_x) * pixel_pitch_m;
    estimate.err_azimuthal_m = stddev(sample_y) * pixel_pitch_m;
  }
  return estimate;
}

namespace {

/// Renders, detects and analyzes one synthetic intensity acquisition.
struct MeasuredWidths {
  WidthEstimate ac;
  WidthEstimate xc;
};

MeasuredWidths measure_intensity_stack(const ExperimentConfig& config,
                                       const GainTargets& targets,
                                       const SweepOptions& options) {
  const SpeckleModel model =
      make_speckle_model(targets.ac_fwhm_m, targets.xc_fwhm_m, options.mu,
                         targets.mean_intensity);
  const SpeckleRenderer renderer(model, config);
  std::vector<Frame> stack(options.frames);
  parallel_for(stack.size(), options.jobs, [&](std::size_t f) {
    const Frame ideal = renderer.render(static_cast<std::int64_t>(f));
    Philox rng(config.rng_seed, static_cast<std::uint32_t>(f),
               kSubReadoutNoise);
    stack[f] = detect_intensity(ideal, config, rng);
  });
  const std::vector<Vec2i> points =
      select_reference_points(stack, config, options.points, options.window);
  const IntensityMaps maps = intensity_correlation_maps(
      stack, points, config.geometry, options.window);
  MeasuredWidths result;
  result.ac = extract_fwhm(maps.ac, config.superpixel_m());
  result.xc = extract_fwhm(maps.xc, config.superpixel_m());
  return result;
}

}  // namespace

std::vector<PowerSweepRow> width_vs_power_sweep(
    const ExperimentConfig& config, const std::vector<double>& powers_w,
    const SweepOptions& options) {
  ExperimentConfig cfg = config;
  cfg.regime = Regime::intensity;
  cfg.update_derived();

  const PredictedWidths pm =
      predict_widths(cfg, {.widen_factor = options.widen_factor});
  GainCurve curve;
  curve.ac_width_sat_m = {options.ac_to_xc_ratio * pm.radial_fwhm_m,
                          options.ac_to_xc_ratio * pm.azimuthal_fwhm_m};

  std::vector<PowerSweepRow> rows;
  rows.reserve(powers_w.size());
  for (const double power : powers_w) {
    ExperimentConfig point_cfg = cfg;
    point_cfg.pump.power_w = power;
    const GainTargets targets =
        gain_to_targets(power, curve, pm, cfg.superpixel_m());
    const MeasuredWidths measured =
        measure_intensity_stack(point_cfg, targets, options);
    rows.push_back({power, measured.ac, measured.xc});
  }
  return rows;
}

std::vector<WaistSweepRow> width_vs_waist_sweep(
    const ExperimentConfig& config, const std::vector<double>& waists_m,
    const SweepOptions& options) {
  ExperimentConfig cfg = config;
  cfg.regime = Regime::intensity;
  cfg.update_derived();
  const double ellipticity = cfg.pump.ellipticity();

  std::vector<WaistSweepRow> rows;
  rows.reserve(waists_m.size());
  for (const double waist : waists_m) {
    ExperimentConfig point_cfg = cfg;
    point_cfg.pump.waist_horizontal_m = waist;
    point_cfg.pump.waist_vertical_m = ellipticity * waist;
    const PredictedWidths pm =
        predict_widths(point_cfg, {.widen_factor = options.widen_factor});
    GainCurve curve;
    curve.ac_width_sat_m = {options.ac_to_xc_ratio * pm.radial_fwhm_m,
                            options.ac_to_xc_ratio * pm.azimuthal_fwhm_m};
    const GainTargets targets = gain_to_targets(point_cfg.pump.power_w, curve,
                                                pm, point_cfg.superpixel_m());
    const MeasuredWidths measured =
        measure_intensity_stack(point_cfg, targets, options);
    rows.push_back({waist, pm, measured.ac, measured.xc});
  }
  return rows;
}

Grid2D<double> autocovariance_fft(const Grid2D<double>& values) {
  const int w = values.width();
  const int h = values.height();
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= n;

  Grid2D<std::complex<double>> work(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      work(x, y) = values(x, y) - mean;
    }
  }
  fft::forward(work);
  for (auto& z : work) z = std::norm(z);
  fft::inverse(work);
  Grid2D<double> out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out(x, y) = work(x, y).real() / (n * n);
    }
  }
  return out;
}

Grid2D<double> autocovariance_direct(const Grid2D<double>& values) {
  const int w = values.width();
  const int h = values.height();
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= n;

  Grid2D<double> out(w, h, 0.0);
  for (int dy = 0; dy < h; ++dy) {
    for (int dx = 0; dx < w; ++dx) {
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        const int yy = (y + dy) % h;
        for (int x = 0; x < w; ++x) {
          const int xx = (x + dx) % w;
          acc += (values(x, y) - mean) * (values(xx, yy) - mean);
        }
      }
      out(dx, dy) = acc / n;
    }
  }
  return out;
}

}  // namespace twinbeam
