#pragma once

#include <cstdint>
#include <vector>

#include "twinbeam/config.hpp"
#include "twinbeam/core/grid.hpp"
#include "twinbeam/core/vec.hpp"
#include "twinbeam/detector.hpp"
#include "twinbeam/pm_model.hpp"

namespace twinbeam {

/// 2D map of correlation estimates. For the counting pipeline the grid is
/// indexed by event-pair displacement; for the intensity pipeline by position
/// around the (re-centered) reference point. `components` holds the per-block
/// or per-reference-point maps the bootstrap resamples from.
struct CorrelationMap {
  Grid2D<double> values;
  std::int64_t n_samples = 0;
  Vec2i center;         // zero-displacement bin / window center
  Vec2i peak_location;  // grid indices of the maximum
  double peak_value = 0.0;
  std::vector<Grid2D<double>> components;
};

enum class WidthMethod { interpolated, gaussian_fit };

/// FWHM along the radial (horizontal) and azimuthal (vertical) cuts through
/// the peak. Values are reported in meters and superpixels; widths at or
/// below ~1.5 superpixels are flagged as pixelization-floored, since the
/// detector cannot resolve structure below its superpixel.
struct WidthEstimate {
  double fwhm_radial_m = 0.0;
  double fwhm_azimuthal_m = 0.0;
  double err_radial_m = 0.0;
  double err_azimuthal_m = 0.0;
  double fwhm_radial_sp = 0.0;
  double fwhm_azimuthal_sp = 0.0;
  bool radial_at_floor = false;
  bool azimuthal_at_floor = false;
  WidthMethod method = WidthMethod::interpolated;
  double gauss_radial_m = 0.0;
  double gauss_azimuthal_m = 0.0;
  bool methods_disagree = false;  // interpolated vs gaussian fit by > 10%
};

/// Per-frame photocount moments and the coincidence-based efficiency
/// estimates (covariance over the opposite beam's mean). The estimates are
/// reported unclamped; on unpaired data they scatter around zero.
struct PhotocountMoments {
  double mean_signal = 0.0;
  double mean_idler = 0.0;
  double cross_covariance = 0.0;
  double eff_signal_est = 0.0;
  double eff_idler_est = 0.0;
  std::int64_t n_frames = 0;
};

/// Displacement histogram of signal events against conjugated idler events,
/// with the accidental background estimated by cyclic frame-shuffled pairing
/// (signal of frame f against idler of frame f+1) and subtracted.
/// Throws std::runtime_error when the event lists are all empty.
CorrelationMap counting_xc_histogram(const std::vector<EventList>& events,
                                     const GeometryParams& geometry,
                                     int window = 43, int n_blocks = 25);

/// First/second photocount moments and efficiency estimates from per-frame
/// totals. Throws std::runtime_error on zero mean counts.
PhotocountMoments estimate_efficiencies(const std::vector<EventList>& events);

struct IntensityMaps {
  CorrelationMap ac;
  CorrelationMap xc;
};

/// Windowed intensity covariance maps around each reference point (AC, in the
/// idler region) and around its conjugate (XC, in the signal region).
/// Individual maps are re-centered on their maxima (integer alignment) and
/// averaged. Points whose windows do not fit are skipped with a warning on
/// stderr; all points skipped is an error.
IntensityMaps intensity_correlation_maps(const std::vector<Frame>& stack,
                                         const std::vector<Vec2i>& reference_points,
                                         const GeometryParams& geometry,
                                         int window);

/// Draws reference points uniformly from idler superpixels whose stack-mean
/// intensity exceeds the region median, keeping enough margin for the window
/// on both sides of the conjugation.
std::vector<Vec2i> select_reference_points(const std::vector<Frame>& stack,
                                           const ExperimentConfig& config,
                                           int n_points, int window);

/// Cuts through the map peak, linear interpolation of the half-maximum
/// crossings, bootstrap uncertainty over the map components. Throws
/// std::runtime_error when the peak touches the window boundary and
/// std::range_error when a half-maximum crossing is not bracketed.
WidthEstimate extract_fwhm(const CorrelationMap& map, double pixel_pitch_m,
                           int bootstrap_rounds = 200,
                           std::uint64_t bootstrap_seed = 0x5DEECE66Dull);

struct SweepOptions {
  int frames = 800;
  int points = 100;
  int window = 33;
  int jobs = 1;
  double widen_factor = 1.0;
  /// Saturated AC width as a fraction of the predicted XC width; single-beam
  /// coherence stays below the cross-beam one in the stable-gain region.
  double ac_to_xc_ratio = 0.8;
  double mu = 1.0;
};

struct PowerSweepRow {
  double power_w = 0.0;
  WidthEstimate ac;
  WidthEstimate xc;
};

struct WaistSweepRow {
  double waist_m = 0.0;
  PredictedWidths predicted;
  WidthEstimate ac;
  WidthEstimate xc;
};

/// Full chain per pump power: gain targets -> speckle synthesis -> camera ->
/// correlation maps -> widths.
std::vector<PowerSweepRow> width_vs_power_sweep(const ExperimentConfig& config,
                                                const std::vector<double>& powers_w,
                                                const SweepOptions& options = {});

/// Full chain per pump waist (horizontal waist given; the vertical waist
/// keeps the configured ellipticity), with the phase-matching prediction
/// recorded next to the measured widths.
std::vector<WaistSweepRow> width_vs_waist_sweep(const ExperimentConfig& config,
                                                const std::vector<double>& waists_m,
                                                const SweepOptions& options = {});

/// Mean-removed circular autocovariance per lattice displacement, FFT route
/// and direct-summation route. Both use the same definition:
/// A(d) = (1/N) sum_x (I(x) - mean)(I(x + d) - mean), periodic indexing,
/// with d = 0 stored at grid index (0, 0).
Grid2D<double> autocovariance_fft(const Grid2D<double>& values);
Grid2D<double> autocovariance_direct(const Grid2D<double>& values);

}  // namespace twinbeam
