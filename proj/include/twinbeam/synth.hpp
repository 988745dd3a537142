#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "twinbeam/config.hpp"
#include "twinbeam/core/grid.hpp"
#include "twinbeam/core/rng.hpp"
#include "twinbeam/core/vec.hpp"
#include "twinbeam/detector.hpp"
#include "twinbeam/pair_event.hpp"
#include "twinbeam/pm_model.hpp"

namespace twinbeam {

/// Ground-truth parameters of the Gaussian speckle field generator.
///
/// Width algebra (per axis): a thermal field built from white noise filtered
/// by a Gaussian kernel with sigma `a` has intensity autocorrelation sigma
/// equal to `a`; letting the idler share the signal's modes only up to a
/// Gaussian coherence rolloff of width `j` widens the intensity
/// cross-correlation to sigma sqrt(a^2 + j^2). Widths therefore add in
/// quadrature, and both beams keep identical single-beam statistics.
struct SpeckleModel {
  Vec2 ac_kernel_sigma_m;   // field kernel sigma per axis (radial, azimuthal)
  Vec2 xc_jitter_sigma_m;   // cross-beam coherence rolloff sigma per axis
  double cross_strength_mu = 1.0;  // cross-correlation amplitude in [0, 1]
  double mean_intensity = 1000.0;  // counts per superpixel

  bool operator==(const SpeckleModel&) const = default;
};

/// Phenomenological pump-power response of the speckle statistics: the
/// cross-beam coherence is seeded by pair generation and stays wide at any
/// gain, while single-beam coherence needs the stimulated process and
/// collapses below threshold.
struct GainCurve {
  double p_threshold_w = 20e-3;
  double p_sat_w = 23e-3;
  Vec2 ac_width_sat_m;                   // saturated AC FWHM per axis
  double mean_intensity_per_watt = 4e4;  // counts per superpixel per watt
};

struct GainTargets {
  Vec2 ac_fwhm_m;
  Vec2 xc_fwhm_m;
  double mean_intensity = 0.0;
};

/// Draws the photon pairs of one frame: Poisson pair number, signal positions
/// spread over the signal region under a raised-cosine edge envelope, idler
/// positions at the conjugate point plus per-axis Gaussian jitter.
std::vector<PairEvent> sample_pair_events(const ExperimentConfig& config,
                                          double mean_pairs_per_frame,
                                          const Vec2& jitter_sigma_m,
                                          Philox& rng,
                                          std::int64_t frame_index);

/// Solves the width algebra above so that the rendered stack's intensity
/// AC/XC FWHMs match the targets. Throws std::invalid_argument when
/// target_xc < target_ac on either axis, or for mu outside [0, 1].
SpeckleModel make_speckle_model(const Vec2& target_ac_fwhm_m,
                                const Vec2& target_xc_fwhm_m, double mu,
                                double mean_intensity);

/// Gain-dependent synthesis targets: the XC width tracks the phase-matching
/// prediction at every power; the AC width rises along a saturating
/// exponential and is floored at one superpixel, where pixelization dominates.
GainTargets gain_to_targets(double power_w, const GainCurve& curve,
                            const PredictedWidths& pm_widths,
                            double superpixel_m);

/// Renders speckle frames with the exact correlation structure of a
/// SpeckleModel. Immutable after construction and safe to share across
/// worker threads; frames are reproducible functions of (seed, frame_index).
///
/// Per frame, two white complex Gaussian fields are synthesized at 2x
/// superpixel oversampling, shaped in the spatial-frequency domain by the
/// Gaussian field kernel, mixed mode-by-mode so the idler shares the
/// mirror-conjugated signal modes with amplitude mu * rolloff(q) (unit total
/// variance per mode), mirrored through the conjugation map, squared into
/// intensities and box-integrated down to superpixels.
class SpeckleRenderer {
 public:
  SpeckleRenderer(const SpeckleModel& model, const ExperimentConfig& config);

  Frame render(std::int64_t frame_index) const;

  const SpeckleModel& model() const { return model_; }

 private:
  SpeckleModel model_;
  ExperimentConfig config_;
  int oversample_ = 2;
  int sub_width_ = 0;   // oversampled region grid
  int sub_height_ = 0;
  Grid2D<double> field_filter_;        // |H(q)|, Gaussian field kernel
  Grid2D<double> shared_mode_weight_;  // c(q) = mu * rolloff
  std::vector<std::int32_t> mirror_lut_;  // idler superpixel -> signal superpixel
  double intensity_scale_ = 0.0;
};

/// One-shot convenience wrapper around SpeckleRenderer.
Frame render_speckle_frame(const SpeckleModel& model,
                           const ExperimentConfig& config,
                           std::int64_t frame_index);

}  // namespace twinbeam
