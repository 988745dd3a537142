#pragma once

#include <vector>

#include "twinbeam/config.hpp"
#include "twinbeam/core/vec.hpp"

namespace twinbeam {

/// Correlation widths predicted by the plane-wave decomposition, already
/// mapped to the camera plane (meters, FWHM).
struct PredictedWidths {
  double radial_fwhm_m = 0.0;
  double azimuthal_fwhm_m = 0.0;
};

/// One-dimensional sample of the joint amplitude along a cut through the
/// degenerate emission point; values are normalized so max |amplitude| = 1.
struct JointAmplitudeCut {
  std::vector<double> q_offsets_rad_per_m;
  std::vector<double> values;
};

enum class CutAxis { radial, azimuthal };

/// Longitudinal wavevector bookkeeping for the degenerate pair geometry.
///
/// The effective scalar indices do not by themselves place the emission cone
/// at the observed half-angle, so the mismatch carries a constant calibration
/// offset chosen to make the configured cone exactly phase matched; the
/// observed geometry, not the index model, anchors the prediction.
class PhaseMatchingModel {
 public:
  explicit PhaseMatchingModel(const ExperimentConfig& config);

  /// k_pz - k_sz - k_iz (+ calibration offset), k_z = sqrt(k^2 - |q|^2).
  /// Throws std::domain_error for evanescent inputs (|q| >= k).
  double delta_kz(const Vec2& q_signal, const Vec2& q_idler) const;

  double k_pump() const { return k_pump_; }
  double k_down() const { return k_down_; }
  double k_down_vacuum() const { return k_down_vacuum_; }
  const Vec2& q_signal_degenerate() const { return q_signal_degenerate_; }
  const Vec2& q_idler_degenerate() const { return q_idler_degenerate_; }
  double calibration_offset() const { return calibration_offset_; }

  /// Camera-plane displacement for a transverse wavevector offset.
  double q_to_camera_m(double q) const;

 private:
  double raw_delta_kz(const Vec2& q_signal, const Vec2& q_idler) const;

  double k_pump_ = 0.0;
  double k_down_ = 0.0;
  double k_down_vacuum_ = 0.0;
  double camera_distance_m_ = 0.0;
  double crystal_length_m_ = 0.0;
  Vec2 q_signal_degenerate_;
  Vec2 q_idler_degenerate_;
  double calibration_offset_ = 0.0;
};

/// Gaussian pump angular-spectrum amplitude, 1 at q = 0. widen_factor >= 1
/// rescales the spectrum width to mimic a structured (wider-spectrum) pump.
double pump_spatial_spectrum(const Vec2& q_transverse, const PumpParams& pump,
                             double widen_factor = 1.0);

/// Longitudinal phase mismatch for a signal/idler transverse pair.
double phase_mismatch_z(const Vec2& q_signal, const Vec2& q_idler,
                        const ExperimentConfig& config);

/// Pump spectrum times the longitudinal sinc response; real-valued in this
/// monochromatic degenerate reduction.
double joint_amplitude(const Vec2& q_signal, const Vec2& q_idler,
                       const ExperimentConfig& config,
                       double widen_factor = 1.0);

struct PredictOptions {
  double widen_factor = 1.0;
  /// Replace the pump angular spectrum by a constant (diagnostic knob for
  /// separating the two width mechanisms).
  bool constant_pump = false;
  int samples = 4001;
};

/// Samples the joint amplitude along a radial or azimuthal cut with the
/// signal wavevector fixed at the degenerate point.
JointAmplitudeCut sample_joint_amplitude_cut(const ExperimentConfig& config,
                                             CutAxis axis,
                                             double half_range_rad_per_m,
                                             int samples,
                                             double widen_factor = 1.0);

/// FWHM of the squared cut profiles, mapped to the camera plane.
///
/// The radial profile is taken from the longitudinal sinc response alone:
/// across the cone section the energy spread admitted by the interference
/// filter releases the pump sum-momentum constraint, and the longitudinal
/// condition is the restrictive one. Along the azimuth the sinc response is
/// flat and the pump angular spectrum sets the width, so the full product is
/// used there.
PredictedWidths predict_widths(const ExperimentConfig& config,
                               const PredictOptions& options = {});

}  // namespace twinbeam
