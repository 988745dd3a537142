#include "twinbeam/pm_model.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "twinbeam/core/math.hpp"

namespace twinbeam {

namespace {

double kz_component(double k, const Vec2& q) {
  const double q2 = q.norm2();
  if (q2 >= k * k) {
    throw std::domain_error(
        "phase mismatch: evanescent wave (|q| >= k) is outside the model");
  }
  return std::sqrt(k * k - q2);
}

}  // namespace

PhaseMatchingModel::PhaseMatchingModel(const ExperimentConfig& config) {
  const auto& g = config.geometry;
  k_down_vacuum_ = 2.0 * kPi / g.center_wavelength_down_m;
  k_down_ = config.crystal.index_down * k_down_vacuum_;
  k_pump_ = config.crystal.index_pump * 2.0 * kPi / config.pump.wavelength_m;
  camera_distance_m_ = g.camera_distance_m;
  crystal_length_m_ = config.crystal.length_m;

  // Transverse momentum is conserved across the exit face, so the cone
  // half-angle observed in air fixes the degenerate |q| directly.
  const double q_cone =
      k_down_vacuum_ * std::sin(deg_to_rad(g.cone_half_angle_deg));
  q_signal_degenerate_ = {q_cone, 0.0};
  q_idler_degenerate_ = {-q_cone, 0.0};
  calibration_offset_ = 0.0;
  calibration_offset_ = -raw_delta_kz(q_signal_degenerate_, q_idler_degenerate_);
}

double PhaseMatchingModel::raw_delta_kz(const Vec2& q_signal,
                                        const Vec2& q_idler) const {
  const Vec2 q_pump = q_signal + q_idler;
  return kz_component(k_pump_, q_pump) - kz_component(k_down_, q_signal) -
         kz_component(k_down_, q_idler);
}

double PhaseMatchingModel::delta_kz(const Vec2& q_signal,
                                    const Vec2& q_idler) const {
  return raw_delta_kz(q_signal, q_idler) + calibration_offset_;
}

double PhaseMatchingModel::q_to_camera_m(double q) const {
  return camera_distance_m_ * q / k_down_vacuum_;
}

double pump_spatial_spectrum(const Vec2& q, const PumpParams& pump,
                             double widen_factor) {
  if (!(pump.waist_horizontal_m > 0.0) || !(pump.waist_vertical_m > 0.0)) {
    throw std::invalid_argument("pump_spatial_spectrum: waists must be positive");
  }
  if (!(widen_factor >= 1.0)) {
    throw std::invalid_argument("pump_spatial_spectrum: widen_factor must be >= 1");
  }
  const double inv_w2 = 1.0 / sq(widen_factor);
  return std::exp(-(sq(pump.waist_horizontal_m * q.x) +
                    sq(pump.waist_vertical_m * q.y)) *
                  0.25 * inv_w2);
}

double phase_mismatch_z(const Vec2& q_signal, const Vec2& q_idler,
                        const ExperimentConfig& config) {
  return PhaseMatchingModel(config).delta_kz(q_signal, q_idler);
}

double joint_amplitude(const Vec2& q_signal, const Vec2& q_idler,
                       const ExperimentConfig& config, double widen_factor) {
  const PhaseMatchingModel model(config);
  const double mismatch = model.delta_kz(q_signal, q_idler);
  return pump_spatial_spectrum(q_signal + q_idler, config.pump, widen_factor) *
         sinc(mismatch * config.crystal.length_m * 0.5);
}

JointAmplitudeCut sample_joint_amplitude_cut(const ExperimentConfig& config,
                                             CutAxis axis,
                                             double half_range_rad_per_m,
                                             int samples,
                                             double widen_factor) {
  if (samples < 3) {
    throw std::invalid_argument("sample_joint_amplitude_cut: samples < 3");
  }
  const PhaseMatchingModel model(config);
  const Vec2 qs0 = model.q_signal_degenerate();
  const Vec2 qi0 = model.q_idler_degenerate();
  JointAmplitudeCut cut;
  cut.q_offsets_rad_per_m.resize(samples);
  cut.values.resize(samples);
  double peak = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double delta =
        (2.0 * i / (samples - 1) - 1.0) * half_range_rad_per_m;
    const Vec2 qi = axis == CutAxis::radial ? Vec2{qi0.x + delta, qi0.y}
                                            : Vec2{qi0.x, qi0.y + delta};
    cut.q_offsets_rad_per_m[i] = delta;
    cut.values[i] = joint_amplitude(qs0, qi, config, widen_factor);
    peak = std::max(peak, std::abs(cut.values[i]));
  }
  if (peak > 0.0) {
    for (double& v : cut.values) v /= peak;
  }
  return cut;
}

namespace {

/// FWHM of a symmetric-enough sampled profile by linear interpolation of the
/// first half-maximum crossings away from the peak. Returns a negative value
/// if a crossing is not bracketed inside the samples.
double profile_fwhm(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  int peak = 0;
  for (int i = 1; i < static_cast<int>(ys.size()); ++i) {
    if (ys[i] > ys[peak]) peak = i;
  }
  const double half = ys[peak] * 0.5;
  const int n = static_cast<int>(ys.size());

  double left = 0.0, right = 0.0;
  bool found_left = false, found_right = false;
  for (int i = peak; i > 0; --i) {
    if (ys[i - 1] <= half && ys[i] > half) {
      const double t = (half - ys[i - 1]) / (ys[i] - ys[i - 1]);
      left = xs[i - 1] + t * (xs[i] - xs[i - 1]);
      found_left = true;
      break;
    }
  }
  for (int i = peak; i + 1 < n; ++i) {
    if (ys[i + 1] <= half && ys[i] > half) {
      const double t = (ys[i] - half) / (ys[i] - ys[i + 1]);
      right = xs[i] + t * (xs[i + 1] - xs[i]);
      found_right = true;
      break;
    }
  }
  if (!found_left || !found_right) return -1.0;
  return right - left;
}

}  // namespace

PredictedWidths predict_widths(const ExperimentConfig& config,
                               const PredictOptions& options) {
  if (options.samples < 16) {
    throw std::invalid_argument("predict_widths: need at least 16 samples");
  }
  const PhaseMatchingModel model(config);
  const Vec2 qs0 = model.q_signal_degenerate();
  const Vec2 qi0 = model.q_idler_degenerate();
  const double half_length = config.crystal.length_m * 0.5;

  const auto radial_profile = [&](double delta) {
    const double mismatch =
        model.delta_kz(qs0, {qi0.x + delta, qi0.y});
    return sq(sinc(mismatch * half_length));
  };
  const auto azimuthal_profile = [&](double delta) {
    const Vec2 qi{qi0.x, qi0.y + delta};
    const double mismatch = model.delta_kz(qs0, qi);
    const double pump_factor =
        options.constant_pump
            ? 1.0
            : pump_spatial_spectrum(qs0 + qi, config.pump,
                                    options.widen_factor);
    return sq(pump_factor * sinc(mismatch * half_length));
  };

  // Initial half-ranges from the local behavior of each mechanism: the
  // mismatch is linear in the radial offset, and the pump spectrum bounds the
  // azimuthal profile. The sweep then widens until the half maximum is
  // bracketed.
  const double probe = 10.0;
  const double radial_slope =
      std::abs(model.delta_kz(qs0, {qi0.x + probe, qi0.y})) / probe;
  double radial_range = radial_slope > 0.0
                            ? 10.0 * 1.3915573 / (radial_slope * half_length)
                            : 1e5;
  double azimuthal_range =
      10.0 * std::sqrt(2.0 * std::log(2.0)) * options.widen_factor /
      config.pump.waist_vertical_m;

  const auto fwhm_with_widening = [&](std::function<double(double)> profile,
                                      double range) {
    for (int attempt = 0; attempt < 10; ++attempt) {
      std::vector<double> xs(options.samples);
      std::vector<double> ys(options.samples);
      for (int i = 0; i < options.samples; ++i) {
        xs[i] = (2.0 * i / (options.samples - 1) - 1.0) * range;
        ys[i] = profile(xs[i]);
      }
      const double fwhm = profile_fwhm(xs, ys);
      if (fwhm > 0.0) return fwhm;
      range *= 2.0;
    }
    throw std::range_error(
        "predict_widths: half maximum not bracketed within the sweep range");
  };

  PredictedWidths widths;
  widths.radial_fwhm_m =
      model.q_to_camera_m(fwhm_with_widening(radial_profile, radial_range));
  widths.azimuthal_fwhm_m = model.q_to_camera_m(
      fwhm_with_widening(azimuthal_profile, azimuthal_range));
  return widths;
}

}  // namespace twinbeam
