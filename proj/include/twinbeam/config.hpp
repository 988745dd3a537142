#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "twinbeam/core/region.hpp"
#include "twinbeam/core/vec.hpp"

namespace twinbeam {

enum class Regime { counting, intensity };

std::string to_string(Regime regime);
Regime regime_from_string(const std::string& name);

/// Nonlinear crystal description. The effective scalar indices are inputs;
/// defaults come from the beta-barium-borate Sellmeier relations below
/// (extraordinary pump wave at the cut angle, ordinary down-converted wave).
struct CrystalParams {
  double length_m = 8e-3;
  double cut_angle_deg = 37.0;
  double index_pump = 0.0;  // filled by default_config / apply_sellmeier
  double index_down = 0.0;
  std::vector<double> sellmeier_ordinary;       // optional: A, B, C, D
  std::vector<double> sellmeier_extraordinary;  // optional: A, B, C, D

  bool operator==(const CrystalParams&) const = default;
};

struct PumpParams {
  double wavelength_m = 349e-9;
  double power_w = 20e-6;
  double waist_horizontal_m = 0.5e-3;
  double waist_vertical_m = 0.35e-3;
  double pulse_duration_s = 10e-12;

  double ellipticity() const { return waist_vertical_m / waist_horizontal_m; }

  bool operator==(const PumpParams&) const = default;
};

/// Normalized sensor rectangle [x0, x1) x [y0, y1), coordinates in [0, 1].
struct NormRect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  bool operator==(const NormRect&) const = default;
};

/// Beam-routing geometry. The camera-frame radial axis (capital-theta cuts)
/// runs across the emission cone section and the azimuthal axis (capital-psi
/// cuts) along it; with the default layout those are the horizontal and
/// vertical sensor axes. The idler-arm mirror is absorbed into an affine
/// conjugation map on normalized sensor coordinates; superpixel-space maps
/// for the active binning are derived by ExperimentConfig::update_derived().
struct GeometryParams {
  double cone_half_angle_deg = 11.9;
  double camera_distance_m = 0.385;
  double center_wavelength_down_m = 710e-9;
  double filter_bandwidth_m = 40e-9;
  Affine2 conjugation_norm{-1.0, 0.0, 0.0, 1.0, 1.0, 0.0};  // mirror about x=1/2
  char radial_axis = 'x';
  char azimuthal_axis = 'y';
  NormRect signal_region_norm{0.0, 0.0, 0.5, 1.0};
  NormRect idler_region_norm{0.5, 0.0, 1.0, 1.0};

  // Derived for the active binning; not serialized.
  Affine2 conjugation_sp;
  Affine2 conjugation_sp_inv;
  RegionRect signal_region;
  RegionRect idler_region;

  bool operator==(const GeometryParams&) const = default;
};

struct DetectorParams {
  double pixel_pitch_m = 13e-6;
  int binning_counting = 8;
  int binning_intensity = 4;
  int sensor_width_px = 1024;
  int sensor_height_px = 1024;
  double qe_signal = 0.085;
  double qe_idler = 0.072;
  double readout_noise_counts = 10.0;
  double threshold_counts = 50.0;  // 5x readout noise
  double gate_ns = 5.0;
  double dark_event_rate = 1e-5;  // events per superpixel per frame
  double saturation_counts = 65535.0;

  bool operator==(const DetectorParams&) const = default;
};

struct ExperimentConfig {
  CrystalParams crystal;
  PumpParams pump;
  GeometryParams geometry;
  DetectorParams detector;
  int n_frames = 1000;
  int n_reference_points = 100;
  std::uint64_t rng_seed = 20140605;
  Regime regime = Regime::counting;

  int binning() const {
    return regime == Regime::counting ? detector.binning_counting
                                      : detector.binning_intensity;
  }
  int grid_width() const { return detector.sensor_width_px / binning(); }
  int grid_height() const { return detector.sensor_height_px / binning(); }
  double superpixel_m() const { return detector.pixel_pitch_m * binning(); }

  /// Continuous superpixel coordinate: integer k is the center of superpixel
  /// k, so detector-plane position x lands in superpixel floor(x / pitch).
  Vec2 meters_to_sp(const Vec2& m) const {
    const double p = superpixel_m();
    return {m.x / p - 0.5, m.y / p - 0.5};
  }
  Vec2 sp_to_meters(const Vec2& sp) const {
    const double p = superpixel_m();
    return {(sp.x + 0.5) * p, (sp.y + 0.5) * p};
  }

  /// Rebuilds the superpixel-space conjugation map and region rectangles for
  /// the active binning. Must be called after editing geometry, detector
  /// binning or regime; load_config and default_config leave it consistent.
  void update_derived();

  bool operator==(const ExperimentConfig&) const = default;
};

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks every config invariant; returns the list of violations (empty when
/// the config is usable). Never throws.
ValidationReport validate(const ExperimentConfig& config);

/// Maps an idler-region point (continuous superpixel coordinates) to its
/// phase-matching conjugate in the signal region. Throws std::domain_error
/// if the point lies outside the idler region.
Vec2 conjugate_of(const Vec2& point_sp, const GeometryParams& geometry);

/// Same map restricted to superpixel indices (event coordinates).
Vec2i conjugate_event(const Vec2i& event, const GeometryParams& geometry);

/// Beta-barium-borate dispersion helpers.
namespace bbo {
inline constexpr std::array<double, 4> kOrdinary{2.7405, 0.0184, 0.0179,
                                                 0.0155};
inline constexpr std::array<double, 4> kExtraordinary{2.3730, 0.0128, 0.0156,
                                                      0.0044};

/// n^2 = A + B / (lambda_um^2 - C) - D * lambda_um^2.
double sellmeier_index(const std::array<double, 4>& coeffs,
                       double wavelength_m);
double ordinary_index(double wavelength_m);
double extraordinary_index(double wavelength_m);
/// Index seen by an extraordinary wave propagating at `angle_rad` from the
/// optic axis.
double extraordinary_index_at_angle(double angle_rad, double wavelength_m);
}  // namespace bbo

/// Recomputes crystal.index_pump / index_down from the Sellmeier data (the
/// config's own coefficients when present, the built-in BBO set otherwise).
void apply_sellmeier(ExperimentConfig& config);

/// The experiment as published: defaults above plus Sellmeier-derived
/// indices, with derived geometry filled in.
ExperimentConfig default_config();

std::string serialize(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
void save_config(const ExperimentConfig& config, const std::string& path);

/// Reads a config file. When apply_env is true the TWINBEAM_SEED environment
/// variable, if set, overrides run.rng_seed.
ExperimentConfig load_config(const std::string& path, bool apply_env = true);

}  // namespace twinbeam
