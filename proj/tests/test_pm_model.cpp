#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "twinbeam/config.hpp"
#include "twinbeam/core/math.hpp"
#include "twinbeam/core/rng.hpp"
#include "twinbeam/pm_model.hpp"

using namespace twinbeam;
namespace mp = boost::multiprecision;

TEST_CASE("pump spatial spectrum normalization and analytic point") {
  const ExperimentConfig config = default_config();
  CHECK(pump_spatial_spectrum({0.0, 0.0}, config.pump) == 1.0);

  const double qx = 2.0 / config.pump.waist_horizontal_m;
  CHECK(pump_spatial_spectrum({qx, 0.0}, config.pump) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  // Widening by 2 equals evaluating the unwidened spectrum at q/2.
  Philox rng(31, 0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 q{(rng.uniform() - 0.5) * 4e4, (rng.uniform() - 0.5) * 4e4};
    CHECK(pump_spatial_spectrum(q, config.pump, 2.0) ==
          doctest::Approx(pump_spatial_spectrum(q / 2.0, config.pump, 1.0))
              .epsilon(1e-12));
  }

  CHECK_THROWS_AS(pump_spatial_spectrum({0, 0}, config.pump, 0.5),
                  std::invalid_argument);
}

TEST_CASE("the configured cone is exactly phase matched") {
  const ExperimentConfig config = default_config();
  const PhaseMatchingModel model(config);
  const double mismatch =
      model.delta_kz(model.q_signal_degenerate(), model.q_idler_degenerate());
  CHECK(std::abs(mismatch) < 1e-6 * model.k_pump());
}

TEST_CASE("collinear-matched indices give zero mismatch on axis") {
  ExperimentConfig config = default_config();
  // Indices chosen so the collinear degenerate pair is matched without any
  // calibration: n_p / lambda_p = 2 n_d / lambda_d.
  config.pump.wavelength_m = config.geometry.center_wavelength_down_m / 2.0;
  config.crystal.index_pump = 1.6;
  config.crystal.index_down = 1.6;
  config.geometry.cone_half_angle_deg = 1e-9;  // calibrate on the axis
  config.update_derived();
  CHECK(std::abs(phase_mismatch_z({0.0, 0.0}, {0.0, 0.0}, config)) < 1e-9);

  // And the raw (uncalibrated) mismatch vanishes there too.
  const PhaseMatchingModel model(config);
  CHECK(std::abs(model.calibration_offset()) < 1e-9);
}

TEST_CASE("off-matched mismatch agrees with a 50-digit re-evaluation") {
  const ExperimentConfig config = default_config();
  const PhaseMatchingModel model(config);
  const Vec2 qs{model.q_signal_degenerate().x + 1234.5, 778.0};
  const Vec2 qi{model.q_idler_degenerate().x - 2500.0, -431.25};

  using big = mp::cpp_bin_float_50;
  const big pi_big("3.14159265358979323846264338327950288");
  const auto kz = [](big k, big qx, big qy) {
    return mp::sqrt(k * k - qx * qx - qy * qy);
  };
  const big kp =
      big(config.crystal.index_pump) * 2 * pi_big / big(config.pump.wavelength_m);
  const big kd = big(config.crystal.index_down) * 2 * pi_big /
                 big(config.geometry.center_wavelength_down_m);
  const auto raw = [&](big sx, big sy, big ix, big iy) {
    return kz(kp, sx + ix, sy + iy) - kz(kd, sx, sy) - kz(kd, ix, iy);
  };
  const big q_deg = big(model.q_signal_degenerate().x);
  const big oracle = raw(big(qs.x), big(qs.y), big(qi.x), big(qi.y)) -
                     raw(q_deg, big(0), -q_deg, big(0));

  const double mismatch = model.delta_kz(qs, qi);
  CHECK(std::abs(mismatch - static_cast<double>(oracle)) < 1e-5);
  CHECK(mismatch != 0.0);
}

TEST_CASE("evanescent inputs are rejected") {
  const ExperimentConfig config = default_config();
  const PhaseMatchingModel model(config);
  const double k = model.k_down();
  CHECK_THROWS_AS(model.delta_kz({k * 1.01, 0.0}, {0.0, 0.0}),
                  std::domain_error);
}

TEST_CASE("joint amplitude is the product of its two factors") {
  const ExperimentConfig config = default_config();
  const PhaseMatchingModel model(config);
  const Vec2 qs0 = model.q_signal_degenerate();
  const Vec2 qi0 = model.q_idler_degenerate();

  // Matched pair with zero transverse sum: both factors are unity.
  CHECK(joint_amplitude(qs0, qi0, config) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Find the radial offset where the sinc argument reaches pi (first zero).
  double lo = 0.0, hi = 2e4;
  auto arg = [&](double d) {
    return model.delta_kz(qs0, {qi0.x + d, qi0.y}) * config.crystal.length_m /
           2.0;
  };
  while (std::abs(arg(hi)) < kPi) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::abs(arg(mid)) < kPi ? lo : hi) = mid;
  }
  const double at_zero = joint_amplitude(qs0, {qi0.x + hi, qi0.y}, config);
  CHECK(std::abs(at_zero) < 1e-9);

  // Generic pairs: amplitude equals the independently evaluated factor
  // product, and never exceeds 1.
  Philox rng(77, 0);
  for (int i = 0; i < 300; ++i) {
    const Vec2 qs{qs0.x + (rng.uniform() - 0.5) * 2e4,
                  (rng.uniform() - 0.5) * 2e4};
    const Vec2 qi{qi0.x + (rng.uniform() - 0.5) * 2e4,
                  (rng.uniform() - 0.5) * 2e4};
    const double pump_factor = pump_spatial_spectrum(qs + qi, config.pump);
    const double sinc_factor =
        sinc(phase_mismatch_z(qs, qi, config) * config.crystal.length_m / 2.0);
    const double amplitude = joint_amplitude(qs, qi, config);
    CHECK(amplitude ==
          doctest::Approx(pump_factor * sinc_factor).epsilon(1e-12));
    CHECK(std::abs(amplitude) <= 1.0 + 1e-12);
  }
}

TEST_CASE("sampled amplitude cut is normalized and peaked at matching") {
  const ExperimentConfig config = default_config();
  const JointAmplitudeCut cut =
      sample_joint_amplitude_cut(config, CutAxis::azimuthal, 2e4, 801);
  double peak = 0.0;
  for (const double v : cut.values) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(1.0));
  // The maximum sits at zero offset (exact phase matching).
  const std::size_t mid = cut.values.size() / 2;
  CHECK(std::abs(cut.values[mid]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("radial width is set by the longitudinal response") {
  ExperimentConfig config = default_config();
  const PredictedWidths base = predict_widths(config);
  CHECK(base.radial_fwhm_m > 0.0);
  CHECK(base.azimuthal_fwhm_m > 0.0);

  // Pump spectrum flattened: radial width moves by < 5%.
  const PredictedWidths flat = predict_widths(config, {.constant_pump = true});
  CHECK(std::abs(flat.radial_fwhm_m - base.radial_fwhm_m) <
        0.05 * base.radial_fwhm_m);

  // Radial width varies by < 15% across the waist sweep.
  double radial_min = 1e9, radial_max = 0.0;
  for (const double waist : {0.3e-3, 0.5e-3, 0.8e-3, 1.1e-3, 1.5e-3}) {
    ExperimentConfig point = config;
    point.pump.waist_horizontal_m = waist;
    point.pump.waist_vertical_m = 0.7 * waist;
    const PredictedWidths w = predict_widths(point);
    radial_min = std::min(radial_min, w.radial_fwhm_m);
    radial_max = std::max(radial_max, w.radial_fwhm_m);
  }
  CHECK((radial_max - radial_min) / radial_min < 0.15);
}

TEST_CASE("azimuthal width follows the pump spectrum") {
  ExperimentConfig config = default_config();
  const PredictedWidths base = predict_widths(config);

  // Doubling the waist roughly halves the azimuthal width.
  ExperimentConfig doubled = config;
  doubled.pump.waist_horizontal_m *= 2.0;
  doubled.pump.waist_vertical_m *= 2.0;
  const PredictedWidths half = predict_widths(doubled);
  const double ratio = base.azimuthal_fwhm_m / half.azimuthal_fwhm_m;
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.3);

  // A twice-wider pump spectrum strictly widens the azimuthal cut.
  const PredictedWidths widened =
      predict_widths(config, {.widen_factor = 2.0});
  CHECK(widened.azimuthal_fwhm_m > base.azimuthal_fwhm_m);
  CHECK(widened.azimuthal_fwhm_m ==
        doctest::Approx(2.0 * base.azimuthal_fwhm_m).epsilon(0.02));
}

TEST_CASE("crystal length acts on the radial width only") {
  ExperimentConfig config = default_config();
  const PredictedWidths base = predict_widths(config);
  ExperimentConfig doubled = config;
  doubled.crystal.length_m *= 2.0;
  const PredictedWidths at2l = predict_widths(doubled);
  CHECK(std::abs(at2l.radial_fwhm_m - 0.5 * base.radial_fwhm_m) <
        0.2 * 0.5 * base.radial_fwhm_m);
  CHECK(std::abs(at2l.azimuthal_fwhm_m - base.azimuthal_fwhm_m) <
        0.05 * base.azimuthal_fwhm_m);
}

TEST_CASE("predictions are deterministic and grid-converged") {
  const ExperimentConfig config = default_config();
  const PredictedWidths a = predict_widths(config);
  const PredictedWidths b = predict_widths(config);
  CHECK(a.radial_fwhm_m == b.radial_fwhm_m);
  CHECK(a.azimuthal_fwhm_m == b.azimuthal_fwhm_m);

  const PredictedWidths fine = predict_widths(config, {.samples = 8001});
  CHECK(std::abs(fine.radial_fwhm_m - a.radial_fwhm_m) <
        0.01 * a.radial_fwhm_m);
  CHECK(std::abs(fine.azimuthal_fwhm_m - a.azimuthal_fwhm_m) <
        0.01 * a.azimuthal_fwhm_m);
}
