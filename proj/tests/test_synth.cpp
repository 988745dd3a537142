#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "twinbeam/config.hpp"
#include "twinbeam/core/math.hpp"
#include "twinbeam/core/rng.hpp"
#include "twinbeam/synth.hpp"

using namespace twinbeam;

namespace {

ExperimentConfig small_intensity_config() {
  ExperimentConfig config = default_config();
  config.regime = Regime::intensity;
  config.detector.sensor_width_px = 256;
  config.detector.sensor_height_px = 256;
  config.update_derived();
  return config;
}

}  // namespace

TEST_CASE("pair sampling: zero rate, exact conjugation, jitter moments") {
  ExperimentConfig config = default_config();

  Philox rng(5, 0, kSubPairSampling);
  CHECK(sample_pair_events(config, 0.0, {0.0, 0.0}, rng, 0).empty());
  CHECK_THROWS_AS(sample_pair_events(config, -1.0, {0, 0}, rng, 0),
                  std::invalid_argument);

  // Zero jitter: every idler lands exactly on the conjugate point.
  Philox rng_zero(5, 1, kSubPairSampling);
  const auto exact = sample_pair_events(config, 200.0, {0.0, 0.0}, rng_zero, 1);
  REQUIRE(!exact.empty());
  for (const PairEvent& pair : exact) {
    const Vec2 conj_sp = config.geometry.conjugation_sp_inv.apply(
        config.meters_to_sp(pair.signal_pos_m));
    const Vec2 expected = config.sp_to_meters(conj_sp);
    CHECK(pair.idler_pos_m.x == doctest::Approx(expected.x).epsilon(1e-12));
    CHECK(pair.idler_pos_m.y == doctest::Approx(expected.y).epsilon(1e-12));
  }

  // Configured jitter FWHM is recovered by the sample covariance (moment
  // oracle over ~1e6 pairs).
  const Vec2 jitter{490e-6 / kFwhmPerSigma, 710e-6 / kFwhmPerSigma};
  double sum_x2 = 0.0, sum_y2 = 0.0, sum_x = 0.0, sum_y = 0.0;
  std::size_t n = 0;
  for (int f = 0; f < 2000; ++f) {
    Philox frame_rng(6, f, kSubPairSampling);
    const auto pairs = sample_pair_events(config, 500.0, jitter, frame_rng, f);
    for (const PairEvent& pair : pairs) {
      const Vec2 conj_sp = config.geometry.conjugation_sp_inv.apply(
          config.meters_to_sp(pair.signal_pos_m));
      const Vec2 conj_m = config.sp_to_meters(conj_sp);
      const double dx = pair.idler_pos_m.x - conj_m.x;
      const double dy = pair.idler_pos_m.y - conj_m.y;
      sum_x += dx;
      sum_y += dy;
      sum_x2 += dx * dx;
      sum_y2 += dy * dy;
      ++n;
    }
  }
  REQUIRE(n > 900000);
  const double var_x = sum_x2 / n - sq(sum_x / n);
  const double var_y = sum_y2 / n - sq(sum_y / n);
  CHECK(kFwhmPerSigma * std::sqrt(var_x) ==
        doctest::Approx(490e-6).epsilon(0.03));
  CHECK(kFwhmPerSigma * std::sqrt(var_y) ==
        doctest::Approx(710e-6).epsilon(0.03));

  // Poisson pair number.
  double count = 0.0;
  for (int f = 0; f < 2000; ++f) {
    Philox frame_rng(7, f, kSubPairSampling);
    count += static_cast<double>(
        sample_pair_events(config, 123.5, {0, 0}, frame_rng, f).size());
  }
  CHECK(count / 2000.0 == doctest::Approx(123.5).epsilon(0.02));

  // Envelope keeps signal positions inside the signal region.
  const RegionRect region = config.geometry.signal_region;
  const double pitch = config.superpixel_m();
  Philox rng_env(8, 0, kSubPairSampling);
  for (const PairEvent& pair :
       sample_pair_events(config, 2000.0, {0, 0}, rng_env, 0)) {
    CHECK(pair.signal_pos_m.x >= region.x0 * pitch);
    CHECK(pair.signal_pos_m.x <= region.x1 * pitch);
    CHECK(pair.signal_pos_m.y >= region.y0 * pitch);
    CHECK(pair.signal_pos_m.y <= region.y1 * pitch);
  }
}

TEST_CASE("speckle model width algebra") {
  // Equal targets: no coherence rolloff.
  const SpeckleModel equal =
      make_speckle_model({300e-6, 300e-6}, {300e-6, 300e-6}, 1.0, 500.0);
  CHECK(equal.xc_jitter_sigma_m.x == 0.0);
  CHECK(equal.xc_jitter_sigma_m.y == 0.0);
  CHECK(equal.ac_kernel_sigma_m.x ==
        doctest::Approx(300e-6 / kFwhmPerSigma).epsilon(1e-12));

  // Quadrature identity: sigma_xc^2 = sigma_ac^2 + sigma_j^2.
  const SpeckleModel model =
      make_speckle_model({300e-6, 280e-6}, {500e-6, 650e-6}, 0.9, 500.0);
  CHECK(sq(model.ac_kernel_sigma_m.x) + sq(model.xc_jitter_sigma_m.x) ==
        doctest::Approx(sq(500e-6 / kFwhmPerSigma)).epsilon(1e-12));
  CHECK(sq(model.ac_kernel_sigma_m.y) + sq(model.xc_jitter_sigma_m.y) ==
        doctest::Approx(sq(650e-6 / kFwhmPerSigma)).epsilon(1e-12));

  CHECK_THROWS_AS(
      make_speckle_model({300e-6, 300e-6}, {200e-6, 300e-6}, 1.0, 500.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      make_speckle_model({300e-6, 300e-6}, {300e-6, 300e-6}, 1.5, 500.0),
      std::invalid_argument);
}

TEST_CASE("gain curve targets") {
  const PredictedWidths pm{242e-6, 293e-6};
  GainCurve curve;
  curve.ac_width_sat_m = {0.8 * pm.radial_fwhm_m, 0.8 * pm.azimuthal_fwhm_m};
  const double sp = 52e-6;

  // Below threshold the AC target clamps to one superpixel.
  const GainTargets low = gain_to_targets(0.015, curve, pm, sp);
  CHECK(low.ac_fwhm_m.x == sp);
  CHECK(low.ac_fwhm_m.y == sp);

  // Plateau: within 10% of the saturated width between 30 and 50 mW.
  for (const double p : {0.030, 0.040, 0.050}) {
    const GainTargets t = gain_to_targets(p, curve, pm, sp);
    CHECK(t.ac_fwhm_m.x > 0.9 * curve.ac_width_sat_m.x);
    CHECK(t.ac_fwhm_m.x <= curve.ac_width_sat_m.x);
  }

  // The XC target ignores the pump power entirely.
  const GainTargets a = gain_to_targets(0.025, curve, pm, sp);
  const GainTargets b = gain_to_targets(0.050, curve, pm, sp);
  CHECK(a.xc_fwhm_m.x == b.xc_fwhm_m.x);
  CHECK(a.xc_fwhm_m.y == b.xc_fwhm_m.y);

  // Mean intensity grows with power.
  CHECK(b.mean_intensity > a.mean_intensity);

  GainCurve bad = curve;
  bad.p_sat_w = bad.p_threshold_w;
  CHECK_THROWS_AS(gain_to_targets(0.03, bad, pm, sp), std::invalid_argument);
}

TEST_CASE("speckle frames are deterministic in (seed, frame)") {
  const ExperimentConfig config = small_intensity_config();
  const SpeckleModel model =
      make_speckle_model({200e-6, 250e-6}, {300e-6, 400e-6}, 1.0, 800.0);
  const SpeckleRenderer renderer(model, config);
  const Frame a = renderer.render(17);
  const Frame b = renderer.render(17);
  CHECK(a.values == b.values);
  const Frame c = renderer.render(18);
  CHECK(a.values != c.values);
}

TEST_CASE("full cross coherence with zero rolloff copies the mirrored beam") {
  const ExperimentConfig config = small_intensity_config();
  const SpeckleModel model =
      make_speckle_model({250e-6, 250e-6}, {250e-6, 250e-6}, 1.0, 600.0);
  REQUIRE(model.xc_jitter_sigma_m.x == 0.0);
  const Frame frame = render_speckle_frame(model, config, 3);
  const RegionRect idler = config.geometry.idler_region;
  for (int y = idler.y0; y < idler.y1; ++y) {
    for (int x = idler.x0; x < idler.x1; ++x) {
      const Vec2i mirrored = conjugate_event({x, y}, config.geometry);
      CHECK(frame.values(x, y) == frame.values(mirrored.x, mirrored.y));
    }
  }
}

TEST_CASE("no shared modes means no cross correlation") {
  const ExperimentConfig config = small_intensity_config();
  const SpeckleModel model =
      make_speckle_model({250e-6, 250e-6}, {350e-6, 350e-6}, 0.0, 600.0);
  // With mu = 0 the beams are built from independent latent fields; the
  // intensity covariance at the conjugate point stays at estimator noise.
  const RegionRect idler = config.geometry.idler_region;
  const int n_frames = 400;
  const Vec2i ref{idler.x0 + idler.width() / 2, idler.y0 + idler.height() / 2};
  const Vec2i conj = conjugate_event(ref, config.geometry);
  double sum_i = 0.0, sum_s = 0.0, sum_is = 0.0, sum_i2 = 0.0, sum_s2 = 0.0;
  const SpeckleRenderer renderer(model, config);
  for (int f = 0; f < n_frames; ++f) {
    const Frame frame = renderer.render(f);
    const double vi = frame.values(ref.x, ref.y);
    const double vs = frame.values(conj.x, conj.y);
    sum_i += vi;
    sum_s += vs;
    sum_is += vi * vs;
    sum_i2 += vi * vi;
    sum_s2 += vs * vs;
  }
  const double n = n_frames;
  const double cov = sum_is / n - (sum_i / n) * (sum_s / n);
  const double var_i = sum_i2 / n - sq(sum_i / n);
  const double var_s = sum_s2 / n - sq(sum_s / n);
  // 3 sigma of the correlation-coefficient estimator around zero.
  const double corr = cov / std::sqrt(var_i * var_s);
  CHECK(std::abs(corr) < 3.0 / std::sqrt(n));
}

TEST_CASE("rendered mean intensity matches the model") {
  const ExperimentConfig config = small_intensity_config();
  const SpeckleModel model =
      make_speckle_model({300e-6, 300e-6}, {400e-6, 400e-6}, 1.0, 750.0);
  const SpeckleRenderer renderer(model, config);
  double sum = 0.0;
  std::size_t count = 0;
  for (int f = 0; f < 1000; ++f) {
    const Frame frame = renderer.render(f);
    const RegionRect signal = frame.signal_region;
    for (int y = signal.y0; y < signal.y1; ++y) {
      for (int x = signal.x0; x < signal.x1; ++x) {
        sum += frame.values(x, y);
        ++count;
      }
    }
  }
  CHECK(sum / static_cast<double>(count) ==
        doctest::Approx(750.0).epsilon(0.01));
}

TEST_CASE("single-superpixel intensities follow the thermal law") {
  const ExperimentConfig config = small_intensity_config();
  const SpeckleModel model =
      make_speckle_model({300e-6, 300e-6}, {400e-6, 400e-6}, 1.0, 500.0);
  const SpeckleRenderer renderer(model, config);
  const RegionRect signal = config.geometry.signal_region;
  const Vec2i probe{signal.x0 + signal.width() / 2,
                    signal.y0 + signal.height() / 2};
  std::vector<double> samples;
  const int n_frames = 1500;
  samples.reserve(n_frames);
  for (int f = 0; f < n_frames; ++f) {
    samples.push_back(renderer.render(f).values(probe.x, probe.y));
  }
  std::sort(samples.begin(), samples.end());
  const double mean =
      std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  double ks = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = 1.0 - std::exp(-samples[i] / mean);
    const double hi = static_cast<double>(i + 1) / samples.size();
    const double lo = static_cast<double>(i) / samples.size();
    ks = std::max({ks, std::abs(cdf - hi), std::abs(cdf - lo)});
  }
  CHECK(ks < 0.04);  // smoke-level bound at 1.5e3 frames
}

TEST_CASE("frame autocovariance matches the kernel autocorrelation") {
  const ExperimentConfig config = small_intensity_config();
  const double sigma_m = 300e-6 / kFwhmPerSigma;
  const SpeckleModel model =
      make_speckle_model({300e-6, 300e-6}, {400e-6, 400e-6}, 1.0, 500.0);
  const SpeckleRenderer renderer(model, config);
  const RegionRect signal = config.geometry.signal_region;
  const double pitch = config.superpixel_m();

  // Direct-summation autocovariance estimate at a few displacements,
  // averaged over 100 frames; the oracle never touches the FFT path.
  const std::vector<Vec2i> displacements = {{0, 0}, {1, 0}, {2, 0}, {3, 0},
                                            {0, 1}, {0, 2}, {0, 3}, {2, 2}};
  std::vector<double> acc(displacements.size(), 0.0);
  const int n_frames = 100;
  for (int f = 0; f < n_frames; ++f) {
    const Frame frame = renderer.render(f);
    for (std::size_t d = 0; d < displacements.size(); ++d) {
      const Vec2i dv = displacements[d];
      double sum = 0.0;
      int count = 0;
      for (int y = signal.y0; y < signal.y1 - dv.y; ++y) {
        for (int x = signal.x0; x < signal.x1 - dv.x; ++x) {
          sum += (frame.values(x, y) - model.mean_intensity) *
                 (frame.values(x + dv.x, y + dv.y) - model.mean_intensity);
          ++count;
        }
      }
      acc[d] += sum / count;
    }
  }
  for (std::size_t d = 1; d < displacements.size(); ++d) {
    const Vec2i dv = displacements[d];
    const double measured = acc[d] / acc[0];
    const double dist2 = sq(dv.x * pitch) + sq(dv.y * pitch);
    const double analytic = std::exp(-dist2 / (2.0 * sq(sigma_m)));
    CHECK(measured == doctest::Approx(analytic).epsilon(0.10));
  }
}
