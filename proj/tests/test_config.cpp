#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>

#include "twinbeam/config.hpp"

using namespace twinbeam;

TEST_CASE("default config reproduces the published run parameters") {
  const ExperimentConfig config = default_config();
  CHECK(config.pump.wavelength_m == 349e-9);
  CHECK(config.crystal.length_m == 8e-3);
  CHECK(config.crystal.cut_angle_deg == 37.0);
  CHECK(config.geometry.cone_half_angle_deg == 11.9);
  CHECK(config.geometry.camera_distance_m == 0.385);
  CHECK(config.geometry.center_wavelength_down_m == 710e-9);
  CHECK(config.geometry.filter_bandwidth_m == 40e-9);
  CHECK(config.detector.pixel_pitch_m == 13e-6);
  CHECK(config.detector.sensor_width_px == 1024);
  CHECK(config.detector.sensor_height_px == 1024);
  CHECK(config.detector.binning_counting == 8);
  CHECK(config.detector.binning_intensity == 4);
  CHECK(config.detector.gate_ns == 5.0);
  CHECK(config.detector.qe_signal == 0.085);
  CHECK(config.detector.qe_idler == 0.072);
  CHECK(config.n_frames == 1000);
  CHECK(config.n_reference_points == 100);
  CHECK(config.pump.ellipticity() == doctest::Approx(0.7));

  // Sellmeier-derived effective indices (ordinary down-converted wave at
  // 710 nm, extraordinary pump at the cut angle).
  CHECK(config.crystal.index_down == doctest::Approx(1.66449).epsilon(1e-4));
  CHECK(config.crystal.index_pump == doctest::Approx(1.65741).epsilon(1e-4));

  // Counting-regime grid: 128x128 superpixels, half-sensor regions.
  CHECK(config.grid_width() == 128);
  CHECK(config.grid_height() == 128);
  CHECK(config.geometry.signal_region == RegionRect{0, 0, 64, 128});
  CHECK(config.geometry.idler_region == RegionRect{64, 0, 128, 128});
  CHECK(config.geometry.idler_region.area() > 6000);

  CHECK(validate(config).ok());
}

TEST_CASE("validate reports out-of-range fields by name") {
  ExperimentConfig config = default_config();
  config.detector.qe_signal = 1.2;
  const ValidationReport report = validate(config);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].field == "detector.qe_signal");

  ExperimentConfig overlap = default_config();
  overlap.geometry.idler_region_norm = {0.25, 0.0, 0.75, 1.0};
  overlap.update_derived();
  bool found = false;
  for (const auto& v : validate(overlap).violations) {
    found |= v.field == "geometry.regions";
  }
  CHECK(found);

  ExperimentConfig bad = default_config();
  bad.crystal.length_m = -1.0;
  bad.pump.waist_vertical_m = bad.pump.waist_horizontal_m * 1.6;
  bad.detector.binning_counting = 7;  // does not divide 1024
  const auto violations = validate(bad).violations;
  std::set<std::string> fields;
  for (const auto& v : violations) fields.insert(v.field);
  CHECK(fields.count("crystal.length_m") == 1);
  CHECK(fields.count("pump.ellipticity") == 1);
  CHECK(fields.count("detector.binning") == 1);
}

TEST_CASE("config round-trips through the key/value format") {
  ExperimentConfig config = default_config();
  config.rng_seed = 987654321;
  config.regime = Regime::intensity;
  config.pump.power_w = 0.04;
  config.crystal.sellmeier_ordinary = {2.7405, 0.0184, 0.0179, 0.0155};
  config.update_derived();

  const ExperimentConfig parsed = parse_config(serialize(config));
  CHECK(parsed == config);
}

TEST_CASE("unknown config keys are rejected") {
  CHECK_THROWS_WITH_AS(parse_config("detector.gain = 3\n"),
                       doctest::Contains("unknown key"), std::runtime_error);
  CHECK_THROWS_AS(parse_config("crystal.length_m 8e-3\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_config("run.regime = fast\n"), std::runtime_error);
}

TEST_CASE("TWINBEAM_SEED overrides the configured seed") {
  ExperimentConfig config = default_config();
  config.rng_seed = 111;
  const std::string path = "/tmp/twinbeam_test_config.cfg";
  save_config(config, path);

  setenv("TWINBEAM_SEED", "2024", 1);
  CHECK(load_config(path).rng_seed == 2024);
  CHECK(load_config(path, /*apply_env=*/false).rng_seed == 111);
  unsetenv("TWINBEAM_SEED");
  CHECK(load_config(path).rng_seed == 111);
}

TEST_CASE("conjugate_of maps the idler region onto the signal region") {
  const ExperimentConfig config = default_config();
  const GeometryParams& geometry = config.geometry;

  // Region centers map onto each other under the default mirror.
  const Vec2 idler_center{(64 + 128) / 2.0 - 0.5, 128 / 2.0 - 0.5};
  const Vec2 signal_center{64 / 2.0 - 0.5, 128 / 2.0 - 0.5};
  const Vec2 mapped = conjugate_of(idler_center, geometry);
  CHECK(mapped.x == doctest::Approx(signal_center.x).epsilon(1e-12));
  CHECK(mapped.y == doctest::Approx(signal_center.y).epsilon(1e-12));

  // Applying the inverse map returns the original point exactly.
  const Vec2 probe{97.0, 31.0};
  const Vec2 back =
      geometry.conjugation_sp_inv.apply(conjugate_of(probe, geometry));
  CHECK(back.x == doctest::Approx(probe.x).epsilon(1e-12));
  CHECK(back.y == doctest::Approx(probe.y).epsilon(1e-12));

  // Offsets transform by the linear part; the oracle is a direct matrix
  // application of the superpixel-space affine.
  const Vec2 offset{5.0, -3.0};
  const Vec2 shifted = conjugate_of(idler_center + offset, geometry);
  const Affine2& sp_map = geometry.conjugation_sp;
  const Vec2 expected{mapped.x + sp_map.m00 * offset.x + sp_map.m01 * offset.y,
                      mapped.y + sp_map.m10 * offset.x + sp_map.m11 * offset.y};
  CHECK(shifted.x == doctest::Approx(expected.x).epsilon(1e-12));
  CHECK(shifted.y == doctest::Approx(expected.y).epsilon(1e-12));

  CHECK_THROWS_AS(conjugate_of({10.0, 10.0}, geometry), std::domain_error);
}

TEST_CASE("conjugation is a bijection between the regions on a small grid") {
  ExperimentConfig config = default_config();
  config.detector.sensor_width_px = 128;
  config.detector.sensor_height_px = 128;
  config.update_derived();
  const RegionRect idler = config.geometry.idler_region;
  const RegionRect signal = config.geometry.signal_region;

  std::set<std::pair<int, int>> images;
  for (int y = idler.y0; y < idler.y1; ++y) {
    for (int x = idler.x0; x < idler.x1; ++x) {
      const Vec2i mapped = conjugate_event({x, y}, config.geometry);
      CHECK(signal.contains(mapped.x, mapped.y));
      images.insert({mapped.x, mapped.y});
      const Vec2 back = config.geometry.conjugation_sp_inv.apply(
          {static_cast<double>(mapped.x), static_cast<double>(mapped.y)});
      CHECK(std::lround(back.x) == x);
      CHECK(std::lround(back.y) == y);
    }
  }
  CHECK(images.size() == static_cast<std::size_t>(idler.area()));
}

TEST_CASE("sellmeier helpers agree with direct evaluation") {
  // Independent evaluation of n^2 = A + B/(L - C) - D*L at 710 nm.
  const double lum2 = 0.71 * 0.71;
  const double expected =
      std::sqrt(2.7405 + 0.0184 / (lum2 - 0.0179) - 0.0155 * lum2);
  CHECK(bbo::ordinary_index(710e-9) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(bbo::extraordinary_index(710e-9) < bbo::ordinary_index(710e-9));
  // The angle-tuned index interpolates between the principal indices.
  const double at0 = bbo::extraordinary_index_at_angle(0.0, 349e-9);
  const double at90 =
      bbo::extraordinary_index_at_angle(1.5707963267948966, 349e-9);
  CHECK(at0 == doctest::Approx(bbo::ordinary_index(349e-9)).epsilon(1e-12));
  CHECK(at90 ==
        doctest::Approx(bbo::extraordinary_index(349e-9)).epsilon(1e-12));
}
