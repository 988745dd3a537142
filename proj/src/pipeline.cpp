#include "twinbeam/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "twinbeam/analysis.hpp"
#include "twinbeam/config.hpp"
#include "twinbeam/core/csv.hpp"
#include "twinbeam/core/parallel.hpp"
#include "twinbeam/detector.hpp"
#include "twinbeam/io/frame_io.hpp"
#include "twinbeam/pm_model.hpp"
#include "twinbeam/synth.hpp"

namespace twinbeam {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Wall-clock stage timer feeding the manifest.
class StageClock {
 public:
  explicit StageClock(RunManifest& manifest) : manifest_(manifest) {}

  template <typename Fn>
  auto run(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish(name, start);
    } else {
      auto result = fn();
      finish(name, start);
      return result;
    }
  }

 private:
  void finish(const std::string& name,
              std::chrono::steady_clock::time_point start) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    manifest_.stage_seconds.emplace_back(name, seconds);
  }

  RunManifest& manifest_;
};

ExperimentConfig load_or_default(const std::string& config_path,
                                 std::optional<std::uint64_t> seed_flag) {
  ExperimentConfig config =
      config_path.empty() ? default_config() : load_config(config_path);
  if (config_path.empty()) {
    if (const char* env = std::getenv("TWINBEAM_SEED")) {
      config.rng_seed = std::stoull(env);
    }
  }
  if (seed_flag) config.rng_seed = *seed_flag;
  config.update_derived();
  const ValidationReport report = validate(config);
  if (!report.ok()) {
    throw std::runtime_error("invalid configuration:\n" + report.summary());
  }
  return config;
}

std::string um(double meters) { return format_number(meters * 1e6, 10); }

void write_width_columns(std::vector<std::string>& row,
                         const WidthEstimate& w) {
  row.push_back(um(w.fwhm_radial_m));
  row.push_back(um(w.err_radial_m));
  row.push_back(um(w.fwhm_azimuthal_m));
  row.push_back(um(w.err_azimuthal_m));
  row.push_back(w.radial_at_floor ? "1" : "0");
  row.push_back(w.azimuthal_at_floor ? "1" : "0");
}

const std::vector<std::string> kWidthHeader = {
    "_radial_um",       "_radial_err_um",      "_azimuthal_um",
    "_azimuthal_err_um", "_radial_at_floor",    "_azimuthal_at_floor"};

std::vector<std::string> width_header(const std::string& prefix) {
  std::vector<std::string> header;
  for (const auto& suffix : kWidthHeader) header.push_back(prefix + suffix);
  return header;
}

void finalize_manifest(RunManifest& manifest, const ExperimentConfig& config,
                       const std::string& command,
                       const std::string& manifest_path) {
  manifest.command = command;
  manifest.seed = config.rng_seed;
  manifest.config_text = serialize(config);
  manifest.write(manifest_path);
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int cmd_predict(const ExperimentConfig& config, const std::string& out_csv,
                const std::string& waist_sweep, double widen_factor) {
  RunManifest manifest;
  StageClock clock(manifest);
  const std::vector<double> waists = parse_range(waist_sweep);
  clock.run("predict", [&] {
    CsvWriter csv(out_csv);
    csv.write_row({"waist_m", "radial_fwhm_um", "azimuthal_fwhm_um"});
    for (const double waist : waists) {
      ExperimentConfig point = config;
      point.pump.waist_horizontal_m = waist;
      point.pump.waist_vertical_m = waist * config.pump.ellipticity();
      const PredictedWidths widths =
          predict_widths(point, {.widen_factor = widen_factor});
      csv.write_row({format_number(waist, 10), um(widths.radial_fwhm_m),
                     um(widths.azimuthal_fwhm_m)});
    }
  });
  manifest.output_files = {out_csv};
  finalize_manifest(manifest, config, "predict", out_csv + ".manifest.json");
  return 0;
}

int cmd_synth(const ExperimentConfig& config, const std::string& out_dir,
              int frames, double pairs_per_frame, double xc_radial_um,
              double xc_azimuthal_um, int pgm_count, int jobs) {
  RunManifest manifest;
  StageClock clock(manifest);
  fs::create_directories(out_dir);
  std::vector<std::string> files(frames);

  if (config.regime == Regime::counting) {
    const Vec2 jitter{xc_radial_um * 1e-6 / kFwhmPerSigma,
                      xc_azimuthal_um * 1e-6 / kFwhmPerSigma};
    clock.run("synth+detect", [&] {
      parallel_for(frames, jobs, [&](std::size_t f) {
        Philox pair_rng(config.rng_seed, static_cast<std::uint32_t>(f),
                        kSubPairSampling);
        const auto pairs = sample_pair_events(config, pairs_per_frame, jitter,
                                              pair_rng, f);
        Philox det_rng(config.rng_seed, static_cast<std::uint32_t>(f),
                       kSubDetectorCounting);
        const Frame frame = detect_counting(pairs, config, det_rng);
        const std::string name = frame_file_name(f);
        write_frame(frame, out_dir + "/" + name);
        files[f] = name;
      });
    });
  } else {
    const PredictedWidths pm = predict_widths(config);
    GainCurve curve;
    curve.ac_width_sat_m = {0.8 * pm.radial_fwhm_m, 0.8 * pm.azimuthal_fwhm_m};
    const GainTargets targets = gain_to_targets(config.pump.power_w, curve, pm,
                                                config.superpixel_m());
    const SpeckleModel model = make_speckle_model(
        targets.ac_fwhm_m, targets.xc_fwhm_m, 1.0, targets.mean_intensity);
    const SpeckleRenderer renderer(model, config);
    clock.run("synth+detect", [&] {
      parallel_for(frames, jobs, [&](std::size_t f) {
        const Frame ideal = renderer.render(static_cast<std::int64_t>(f));
        Philox rng(config.rng_seed, static_cast<std::uint32_t>(f),
                   kSubReadoutNoise);
        const Frame frame = detect_intensity(ideal, config, rng);
        const std::string name = frame_file_name(f);
        write_frame(frame, out_dir + "/" + name);
        files[f] = name;
      });
    });
  }

  clock.run("index", [&] { write_stack_index(out_dir, files, config.rng_seed); });
  for (int p = 0; p < std::min(pgm_count, frames); ++p) {
    const Frame frame = read_frame(out_dir + "/" + files[p]);
    char name[32];
    std::snprintf(name, sizeof(name), "preview_%04d.pgm", p);
    write_pgm(frame, out_dir + "/" + name);
    manifest.output_files.push_back(out_dir + "/" + std::string(name));
  }

  manifest.output_files.push_back(out_dir + "/index.txt");
  for (const std::string& f : files) manifest.output_files.push_back(out_dir + "/" + f);
  finalize_manifest(manifest, config, "synth", out_dir + "/manifest.json");
  return 0;
}

int cmd_analyze_counting(const ExperimentConfig& config,
                         const std::string& frames_dir,
                         const std::string& out_csv, int window, int blocks) {
  RunManifest manifest;
  StageClock clock(manifest);
  const auto files = read_stack_index(frames_dir);
  std::vector<EventList> events(files.size());
  clock.run("extract-events", [&] {
    for (std::size_t f = 0; f < files.size(); ++f) {
      const Frame frame = read_frame(files[f]);
      events[f] = extract_events(frame, config.detector.threshold_counts);
    }
  });
  const CorrelationMap map = clock.run("histogram", [&] {
    return counting_xc_histogram(events, config.geometry, window, blocks);
  });
  const WidthEstimate width = extract_fwhm(map, config.superpixel_m());
  const PhotocountMoments moments = estimate_efficiencies(events);

  CsvWriter csv(out_csv);
  std::vector<std::string> header = {"n_frames", "mean_signal", "mean_idler",
                                     "eff_signal", "eff_idler"};
  for (const auto& h : width_header("xc")) header.push_back(h);
  csv.write_row(header);
  std::vector<std::string> row = {
      std::to_string(moments.n_frames), format_number(moments.mean_signal, 10),
      format_number(moments.mean_idler, 10),
      format_number(moments.eff_signal_est, 10),
      format_number(moments.eff_idler_est, 10)};
  write_width_columns(row, width);
  csv.write_row(row);
  csv.flush();

  manifest.output_files = {out_csv};
  finalize_manifest(manifest, config, "analyze-counting",
                    out_csv + ".manifest.json");
  return 0;
}

int cmd_analyze_intensity(const ExperimentConfig& config,
                          const std::string& frames_dir,
                          const std::string& out_csv, int points, int window) {
  RunManifest manifest;
  StageClock clock(manifest);
  const auto files = read_stack_index(frames_dir);
  std::vector<Frame> stack(files.size());
  clock.run("load", [&] {
    for (std::size_t f = 0; f < files.size(); ++f) {
      stack[f] = read_frame(files[f]);
    }
  });
  const IntensityMaps maps = clock.run("correlate", [&] {
    const auto refs = select_reference_points(stack, config, points, window);
    return intensity_correlation_maps(stack, refs, config.geometry, window);
  });
  const WidthEstimate ac = extract_fwhm(maps.ac, config.superpixel_m());
  const WidthEstimate xc = extract_fwhm(maps.xc, config.superpixel_m());

  CsvWriter csv(out_csv);
  std::vector<std::string> header = {"n_frames"};
  for (const auto& h : width_header("ac")) header.push_back(h);
  for (const auto& h : width_header("xc")) header.push_back(h);
  csv.write_row(header);
  std::vector<std::string> row = {std::to_string(stack.size())};
  write_width_columns(row, ac);
  write_width_columns(row, xc);
  csv.write_row(row);
  csv.flush();

  manifest.output_files = {out_csv};
  finalize_manifest(manifest, config, "analyze-intensity",
                    out_csv + ".manifest.json");
  return 0;
}

int cmd_sweep_power(const ExperimentConfig& config,
                    const std::vector<double>& powers,
                    const std::string& out_csv, const SweepOptions& options) {
  RunManifest manifest;
  StageClock clock(manifest);
  const auto rows = clock.run(
      "sweep-power", [&] { return width_vs_power_sweep(config, powers, options); });
  CsvWriter csv(out_csv);
  std::vector<std::string> header = {"power_w"};
  for (const auto& h : width_header("ac")) header.push_back(h);
  for (const auto& h : width_header("xc")) header.push_back(h);
  csv.write_row(header);
  for (const PowerSweepRow& row : rows) {
    std::vector<std::string> cells = {format_number(row.power_w, 10)};
    write_width_columns(cells, row.ac);
    write_width_columns(cells, row.xc);
    csv.write_row(cells);
  }
  csv.flush();
  manifest.output_files = {out_csv};
  finalize_manifest(manifest, config, "sweep-power", out_csv + ".manifest.json");
  return 0;
}

int cmd_sweep_waist(const ExperimentConfig& config,
                    const std::vector<double>& waists,
                    const std::string& out_csv, const SweepOptions& options) {
  RunManifest manifest;
  StageClock clock(manifest);
  const auto rows = clock.run(
      "sweep-waist", [&] { return width_vs_waist_sweep(config, waists, options); });
  CsvWriter csv(out_csv);
  std::vector<std::string> header = {"waist_m", "predicted_radial_um",
                                     "predicted_azimuthal_um"};
  for (const auto& h : width_header("ac")) header.push_back(h);
  for (const auto& h : width_header("xc")) header.push_back(h);
  csv.write_row(header);
  for (const WaistSweepRow& row : rows) {
    std::vector<std::string> cells = {format_number(row.waist_m, 10),
                                      um(row.predicted.radial_fwhm_m),
                                      um(row.predicted.azimuthal_fwhm_m)};
    write_width_columns(cells, row.ac);
    write_width_columns(cells, row.xc);
    csv.write_row(cells);
  }
  csv.flush();
  manifest.output_files = {out_csv};
  finalize_manifest(manifest, config, "sweep-waist", out_csv + ".manifest.json");
  return 0;
}

}  // namespace

void RunManifest::write(const std::string& path) const {
  json doc;
  doc["tool"] = "twinbeam";
  doc["version"] = kToolVersion;
  doc["command"] = command;
  doc["seed"] = seed;
  doc["config"] = config_text;
  json stages = json::array();
  for (const auto& [name, seconds] : stage_seconds) {
    stages.push_back({{"name", name}, {"seconds", seconds}});
  }
  doc["stages"] = stages;
  json outputs = json::array();
  for (const std::string& file : output_files) {
    std::error_code ec;
    const auto size = fs::file_size(file, ec);
    outputs.push_back({{"path", file},
                       {"bytes", ec ? 0 : static_cast<std::uint64_t>(size)},
                       {"fnv1a64", file_checksum_hex(file)}});
  }
  doc["outputs"] = outputs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << doc.dump(2) << "\n";
}

std::string file_checksum_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot checksum missing file: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof(buffer));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ull;
    }
  }
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

std::vector<std::string> verify_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read manifest: " + manifest_path);
  json doc = json::parse(in);
  std::vector<std::string> mismatches;
  for (const auto& output : doc.at("outputs")) {
    const std::string path = output.at("path").get<std::string>();
    const std::string expected = output.at("fnv1a64").get<std::string>();
    if (file_checksum_hex(path) != expected) mismatches.push_back(path);
  }
  return mismatches;
}

std::vector<double> parse_range(const std::string& spec) {
  double a = 0.0, b = 0.0;
  int n = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &a, &b, &n) != 3 || n < 1) {
    throw std::runtime_error("bad range '" + spec + "' (expected a:b:n)");
  }
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) {
    values[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  }
  return values;
}

int run_pipeline(const std::vector<std::string>& args) {
  CLI::App app{"twinbeam: twin-beam correlation synthesis and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--config", config_path, "experiment config file")
      ->capture_default_str();
  app.add_option("--seed", seed_flag, "override run.rng_seed");

  // predict
  auto* predict = app.add_subcommand(
      "predict", "phase-matching width predictions vs pump waist");
  std::string predict_out = "predict.csv";
  std::string waist_sweep = "0.0003:0.0015:5";
  double widen_factor = 1.0;
  predict->add_option("--out", predict_out, "output CSV");
  predict->add_option("--waist-sweep", waist_sweep,
                      "horizontal waist range a:b:n in meters");
  predict->add_option("--widen-factor", widen_factor,
                      "pump angular-spectrum widening factor");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic frame stack");
  std::string synth_out;
  int synth_frames = -1;
  double pairs_per_frame = 123.5;
  std::string xc_fwhm_um = "490:710";
  int pgm_count = 0;
  int jobs = 1;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--frames", synth_frames,
                    "frame count (defaults to run.n_frames)");
  synth->add_option("--pairs-per-frame", pairs_per_frame,
                    "mean generated pairs per frame (counting regime)");
  synth->add_option("--xc-fwhm-um", xc_fwhm_um,
                    "ground-truth XC FWHM radial:azimuthal in um (counting)");
  synth->add_option("--pgm", pgm_count, "dump the first N frames as PGM");
  synth->add_option("--jobs", jobs, "worker threads");

  // analyze-counting
  auto* analyze_counting =
      app.add_subcommand("analyze-counting", "event-correlation analysis");
  std::string frames_dir, analysis_out = "results.csv";
  int window = 43, blocks = 25;
  analyze_counting->add_option("--frames", frames_dir, "frame stack directory")
      ->required();
  analyze_counting->add_option("--out", analysis_out, "output CSV");
  analyze_counting->add_option("--window", window, "displacement window");
  analyze_counting->add_option("--blocks", blocks, "bootstrap frame blocks");

  // analyze-intensity
  auto* analyze_intensity = app.add_subcommand(
      "analyze-intensity", "intensity correlation-map analysis");
  std::string int_frames_dir, int_out = "results.csv";
  int points = 100, int_window = 33;
  analyze_intensity->add_option("--frames", int_frames_dir,
                                "frame stack directory")
      ->required();
  analyze_intensity->add_option("--out", int_out, "output CSV");
  analyze_intensity->add_option("--points", points, "reference points");
  analyze_intensity->add_option("--window", int_window, "map window");

  // sweep-power / sweep-waist / reproduce-*
  auto* sweep_power =
      app.add_subcommand("sweep-power", "widths vs pump power (full chain)");
  std::string powers_spec = "0.015:0.05:15";
  std::string sweep_out = "sweep.csv";
  SweepOptions sweep_options;
  sweep_power->add_option("--powers", powers_spec, "power range a:b:n in W");
  sweep_power->add_option("--out", sweep_out, "output CSV");
  sweep_power->add_option("--frames", sweep_options.frames, "frames per point");
  sweep_power->add_option("--points", sweep_options.points, "reference points");
  sweep_power->add_option("--window", sweep_options.window, "map window");
  sweep_power->add_option("--jobs", sweep_options.jobs, "worker threads");

  auto* sweep_waist =
      app.add_subcommand("sweep-waist", "widths vs pump waist (full chain)");
  std::string waists_spec = "0.0003:0.0015:5";
  std::string waist_out = "sweep.csv";
  SweepOptions waist_options;
  sweep_waist->add_option("--waists", waists_spec, "waist range a:b:n in m");
  sweep_waist->add_option("--out", waist_out, "output CSV");
  sweep_waist->add_option("--frames", waist_options.frames, "frames per point");
  sweep_waist->add_option("--points", waist_options.points, "reference points");
  sweep_waist->add_option("--window", waist_options.window, "map window");
  sweep_waist->add_option("--jobs", waist_options.jobs, "worker threads");
  sweep_waist->add_option("--widen-factor", waist_options.widen_factor,
                          "pump angular-spectrum widening factor");

  auto* fig3 = app.add_subcommand(
      "reproduce-fig3", "canonical pump-power dependence table");
  std::string fig3_out = "fig3.csv";
  SweepOptions fig3_options;
  fig3->add_option("--out", fig3_out, "output CSV");
  fig3->add_option("--frames", fig3_options.frames, "frames per point");
  fig3->add_option("--points", fig3_options.points, "reference points");
  fig3->add_option("--jobs", fig3_options.jobs, "worker threads");

  auto* fig4 = app.add_subcommand(
      "reproduce-fig4", "canonical pump-waist dependence table");
  std::string fig4_out = "fig4.csv";
  SweepOptions fig4_options;
  fig4->add_option("--out", fig4_out, "output CSV");
  fig4->add_option("--frames", fig4_options.frames, "frames per point");
  fig4->add_option("--points", fig4_options.points, "reference points");
  fig4->add_option("--jobs", fig4_options.jobs, "worker threads");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig config = load_or_default(config_path, seed_flag);

    if (predict->parsed()) {
      return cmd_predict(config, predict_out, waist_sweep, widen_factor);
    }
    if (synth->parsed()) {
      const int frames = synth_frames > 0 ? synth_frames : config.n_frames;
      double xr = 0, xa = 0;
      if (std::sscanf(xc_fwhm_um.c_str(), "%lf:%lf", &xr, &xa) != 2) {
        throw std::runtime_error("bad --xc-fwhm-um (expected radial:azimuthal)");
      }
      return cmd_synth(config, synth_out, frames, pairs_per_frame, xr, xa,
                       pgm_count, jobs);
    }
    if (analyze_counting->parsed()) {
      return cmd_analyze_counting(config, frames_dir, analysis_out, window,
                                  blocks);
    }
    if (analyze_intensity->parsed()) {
      return cmd_analyze_intensity(config, int_frames_dir, int_out, points,
                                   int_window);
    }
    if (sweep_power->parsed()) {
      return cmd_sweep_power(config, parse_range(powers_spec), sweep_out,
                             sweep_options);
    }
    if (sweep_waist->parsed()) {
      return cmd_sweep_waist(config, parse_range(waists_spec), waist_out,
                             waist_options);
    }
    if (fig3->parsed()) {
      const std::vector<double> powers = {0.015, 0.0175, 0.02, 0.0225, 0.025,
                                          0.0275, 0.03, 0.035, 0.04, 0.045,
                                          0.05};
      return cmd_sweep_power(config, powers, fig3_out, fig3_options);
    }
    if (fig4->parsed()) {
      const std::vector<double> waists = {0.3e-3, 0.6e-3, 0.9e-3, 1.2e-3,
                                          1.5e-3};
      return cmd_sweep_waist(config, waists, fig4_out, fig4_options);
    }
    throw std::runtime_error("no subcommand dispatched");
  } catch (const std::exception& e) {
    std::cerr << "twinbeam: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace twinbeam
