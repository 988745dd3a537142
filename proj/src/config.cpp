#include "twinbeam/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "twinbeam/core/math.hpp"

namespace twinbeam {

std::string to_string(Regime regime) {
  return regime == Regime::counting ? "counting" : "intensity";
}

Regime regime_from_string(const std::string& name) {
  if (name == "counting") return Regime::counting;
  if (name == "intensity") return Regime::intensity;
  throw std::runtime_error("unknown regime '" + name +
                           "' (expected counting|intensity)");
}

namespace bbo {

double sellmeier_index(const std::array<double, 4>& c, double wavelength_m) {
  const double lum2 = sq(wavelength_m * 1e6);
  const double n2 = c[0] + c[1] / (lum2 - c[2]) - c[3] * lum2;
  if (n2 <= 0.0) {
    throw std::domain_error("sellmeier_index: wavelength outside validity");
  }
  return std::sqrt(n2);
}

double ordinary_index(double wavelength_m) {
  return sellmeier_index(kOrdinary, wavelength_m);
}

double extraordinary_index(double wavelength_m) {
  return sellmeier_index(kExtraordinary, wavelength_m);
}

double extraordinary_index_at_angle(double angle_rad, double wavelength_m) {
  const double no2 = sq(ordinary_index(wavelength_m));
  const double ne2 = sq(extraordinary_index(wavelength_m));
  const double c2 = sq(std::cos(angle_rad));
  const double s2 = sq(std::sin(angle_rad));
  return 1.0 / std::sqrt(c2 / no2 + s2 / ne2);
}

}  // namespace bbo

void apply_sellmeier(ExperimentConfig& config) {
  const auto& cr = config.crystal;
  const std::array<double, 4> ord =
      cr.sellmeier_ordinary.size() == 4
          ? std::array<double, 4>{cr.sellmeier_ordinary[0],
                                  cr.sellmeier_ordinary[1],
                                  cr.sellmeier_ordinary[2],
                                  cr.sellmeier_ordinary[3]}
          : bbo::kOrdinary;
  const std::array<double, 4> ext =
      cr.sellmeier_extraordinary.size() == 4
          ? std::array<double, 4>{cr.sellmeier_extraordinary[0],
                                  cr.sellmeier_extraordinary[1],
                                  cr.sellmeier_extraordinary[2],
                                  cr.sellmeier_extraordinary[3]}
          : bbo::kExtraordinary;

  // Pump: extraordinary wave at the cut angle. Down-converted: ordinary.
  const double theta = deg_to_rad(cr.cut_angle_deg);
  const double no2 =
      sq(bbo::sellmeier_index(ord, config.pump.wavelength_m));
  const double ne2 =
      sq(bbo::sellmeier_index(ext, config.pump.wavelength_m));
  config.crystal.index_pump =
      1.0 / std::sqrt(sq(std::cos(theta)) / no2 + sq(std::sin(theta)) / ne2);
  config.crystal.index_down = bbo::sellmeier_index(
      ord, config.geometry.center_wavelength_down_m);
}

void ExperimentConfig::update_derived() {
  const int nx = grid_width();
  const int ny = grid_height();
  // Superpixel coordinate k (center of superpixel k) <-> normalized sensor
  // coordinate u = (k + 1/2) / N.
  const Affine2 sp_to_norm{1.0 / nx, 0.0, 0.0, 1.0 / ny, 0.5 / nx, 0.5 / ny};
  const Affine2 norm_to_sp{static_cast<double>(nx), 0.0,
                           0.0, static_cast<double>(ny), -0.5, -0.5};
  geometry.conjugation_sp =
      norm_to_sp.compose(geometry.conjugation_norm.compose(sp_to_norm));
  geometry.conjugation_sp_inv = geometry.conjugation_sp.inverse();

  auto to_rect = [&](const NormRect& r) {
    return RegionRect{static_cast<int>(std::lround(r.x0 * nx)),
                      static_cast<int>(std::lround(r.y0 * ny)),
                      static_cast<int>(std::lround(r.x1 * nx)),
                      static_cast<int>(std::lround(r.y1 * ny))};
  };
  geometry.signal_region = to_rect(geometry.signal_region_norm);
  geometry.idler_region = to_rect(geometry.idler_region_norm);
}

Vec2 conjugate_of(const Vec2& point_sp, const GeometryParams& geometry) {
  if (!geometry.idler_region.contains_point(point_sp.x, point_sp.y)) {
    throw std::domain_error("conjugate_of: point outside the idler region");
  }
  return geometry.conjugation_sp.apply(point_sp);
}

Vec2i conjugate_event(const Vec2i& event, const GeometryParams& geometry) {
  const Vec2 mapped = conjugate_of(
      {static_cast<double>(event.x), static_cast<double>(event.y)}, geometry);
  return {static_cast<int>(std::llround(mapped.x)),
          static_cast<int>(std::llround(mapped.y))};
}

ExperimentConfig default_config() {
  ExperimentConfig config;
  apply_sellmeier(config);
  config.update_derived();
  return config;
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << v.field << ": " << v.message << "\n";
  }
  return out.str();
}

ValidationReport validate(const ExperimentConfig& config) {
  ValidationReport report;
  auto fail = [&](const std::string& field, const std::string& message) {
    report.violations.push_back({field, message});
  };

  const auto& cr = config.crystal;
  if (!(cr.length_m > 0.0)) fail("crystal.length_m", "must be positive");
  if (!(cr.cut_angle_deg > 0.0 && cr.cut_angle_deg < 90.0)) {
    fail("crystal.cut_angle_deg", "must lie in (0, 90)");
  }
  if (!(cr.index_pump > 1.0)) fail("crystal.index_pump", "must exceed 1");
  if (!(cr.index_down > 1.0)) fail("crystal.index_down", "must exceed 1");
  if (!cr.sellmeier_ordinary.empty() && cr.sellmeier_ordinary.size() != 4) {
    fail("crystal.sellmeier_ordinary", "needs exactly 4 coefficients");
  }
  if (!cr.sellmeier_extraordinary.empty() &&
      cr.sellmeier_extraordinary.size() != 4) {
    fail("crystal.sellmeier_extraordinary", "needs exactly 4 coefficients");
  }

  const auto& pu = config.pump;
  if (!(pu.wavelength_m > 0.0)) fail("pump.wavelength_m", "must be positive");
  if (!(pu.power_w > 0.0)) fail("pump.power_w", "must be positive");
  if (!(pu.waist_horizontal_m > 0.0)) {
    fail("pump.waist_horizontal_m", "must be positive");
  }
  if (!(pu.waist_vertical_m > 0.0)) {
    fail("pump.waist_vertical_m", "must be positive");
  } else if (pu.waist_horizontal_m > 0.0) {
    const double e = pu.ellipticity();
    if (!(e > 0.0 && e <= 1.5)) {
      fail("pump.ellipticity", "waist_vertical/waist_horizontal outside (0, 1.5]");
    }
  }
  if (!(pu.pulse_duration_s > 0.0)) {
    fail("pump.pulse_duration_s", "must be positive");
  }

  const auto& ge = config.geometry;
  if (!(ge.cone_half_angle_deg > 0.0 && ge.cone_half_angle_deg < 90.0)) {
    fail("geometry.cone_half_angle_deg", "must lie in (0, 90)");
  }
  if (!(ge.camera_distance_m > 0.0)) {
    fail("geometry.camera_distance_m", "must be positive");
  }
  if (!(ge.center_wavelength_down_m > 0.0)) {
    fail("geometry.center_wavelength_down_m", "must be positive");
  }
  if (!(ge.filter_bandwidth_m > 0.0)) {
    fail("geometry.filter_bandwidth_m", "must be positive");
  }
  const double det = std::abs(ge.conjugation_norm.det());
  if (det < 1e-12) {
    fail("geometry.conjugation_map", "linear part is singular");
  } else if (std::abs(det - 1.0) > 0.1) {
    fail("geometry.conjugation_map",
         "|det| of linear part must be within 10% of 1");
  }
  if (ge.radial_axis == ge.azimuthal_axis ||
      (ge.radial_axis != 'x' && ge.radial_axis != 'y') ||
      (ge.azimuthal_axis != 'x' && ge.azimuthal_axis != 'y')) {
    fail("geometry.axes", "radial/azimuthal axes must be distinct x or y");
  }

  const auto& de = config.detector;
  if (!(de.pixel_pitch_m > 0.0)) fail("detector.pixel_pitch_m", "must be positive");
  if (!(de.qe_signal >= 0.0 && de.qe_signal <= 1.0)) {
    fail("detector.qe_signal", "must lie in [0, 1]");
  }
  if (!(de.qe_idler >= 0.0 && de.qe_idler <= 1.0)) {
    fail("detector.qe_idler", "must lie in [0, 1]");
  }
  if (!(de.threshold_counts > 0.0)) {
    fail("detector.threshold_counts", "must be positive");
  }
  if (de.readout_noise_counts < 0.0) {
    fail("detector.readout_noise_counts", "must be non-negative");
  }
  if (de.dark_event_rate < 0.0) {
    fail("detector.dark_event_rate", "must be non-negative");
  }
  if (!(de.saturation_counts > 0.0)) {
    fail("detector.saturation_counts", "must be positive");
  }
  if (!(de.gate_ns > 0.0)) fail("detector.gate_ns", "must be positive");
  if (de.sensor_width_px <= 0 || de.sensor_height_px <= 0) {
    fail("detector.sensor", "sensor dimensions must be positive");
  }
  for (int b : {de.binning_counting, de.binning_intensity}) {
    if (b <= 0 || de.sensor_width_px % b != 0 ||
        de.sensor_height_px % b != 0) {
      fail("detector.binning", "binning must divide both sensor dimensions");
      break;
    }
  }

  if (config.n_frames < 2) fail("run.n_frames", "need at least 2 frames");
  if (config.n_reference_points < 1) {
    fail("run.n_reference_points", "need at least 1 reference point");
  }

  auto check_rect = [&](const NormRect& r, const std::string& name) {
    if (!(r.x0 >= 0.0 && r.y0 >= 0.0 && r.x1 <= 1.0 && r.y1 <= 1.0 &&
          r.x0 < r.x1 && r.y0 < r.y1)) {
      fail(name, "must be a non-empty rectangle inside the sensor");
      return false;
    }
    return true;
  };
  const bool s_ok = check_rect(ge.signal_region_norm, "geometry.signal_region");
  const bool i_ok = check_rect(ge.idler_region_norm, "geometry.idler_region");
  if (s_ok && i_ok) {
    const auto& a = ge.signal_region_norm;
    const auto& b = ge.idler_region_norm;
    const bool overlap = a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
    if (overlap) {
      fail("geometry.regions", "signal and idler regions overlap");
    }
  }

  return report;
}

// ---------------------------------------------------------------------------
// Flat key/value serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ",";
    out += fmt(vs[i]);
  }
  return out;
}

std::string fmt_affine(const Affine2& a) {
  return fmt(a.m00) + "," + fmt(a.m01) + "," + fmt(a.m10) + "," + fmt(a.m11) +
         "," + fmt(a.tx) + "," + fmt(a.ty);
}

std::string fmt_rect(const NormRect& r) {
  return fmt(r.x0) + "," + fmt(r.y0) + "," + fmt(r.x1) + "," + fmt(r.y1);
}

std::vector<double> parse_list(const std::string& text,
                               const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("config key " + key + ": bad number '" + item +
                               "'");
    }
    out.push_back(v);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos != text.size()) throw std::runtime_error("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": bad number '" + text +
                             "'");
  }
}

int parse_int(const std::string& text, const std::string& key) {
  const double v = parse_double(text, key);
  const int i = static_cast<int>(std::llround(v));
  if (static_cast<double>(i) != v) {
    throw std::runtime_error("config key " + key + ": expected integer");
  }
  return i;
}

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::runtime_error("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": bad integer '" + text +
                             "'");
  }
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "# twinbeam experiment configuration\n";
  out << "# lengths in meters, powers in watts, angles in degrees\n";
  out << "crystal.length_m = " << fmt(c.crystal.length_m) << "\n";
  out << "crystal.cut_angle_deg = " << fmt(c.crystal.cut_angle_deg) << "\n";
  out << "# effective scalar indices; defaults follow the BBO Sellmeier\n";
  out << "# relations (extraordinary pump at the cut angle, ordinary\n";
  out << "# down-converted wave); walk-off is not modeled\n";
  out << "crystal.index_pump = " << fmt(c.crystal.index_pump) << "\n";
  out << "crystal.index_down = " << fmt(c.crystal.index_down) << "\n";
  if (!c.crystal.sellmeier_ordinary.empty()) {
    out << "crystal.sellmeier_ordinary = "
        << fmt_list(c.crystal.sellmeier_ordinary) << "\n";
  }
  if (!c.crystal.sellmeier_extraordinary.empty()) {
    out << "crystal.sellmeier_extraordinary = "
        << fmt_list(c.crystal.sellmeier_extraordinary) << "\n";
  }
  out << "pump.wavelength_m = " << fmt(c.pump.wavelength_m) << "\n";
  out << "pump.power_w = " << fmt(c.pump.power_w) << "\n";
  out << "# waists are not published for this run; vertical/horizontal = 0.7\n";
  out << "pump.waist_horizontal_m = " << fmt(c.pump.waist_horizontal_m) << "\n";
  out << "pump.waist_vertical_m = " << fmt(c.pump.waist_vertical_m) << "\n";
  out << "pump.pulse_duration_s = " << fmt(c.pump.pulse_duration_s) << "\n";
  out << "geometry.cone_half_angle_deg = "
      << fmt(c.geometry.cone_half_angle_deg) << "\n";
  out << "geometry.camera_distance_m = " << fmt(c.geometry.camera_distance_m)
      << "\n";
  out << "geometry.center_wavelength_down_m = "
      << fmt(c.geometry.center_wavelength_down_m) << "\n";
  out << "geometry.filter_bandwidth_m = "
      << fmt(c.geometry.filter_bandwidth_m) << "\n";
  out << "# affine idler->signal map on normalized sensor coordinates\n";
  out << "# (m00,m01,m10,m11,tx,ty); mirror distances are not published, the\n";
  out << "# default mirrors about the sensor midline\n";
  out << "geometry.conjugation_map = " << fmt_affine(c.geometry.conjugation_norm)
      << "\n";
  out << "geometry.radial_axis = " << c.geometry.radial_axis << "\n";
  out << "geometry.azimuthal_axis = " << c.geometry.azimuthal_axis << "\n";
  out << "# normalized rectangles x0,y0,x1,y1\n";
  out << "geometry.signal_region = " << fmt_rect(c.geometry.signal_region_norm)
      << "\n";
  out << "geometry.idler_region = " << fmt_rect(c.geometry.idler_region_norm)
      << "\n";
  out << "detector.pixel_pitch_m = " << fmt(c.detector.pixel_pitch_m) << "\n";
  out << "detector.binning_counting = " << c.detector.binning_counting << "\n";
  out << "detector.binning_intensity = " << c.detector.binning_intensity
      << "\n";
  out << "detector.sensor_width_px = " << c.detector.sensor_width_px << "\n";
  out << "detector.sensor_height_px = " << c.detector.sensor_height_px << "\n";
  out << "detector.qe_signal = " << fmt(c.detector.qe_signal) << "\n";
  out << "detector.qe_idler = " << fmt(c.detector.qe_idler) << "\n";
  out << "# noise model values are instrument-book defaults, not published\n";
  out << "detector.readout_noise_counts = "
      << fmt(c.detector.readout_noise_counts) << "\n";
  out << "detector.threshold_counts = " << fmt(c.detector.threshold_counts)
      << "\n";
  out << "detector.gate_ns = " << fmt(c.detector.gate_ns) << "\n";
  out << "detector.dark_event_rate = " << fmt(c.detector.dark_event_rate)
      << "\n";
  out << "detector.saturation_counts = " << fmt(c.detector.saturation_counts)
      << "\n";
  out << "run.n_frames = " << c.n_frames << "\n";
  out << "run.n_reference_points = " << c.n_reference_points << "\n";
  out << "run.rng_seed = " << c.rng_seed << "\n";
  out << "run.regime = " << to_string(c.regime) << "\n";
  return out.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c = default_config();

  std::map<std::string, std::function<void(const std::string&)>> setters;
  auto set_d = [&](const std::string& key, double& field) {
    setters[key] = [key, &field](const std::string& v) {
      field = parse_double(v, key);
    };
  };
  auto set_i = [&](const std::string& key, int& field) {
    setters[key] = [key, &field](const std::string& v) {
      field = parse_int(v, key);
    };
  };

  set_d("crystal.length_m", c.crystal.length_m);
  set_d("crystal.cut_angle_deg", c.crystal.cut_angle_deg);
  set_d("crystal.index_pump", c.crystal.index_pump);
  set_d("crystal.index_down", c.crystal.index_down);
  setters["crystal.sellmeier_ordinary"] = [&](const std::string& v) {
    c.crystal.sellmeier_ordinary = parse_list(v, "crystal.sellmeier_ordinary");
  };
  setters["crystal.sellmeier_extraordinary"] = [&](const std::string& v) {
    c.crystal.sellmeier_extraordinary =
        parse_list(v, "crystal.sellmeier_extraordinary");
  };
  set_d("pump.wavelength_m", c.pump.wavelength_m);
  set_d("pump.power_w", c.pump.power_w);
  set_d("pump.waist_horizontal_m", c.pump.waist_horizontal_m);
  set_d("pump.waist_vertical_m", c.pump.waist_vertical_m);
  set_d("pump.pulse_duration_s", c.pump.pulse_duration_s);
  set_d("geometry.cone_half_angle_deg", c.geometry.cone_half_angle_deg);
  set_d("geometry.camera_distance_m", c.geometry.camera_distance_m);
  set_d("geometry.center_wavelength_down_m",
        c.geometry.center_wavelength_down_m);
  set_d("geometry.filter_bandwidth_m", c.geometry.filter_bandwidth_m);
  setters["geometry.conjugation_map"] = [&](const std::string& v) {
    const auto xs = parse_list(v, "geometry.conjugation_map");
    if (xs.size() != 6) {
      throw std::runtime_error(
          "geometry.conjugation_map needs 6 numbers m00,m01,m10,m11,tx,ty");
    }
    c.geometry.conjugation_norm = {xs[0], xs[1], xs[2], xs[3], xs[4], xs[5]};
  };
  auto set_axis = [&](const std::string& key, char& field) {
    setters[key] = [key, &field](const std::string& v) {
      if (v.size() != 1 || (v[0] != 'x' && v[0] != 'y')) {
        throw std::runtime_error("config key " + key + ": expected x or y");
      }
      field = v[0];
    };
  };
  set_axis("geometry.radial_axis", c.geometry.radial_axis);
  set_axis("geometry.azimuthal_axis", c.geometry.azimuthal_axis);
  auto set_rect = [&](const std::string& key, NormRect& field) {
    setters[key] = [key, &field](const std::string& v) {
      const auto xs = parse_list(v, key);
      if (xs.size() != 4) {
        throw std::runtime_error("config key " + key +
                                 " needs 4 numbers x0,y0,x1,y1");
      }
      field = {xs[0], xs[1], xs[2], xs[3]};
    };
  };
  set_rect("geometry.signal_region", c.geometry.signal_region_norm);
  set_rect("geometry.idler_region", c.geometry.idler_region_norm);
  set_d("detector.pixel_pitch_m", c.detector.pixel_pitch_m);
  set_i("detector.binning_counting", c.detector.binning_counting);
  set_i("detector.binning_intensity", c.detector.binning_intensity);
  set_i("detector.sensor_width_px", c.detector.sensor_width_px);
  set_i("detector.sensor_height_px", c.detector.sensor_height_px);
  set_d("detector.qe_signal", c.detector.qe_signal);
  set_d("detector.qe_idler", c.detector.qe_idler);
  set_d("detector.readout_noise_counts", c.detector.readout_noise_counts);
  set_d("detector.threshold_counts", c.detector.threshold_counts);
  set_d("detector.gate_ns", c.detector.gate_ns);
  set_d("detector.dark_event_rate", c.detector.dark_event_rate);
  set_d("detector.saturation_counts", c.detector.saturation_counts);
  set_i("run.n_frames", c.n_frames);
  set_i("run.n_reference_points", c.n_reference_points);
  setters["run.rng_seed"] = [&](const std::string& v) {
    c.rng_seed = parse_u64(v, "run.rng_seed");
  };
  setters["run.regime"] = [&](const std::string& v) {
    c.regime = regime_from_string(v);
  };

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    }
    it->second(value);
  }

  c.update_derived();
  return c;
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << serialize(config);
}

ExperimentConfig load_config(const std::string& path, bool apply_env) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig config = parse_config(buffer.str());
  if (apply_env) {
    if (const char* env = std::getenv("TWINBEAM_SEED")) {
      config.rng_seed = parse_u64(env, "TWINBEAM_SEED");
    }
  }
  return config;
}

}  // namespace twinbeam
