#include "twinbeam/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twinbeam/core/fft.hpp"
#include "twinbeam/core/math.hpp"

namespace twinbeam {

namespace {

/// Raised-cosine edge window on [0, extent] with the given margin.
double edge_envelope(double u, double extent, double margin) {
  if (u < 0.0 || u > extent) return 0.0;
  const double d = std::min(u, extent - u);
  if (d >= margin) return 1.0;
  return 0.5 - 0.5 * std::cos(kPi * d / margin);
}

}  // namespace

std::vector<PairEvent> sample_pair_events(const ExperimentConfig& config,
                                          double mean_pairs_per_frame,
                                          const Vec2& jitter_sigma_m,
                                          Philox& rng,
                                          std::int64_t frame_index) {
  if (mean_pairs_per_frame < 0.0) {
    throw std::invalid_argument("sample_pair_events: negative pair rate");
  }
  const std::uint64_t n_pairs = rng.poisson(mean_pairs_per_frame);
  std::vector<PairEvent> pairs;
  pairs.reserve(n_pairs);

  const double pitch = config.superpixel_m();
  const RegionRect region = config.geometry.signal_region;
  const double x0 = region.x0 * pitch;
  const double y0 = region.y0 * pitch;
  const double width = region.width() * pitch;
  const double height = region.height() * pitch;
  const double margin_x =
      std::min(0.25 * width, std::max(0.08 * width, 2.0 * pitch));
  const double margin_y =
      std::min(0.25 * height, std::max(0.08 * height, 2.0 * pitch));

  const Affine2& to_idler = config.geometry.conjugation_sp_inv;
  for (std::uint64_t i = 0; i < n_pairs; ++i) {
    Vec2 local{0.5 * width, 0.5 * height};
    for (int attempt = 0; attempt < 64; ++attempt) {
      const Vec2 candidate{rng.uniform() * width, rng.uniform() * height};
      const double accept = edge_envelope(candidate.x, width, margin_x) *
                            edge_envelope(candidate.y, height, margin_y);
      if (rng.uniform() < accept) {
        local = candidate;
        break;
      }
    }
    PairEvent pair;
    pair.frame_index = frame_index;
    pair.signal_pos_m = {x0 + local.x, y0 + local.y};
    const Vec2 idler_sp = to_idler.apply(config.meters_to_sp(pair.signal_pos_m));
    const Vec2 idler_center = config.sp_to_meters(idler_sp);
    pair.idler_pos_m = {idler_center.x + jitter_sigma_m.x * rng.normal(),
                        idler_center.y + jitter_sigma_m.y * rng.normal()};
    pairs.push_back(pair);
  }
  return pairs;
}

SpeckleModel make_speckle_model(const Vec2& target_ac_fwhm_m,
                                const Vec2& target_xc_fwhm_m, double mu,
                                double mean_intensity) {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw std::invalid_argument("make_speckle_model: mu must lie in [0, 1]");
  }
  if (!(mean_intensity > 0.0)) {
    throw std::invalid_argument("make_speckle_model: mean_intensity must be > 0");
  }
  SpeckleModel model;
  model.cross_strength_mu = mu;
  model.mean_intensity = mean_intensity;
  auto solve_axis = [](double ac_fwhm, double xc_fwhm, double& a, double& j) {
    if (!(ac_fwhm > 0.0)) {
      throw std::invalid_argument("make_speckle_model: AC target must be > 0");
    }
    if (xc_fwhm < ac_fwhm * (1.0 - 1e-12)) {
      throw std::invalid_argument(
          "make_speckle_model: XC target below AC target");
    }
    a = ac_fwhm / kFwhmPerSigma;
    const double sx = xc_fwhm / kFwhmPerSigma;
    j = std::sqrt(std::max(0.0, sx * sx - a * a));
  };
  solve_axis(target_ac_fwhm_m.x, target_xc_fwhm_m.x, model.ac_kernel_sigma_m.x,
             model.xc_jitter_sigma_m.x);
  solve_axis(target_ac_fwhm_m.y, target_xc_fwhm_m.y, model.ac_kernel_sigma_m.y,
             model.xc_jitter_sigma_m.y);
  return model;
}

GainTargets gain_to_targets(double power_w, const GainCurve& curve,
                            const PredictedWidths& pm_widths,
                            double superpixel_m) {
  if (!(power_w > 0.0)) {
    throw std::invalid_argument("gain_to_targets: power must be positive");
  }
  if (!(curve.p_threshold_w < curve.p_sat_w)) {
    throw std::invalid_argument("gain_to_targets: requires p_threshold < p_sat");
  }
  GainTargets targets;
  targets.xc_fwhm_m = {pm_widths.radial_fwhm_m, pm_widths.azimuthal_fwhm_m};
  const double saturating =
      1.0 - std::exp(-(power_w - curve.p_threshold_w) /
                     (curve.p_sat_w - curve.p_threshold_w));
  auto ac_axis = [&](double sat_width) {
    return std::clamp(sat_width * saturating, superpixel_m, sat_width);
  };
  targets.ac_fwhm_m = {ac_axis(curve.ac_width_sat_m.x),
                       ac_axis(curve.ac_width_sat_m.y)};
  targets.mean_intensity = curve.mean_intensity_per_watt * power_w;
  return targets;
}

SpeckleRenderer::SpeckleRenderer(const SpeckleModel& model,
                                 const ExperimentConfig& config)
    : model_(model), config_(config) {
  const RegionRect& signal = config_.geometry.signal_region;
  const RegionRect& idler = config_.geometry.idler_region;
  if (signal.width() != idler.width() || signal.height() != idler.height()) {
    throw std::runtime_error(
        "speckle rendering requires congruent signal/idler regions");
  }
  if (!(model_.cross_strength_mu >= 0.0 && model_.cross_strength_mu <= 1.0)) {
    throw std::invalid_argument("SpeckleRenderer: mu must lie in [0, 1]");
  }
  sub_width_ = signal.width() * oversample_;
  sub_height_ = signal.height() * oversample_;
  const double sub_pitch = config_.superpixel_m() / oversample_;

  // Gaussian field kernel and shared-mode weight, sampled on the FFT grid.
  field_filter_ = Grid2D<double>(sub_width_, sub_height_);
  shared_mode_weight_ = Grid2D<double>(sub_width_, sub_height_);
  const double ax = model_.ac_kernel_sigma_m.x / sub_pitch;
  const double ay = model_.ac_kernel_sigma_m.y / sub_pitch;
  const double jx = model_.xc_jitter_sigma_m.x / sub_pitch;
  const double jy = model_.xc_jitter_sigma_m.y / sub_pitch;
  double filter_power = 0.0;
  for (int ky = 0; ky < sub_height_; ++ky) {
    const int wy = ky <= sub_height_ / 2 ? ky : ky - sub_height_;
    const double qy = 2.0 * kPi * wy / sub_height_;
    for (int kx = 0; kx < sub_width_; ++kx) {
      const int wx = kx <= sub_width_ / 2 ? kx : kx - sub_width_;
      const double qx = 2.0 * kPi * wx / sub_width_;
      const double h = std::exp(-0.5 * (sq(ax * qx) + sq(ay * qy)));
      field_filter_(kx, ky) = h;
      shared_mode_weight_(kx, ky) =
          model_.cross_strength_mu * std::exp(-(sq(jx * qx) + sq(jy * qy)));
      filter_power += h * h;
    }
  }
  const double n_total = static_cast<double>(sub_width_) * sub_height_;
  // Unnormalized FFT round trip contributes N^2; the filter bandwidth sets
  // the per-point field variance.
  intensity_scale_ = model_.mean_intensity / (filter_power * n_total);

  // Idler superpixel -> signal superpixel index map through the conjugation
  // map. The map must land on the superpixel lattice exactly; the idler
  // intensity is box-integrated on the pre-mirror lattice and then permuted,
  // so conjugate superpixels aggregate identical subpixel sets.
  mirror_lut_.resize(static_cast<std::size_t>(signal.width()) *
                     signal.height());
  const Affine2& conj = config_.geometry.conjugation_sp;
  for (int iy = 0; iy < signal.height(); ++iy) {
    for (int ix = 0; ix < signal.width(); ++ix) {
      const Vec2 idler_sp{static_cast<double>(idler.x0 + ix),
                          static_cast<double>(idler.y0 + iy)};
      const Vec2 signal_sp = conj.apply(idler_sp);
      const long lx = std::lround(signal_sp.x) - signal.x0;
      const long ly = std::lround(signal_sp.y) - signal.y0;
      if (std::abs(signal_sp.x - (lx + signal.x0)) > 1e-6 ||
          std::abs(signal_sp.y - (ly + signal.y0)) > 1e-6 || lx < 0 ||
          lx >= signal.width() || ly < 0 || ly >= signal.height()) {
        throw std::runtime_error(
            "conjugation map is not compatible with the rendering lattice");
      }
      mirror_lut_[static_cast<std::size_t>(iy) * signal.width() + ix] =
          static_cast<std::int32_t>(ly * signal.width() + lx);
    }
  }
}

Frame SpeckleRenderer::render(std::int64_t frame_index) const {
  using cplx = std::complex<double>;
  const std::uint32_t stream = static_cast<std::uint32_t>(frame_index);
  Philox rng_shared(config_.rng_seed, stream, kSubSpeckleSignal);
  Philox rng_independent(config_.rng_seed, stream, kSubSpeckleIdler);

  Grid2D<cplx> shared(sub_width_, sub_height_);
  Grid2D<cplx> independent(sub_width_, sub_height_);
  for (auto& z : shared) z = rng_shared.complex_normal();
  for (auto& z : independent) z = rng_independent.complex_normal();
  fft::forward(shared);
  fft::forward(independent);

  Grid2D<cplx> signal_field(sub_width_, sub_height_);
  Grid2D<cplx> idler_field(sub_width_, sub_height_);
  const std::size_t n = shared.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double h = field_filter_.data()[k];
    const double c = shared_mode_weight_.data()[k];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    signal_field.data()[k] = h * shared.data()[k];
    idler_field.data()[k] =
        h * (c * shared.data()[k] + s * independent.data()[k]);
  }
  fft::inverse(signal_field);
  fft::inverse(idler_field);

  Frame frame;
  frame.regime = Regime::intensity;
  frame.binning = config_.binning();
  frame.frame_index = frame_index;
  frame.values = Grid2D<double>(config_.grid_width(), config_.grid_height());
  frame.signal_region = config_.geometry.signal_region;
  frame.idler_region = config_.geometry.idler_region;

  const RegionRect& signal = frame.signal_region;
  const RegionRect& idler = frame.idler_region;
  const int osf = oversample_;
  const double box_norm = intensity_scale_ / (osf * osf);
  auto box_integrate = [&](const Grid2D<cplx>& field, int x, int y) {
    double acc = 0.0;
    for (int sy = 0; sy < osf; ++sy) {
      const int row = (y * osf + sy) * sub_width_;
      for (int sx = 0; sx < osf; ++sx) {
        acc += std::norm(field.data()[row + x * osf + sx]);
      }
    }
    return acc * box_norm;
  };

  Grid2D<double> idler_pre(signal.width(), signal.height());
  for (int y = 0; y < signal.height(); ++y) {
    for (int x = 0; x < signal.width(); ++x) {
      frame.values(signal.x0 + x, signal.y0 + y) =
          box_integrate(signal_field, x, y);
      idler_pre(x, y) = box_integrate(idler_field, x, y);
    }
  }
  for (int y = 0; y < signal.height(); ++y) {
    for (int x = 0; x < signal.width(); ++x) {
      frame.values(idler.x0 + x, idler.y0 + y) =
          idler_pre.data()[mirror_lut_[static_cast<std::size_t>(y) *
                                           signal.width() +
                                       x]];
    }
  }
  return frame;
}

Frame render_speckle_frame(const SpeckleModel& model,
                           const ExperimentConfig& config,
                           std::int64_t frame_index) {
  return SpeckleRenderer(model, config).render(frame_index);
}

}  // namespace twinbeam
