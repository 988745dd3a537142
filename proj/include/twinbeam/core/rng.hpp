#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "twinbeam/core/math.hpp"

namespace twinbeam {

/// Counter-based PRNG (Philox-4x32, 10 rounds). A generator is addressed by
/// (seed, stream, substream); draws from distinct addresses are independent
/// regardless of how many values each one produces, which is what makes
/// per-frame streams reproducible under any parallel schedule.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint32_t stream, std::uint32_t substream = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream), substream_(substream) {}

  /// One keyed block permutation; exposed so tests can check known vectors.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
      const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

  std::uint32_t next_u32() {
    if (buf_pos_ == 4) {
      buf_ = block({static_cast<std::uint32_t>(block_index_),
                    static_cast<std::uint32_t>(block_index_ >> 32),
                    stream_, substream_},
                   key_);
      ++block_index_;
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal (Box-Muller, pairwise).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 2.0 * kPi * uniform();
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Circular complex Gaussian with E|z|^2 = 1.
  std::complex<double> complex_normal() {
    const double r = std::sqrt(-std::log(uniform_pos()));
    const double theta = 2.0 * kPi * uniform();
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) return poisson_knuth(mean);
    return poisson_ptrs(mean);
  }

 private:
  std::uint64_t poisson_knuth(double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform_pos();
    } while (p > limit);
    return k - 1;
  }

  // Transformed rejection with squeeze (PTRS), valid for mean >= 10.
  std::uint64_t poisson_ptrs(double mean) {
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          -mean + kf * log_mean - std::lgamma(kf + 1.0)) {
        return static_cast<std::uint64_t>(kf);
      }
    }
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_index_ = 0;
  std::uint32_t stream_;
  std::uint32_t substream_;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Substream ids used by the synthesis/detection chain. Keeping them in one
/// place guarantees distinct modules never share a stream for one frame.
enum RngSubstream : std::uint32_t {
  kSubPairSampling = 1,
  kSubDetectorCounting = 2,
  kSubDarkEvents = 3,
  kSubSpeckleSignal = 4,
  kSubSpeckleIdler = 5,
  kSubReadoutNoise = 6,
  kSubReferencePoints = 7,
  kSubBootstrap = 8,
};

}  // namespace twinbeam
