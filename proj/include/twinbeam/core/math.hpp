#pragma once

#include <cmath>

namespace twinbeam {

// FWHM of a Gaussian = kFwhmPerSigma * sigma.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2*sqrt(2*ln 2)

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// sin(x)/x with the removable singularity handled by series expansion.
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) {
    return 1.0 - x * x / 6.0;
  }
  return std::sin(x) / x;
}

inline double sq(double x) { return x * x; }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace twinbeam
