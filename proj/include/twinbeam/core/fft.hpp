#pragma once

#include <complex>

#include "twinbeam/core/grid.hpp"

namespace twinbeam {

/// 2D complex-to-complex FFT backed by FFTW. Plans are cached per thread and
/// per grid size and are always executed on the cache's own aligned buffers,
/// so results are bit-identical no matter which thread runs the transform.
/// Transforms are unnormalized (FFTW convention): inverse(forward(x)) == N*x.
namespace fft {

void forward(Grid2D<std::complex<double>>& grid);
void inverse(Grid2D<std::complex<double>>& grid);

}  // namespace fft

}  // namespace twinbeam
