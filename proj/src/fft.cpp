#include "twinbeam/core/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <utility>

namespace twinbeam {
namespace fft {
namespace {

// FFTW plan creation mutates global planner state; execution does not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct CachedPlan {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  fftw_complex* buffer = nullptr;
  std::size_t size = 0;

  ~CachedPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
    if (buffer) fftw_free(buffer);
  }
};

CachedPlan& plan_for(int width, int height) {
  thread_local std::map<std::pair<int, int>, CachedPlan> cache;
  CachedPlan& plan = cache[{width, height}];
  if (!plan.forward) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan.size = static_cast<std::size_t>(width) * height;
    plan.buffer = fftw_alloc_complex(plan.size);
    // FFTW uses row-major (n0, n1) = (rows, cols).
    plan.forward = fftw_plan_dft_2d(height, width, plan.buffer, plan.buffer,
                                    FFTW_FORWARD, FFTW_ESTIMATE);
    plan.inverse = fftw_plan_dft_2d(height, width, plan.buffer, plan.buffer,
                                    FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  return plan;
}

void execute(Grid2D<std::complex<double>>& grid, bool forward_dir) {
  CachedPlan& plan = plan_for(grid.width(), grid.height());
  std::memcpy(plan.buffer, grid.data(), plan.size * sizeof(fftw_complex));
  fftw_execute(forward_dir ? plan.forward : plan.inverse);
  std::memcpy(grid.data(), plan.buffer, plan.size * sizeof(fftw_complex));
}

}  // namespace

void forward(Grid2D<std::complex<double>>& grid) { execute(grid, true); }
void inverse(Grid2D<std::complex<double>>& grid) { execute(grid, false); }

}  // namespace fft
}  // namespace twinbeam
