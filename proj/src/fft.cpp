#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace sglab::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftEngine::FftEngine(int n) : n_(n) {
  const std::size_t real_size = static_cast<std::size_t>(n) * n;
  const std::size_t complex_size = static_cast<std::size_t>(n) * (n / 2 + 1);
  double* r = fftw_alloc_real(real_size);
  fftw_complex* c = fftw_alloc_complex(complex_size);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c_2d(n, n, r, c, flags);
  inverse_plan_ = fftw_plan_dft_c2r_2d(n, n, c, r, flags);
  fftw_free(r);
  fftw_free(c);
}

FftEngine::~FftEngine() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

const FftEngine& FftEngine::get(int n) {
  static std::map<int, std::unique_ptr<FftEngine>> engines;
  std::lock_guard lock(planner_mutex());
  auto it = engines.find(n);
  if (it == engines.end()) {
    it = engines.emplace(n, std::unique_ptr<FftEngine>(new FftEngine(n))).first;
  }
  return *it->second;
}

void FftEngine::forward(const double* in, Complex* out) const {
  // Out-of-place r2c leaves its input intact.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void FftEngine::inverse(const Complex* in, double* out) const {
  const std::size_t complex_size = static_cast<std::size_t>(n_) * (n_ / 2 + 1);
  Spectrum scratch(in, in + complex_size);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out);
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  const std::size_t real_size = static_cast<std::size_t>(n_) * n_;
  for (std::size_t k = 0; k < real_size; ++k) out[k] *= scale;
}

Spectrum forward(const TorusGrid& grid, std::span<const double> values) {
  Spectrum out(grid.spectral_size());
  FftEngine::get(grid.n()).forward(values.data(), out.data());
  return out;
}

std::vector<double> inverse(const TorusGrid& grid, const Spectrum& spectrum) {
  std::vector<double> out(grid.size());
  FftEngine::get(grid.n()).inverse(spectrum.data(), out.data());
  return out;
}

}  // namespace sglab::detail
