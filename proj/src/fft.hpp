#pragma once

#include "sglab/torus_spectral.hpp"

namespace sglab::detail {

// Process-wide FFTW plans for one grid size. Plan creation is serialized;
// execution uses the new-array interface and is safe from concurrent threads.
class FftEngine {
 public:
  static const FftEngine& get(int n);

  // Unscaled r2c transform of n*n reals into n*(n/2+1) coefficients.
  void forward(const double* in, Complex* out) const;
  // Inverse scaled by 1/n^2. The input is left untouched.
  void inverse(const Complex* in, double* out) const;

  ~FftEngine();
  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

 private:
  explicit FftEngine(int n);
  int n_;
  void* forward_plan_;
  void* inverse_plan_;
};

Spectrum forward(const TorusGrid& grid, std::span<const double> values);
std::vector<double> inverse(const TorusGrid& grid, const Spectrum& spectrum);

}  // namespace sglab::detail
