#pragma once

// Random band-limited fields for property sweeps.

#include <cstdint>
#include <random>

#include "sglab/torus_spectral.hpp"

namespace sglab {

struct RandomFieldSpec {
  double gamma = 3.0;  // coefficient decay |k|^-gamma
  int kmax = 0;        // max(|p|,|q|) cutoff; 0 means the dealiasing cutoff n/3
  double l2 = 1.0;     // L2 norm of the result; <= 0 leaves it unscaled
};

// Mean-zero real field with i.i.d. complex Gaussian Fourier coefficients
// scaled by |k|^-gamma for 0 < max(|p|,|q|) <= kmax.
ScalarField random_field(const TorusGrid& grid, const RandomFieldSpec& spec, std::mt19937_64& rng);

// Deterministic 64-bit seed for sample `index` of stream `stream` under a
// base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

}  // namespace sglab
