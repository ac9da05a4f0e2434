#include "sglab/random_fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "sglab/errors.hpp"

namespace sglab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix(splitmix(splitmix(base) ^ stream) ^ index);
}

ScalarField random_field(const TorusGrid& grid, const RandomFieldSpec& spec, std::mt19937_64& rng) {
  const int n = grid.n();
  const int kmax = spec.kmax > 0 ? std::min(spec.kmax, n / 2 - 1) : grid.dealias_cutoff();
  if (kmax < 1) throw ConfigError("random field needs kmax >= 1");
  std::normal_distribution<double> gauss;
  Spectrum s(grid.spectral_size(), Complex(0.0, 0.0));
  const double scale = static_cast<double>(n) * n;
  // draw in a fixed (p, q) order so the field does not depend on layout
  for (int p = -kmax; p <= kmax; ++p) {
    for (int q = 0; q <= kmax; ++q) {
      if (q == 0 && p <= 0) continue;
      const double w = std::pow(std::hypot(p, q), -spec.gamma);
      const double re = gauss(rng), im = gauss(rng);
      const int row = p >= 0 ? p : p + n;
      s[static_cast<std::size_t>(row) * grid.spectral_cols() + q] = scale * w * Complex(re, im);
      if (q == 0) {
        // the q = 0 column stores both p and -p; keep it Hermitian
        s[static_cast<std::size_t>(n - row) * grid.spectral_cols()] =
            scale * w * Complex(re, -im);
      }
    }
  }
  auto f = ScalarField::from_spectrum(grid, std::move(s));
  if (spec.l2 > 0.0) {
    const double l2 = norm(f, NormKind::L2());
    if (l2 > 0.0) f = f * (spec.l2 / l2);
  }
  return f;
}

}  // namespace sglab
