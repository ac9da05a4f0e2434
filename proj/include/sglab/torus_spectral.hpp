#pragma once

// Periodic grid on the unit torus [0,1)^2, real fields with lazily cached
// Fourier coefficients, spectral differential operators and the norm kit.
//
// Layout: values are row-major with x index outer and y index inner, so the
// sample (i, j) sits at (x, y) = (i h, j h). Spectra use the real-to-complex
// half layout n x (n/2 + 1): row i carries x-frequency p = freq(i), column j
// carries y-frequency q = j. The forward transform is unscaled and the inverse
// is scaled by 1/n^2, so the Fourier coefficient of e^{2 pi i (p x + q y)} is
// spectrum[i, j] / n^2.

#include <atomic>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace sglab {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class TorusGrid {
 public:
  // Throws ConfigError unless n >= 8 is a power of two.
  explicit TorusGrid(int n);

  int n() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / n_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  int spectral_cols() const noexcept { return n_ / 2 + 1; }
  std::size_t spectral_size() const noexcept {
    return static_cast<std::size_t>(n_) * spectral_cols();
  }

  // Integer frequency of row index i in [-n/2, n/2).
  int freq(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }
  std::vector<int> freqs() const;

  // |k| = 2 pi sqrt(p^2 + q^2) for spectral entry (i, j).
  double k_mag(int i, int j) const noexcept;

  // Multiplicity of half-spectrum column j in the full spectrum.
  double column_weight(int j) const noexcept {
    return (j == 0 || j == n_ / 2) ? 1.0 : 2.0;
  }

  // Highest retained frequency under the 2/3 rule.
  int dealias_cutoff() const noexcept { return n_ / 3; }

  double coord(int i) const noexcept { return i * h(); }

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

 private:
  int n_;
};

// Immutable real periodic field. Copies share storage; the spectrum is
// computed at most once per storage and is bit-identical however many threads
// race to fill it.
class ScalarField {
 public:
  ScalarField(TorusGrid grid, std::vector<double> values);

  static ScalarField zeros(TorusGrid grid);
  static ScalarField constant(TorusGrid grid, double c);
  static ScalarField from_function(TorusGrid grid,
                                   const std::function<double(double, double)>& f);
  // The spectrum must be Hermitian-consistent (self-conjugate modes real).
  static ScalarField from_spectrum(TorusGrid grid, Spectrum spectrum);

  const TorusGrid& grid() const noexcept { return grid_; }
  int n() const noexcept { return grid_.n(); }
  std::span<const double> values() const noexcept { return data_->values; }
  double operator()(int i, int j) const noexcept {
    return data_->values[static_cast<std::size_t>(i) * grid_.n() + j];
  }
  const Spectrum& spectrum() const;
  bool has_cached_spectrum() const;

  double mean() const;

  ScalarField operator-() const;
  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);

 private:
  struct Storage {
    std::vector<double> values;
    mutable std::once_flag once;
    mutable Spectrum spectrum;
    mutable std::atomic<bool> cached{false};
  };

  ScalarField(TorusGrid grid, std::shared_ptr<Storage> data);

  TorusGrid grid_;
  std::shared_ptr<Storage> data_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, double s);
ScalarField operator*(double s, ScalarField a);

// a + s b
ScalarField axpy(const ScalarField& a, double s, const ScalarField& b);
// Pointwise product on the grid (aliased).
ScalarField multiply(const ScalarField& a, const ScalarField& b);
ScalarField subtract_mean(const ScalarField& f);

struct VectorField {
  ScalarField x;
  ScalarField y;
};

struct Hessian {
  ScalarField xx;
  ScalarField xy;
  ScalarField yy;
};

struct MultiIndex {
  int a = 0;  // order in x
  int b = 0;  // order in y
};

// d^a/dx^a d^b/dy^b. Odd-order derivatives drop the Nyquist mode.
ScalarField derivative(const ScalarField& f, MultiIndex order);
ScalarField laplacian(const ScalarField& f);
// Mean-zero solution of Lap g = f. Throws MeanViolationError when
// |<f>| > 1e-10 ||f||_L2.
ScalarField inv_laplacian(const ScalarField& f);
VectorField gradient(const ScalarField& f);
// (-d_y psi, d_x psi)
VectorField perp_gradient(const ScalarField& psi);
ScalarField divergence(const VectorField& u);
Hessian hessian(const ScalarField& f);
// Zero every mode with max(|p|, |q|) > n/3. Idempotent.
ScalarField dealias(const ScalarField& f);
ScalarField dealiased_product(const ScalarField& a, const ScalarField& b);

class NormKind {
 public:
  enum class Tag { L2, Linf, Hs, Hminus1, W1inf, Calpha, GradLinf };

  static NormKind L2() { return NormKind(Tag::L2, 0.0); }
  static NormKind Linf() { return NormKind(Tag::Linf, 0.0); }
  static NormKind Hs(double s) { return NormKind(Tag::Hs, s); }
  static NormKind Hminus1() { return NormKind(Tag::Hminus1, -1.0); }
  static NormKind W1inf() { return NormKind(Tag::W1inf, 0.0); }
  static NormKind Calpha(double alpha);  // alpha in (0,1)
  static NormKind GradLinf() { return NormKind(Tag::GradLinf, 0.0); }

  Tag tag() const noexcept { return tag_; }
  double param() const noexcept { return param_; }

 private:
  NormKind(Tag tag, double param) : tag_(tag), param_(param) {}
  Tag tag_;
  double param_;
};

inline constexpr double kDefaultHolderAlpha = 0.5;

// L2 and Linf use grid samples on the unit-area torus; Hs is the homogeneous
// spectral norm (sum over k != 0 of |k|^{2s} |c_k|^2)^{1/2}.
double norm(const ScalarField& f, NormKind kind);

// max over dyadic axis/diagonal offsets of |f(x) - f(y)| / |x - y|^alpha.
double holder_seminorm(const ScalarField& f, double alpha);

// Pointwise operator norm max|lambda(D^2)| maximized over the grid.
double hessian_linf(const Hessian& h);
// (int |D^2 f|_F^2)^{1/2}
double hessian_l2(const Hessian& h);
double vector_l2(const VectorField& u);
double vector_linf(const VectorField& u);
// |<f>| <= tol * ||f||_L2
bool is_mean_zero(const ScalarField& f, double tol = 1e-10);

// sum over k != 0 of w(|k|) |c_k|^2, with c_k the Fourier coefficients of f
// over the full spectrum.
double spectral_weighted_sq(const ScalarField& f, const std::function<double(double)>& weight);

}  // namespace sglab
