#include "sglab/torus_spectral.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "sglab/errors.hpp"

namespace sglab {

TorusGrid::TorusGrid(int n) : n_(n) {
  if (n < 8 || (n & (n - 1)) != 0) {
    throw ConfigError("grid size must be a power of two >= 8, got " + std::to_string(n));
  }
}

std::vector<int> TorusGrid::freqs() const {
  std::vector<int> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = freq(i);
  return out;
}

double TorusGrid::k_mag(int i, int j) const noexcept {
  const double p = freq(i);
  const double q = j;
  return kTwoPi * std::sqrt(p * p + q * q);
}

ScalarField::ScalarField(TorusGrid grid, std::vector<double> values) : grid_(grid) {
  if (values.size() != grid.size()) {
    throw ShapeError("field has " + std::to_string(values.size()) + " samples, grid needs " +
                     std::to_string(grid.size()));
  }
  data_ = std::make_shared<Storage>();
  data_->values = std::move(values);
}

ScalarField::ScalarField(TorusGrid grid, std::shared_ptr<Storage> data)
    : grid_(grid), data_(std::move(data)) {}

ScalarField ScalarField::zeros(TorusGrid grid) { return constant(grid, 0.0); }

ScalarField ScalarField::constant(TorusGrid grid, double c) {
  return ScalarField(grid, std::vector<double>(grid.size(), c));
}

ScalarField ScalarField::from_function(TorusGrid grid,
                                       const std::function<double(double, double)>& f) {
  const int n = grid.n();
  std::vector<double> v(grid.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(i) * n + j] = f(grid.coord(i), grid.coord(j));
  }
  return ScalarField(grid, std::move(v));
}

ScalarField ScalarField::from_spectrum(TorusGrid grid, Spectrum spectrum) {
  if (spectrum.size() != grid.spectral_size()) {
    throw ShapeError("spectrum size does not match grid");
  }
  auto data = std::make_shared<Storage>();
  data->values = detail::inverse(grid, spectrum);
  std::call_once(data->once, [&] {
    data->spectrum = std::move(spectrum);
    data->cached.store(true, std::memory_order_release);
  });
  return ScalarField(grid, std::move(data));
}

const Spectrum& ScalarField::spectrum() const {
  std::call_once(data_->once, [this] {
    data_->spectrum = detail::forward(grid_, data_->values);
    data_->cached.store(true, std::memory_order_release);
  });
  return data_->spectrum;
}

bool ScalarField::has_cached_spectrum() const {
  return data_->cached.load(std::memory_order_acquire);
}

double ScalarField::mean() const {
  double s = 0.0;
  for (double v : data_->values) s += v;
  return s / static_cast<double>(grid_.size());
}

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) {
    throw ShapeError("fields live on different grids (" + std::to_string(a.n()) + " vs " +
                     std::to_string(b.n()) + ")");
  }
}

template <class Op>
ScalarField zip(const ScalarField& a, const ScalarField& b, Op op) {
  require_same_grid(a, b);
  auto va = a.values();
  auto vb = b.values();
  std::vector<double> out(va.size());
  for (std::size_t k = 0; k < va.size(); ++k) out[k] = op(va[k], vb[k]);
  return ScalarField(a.grid(), std::move(out));
}

template <class Op>
ScalarField map(const ScalarField& a, Op op) {
  auto va = a.values();
  std::vector<double> out(va.size());
  for (std::size_t k = 0; k < va.size(); ++k) out[k] = op(va[k]);
  return ScalarField(a.grid(), std::move(out));
}

// Multiply every spectral entry by mult(i, j) and return the resulting field.
template <class Mult>
ScalarField spectral_map(const ScalarField& f, Mult mult) {
  const TorusGrid& g = f.grid();
  const Spectrum& in = f.spectrum();
  Spectrum out(in.size());
  const int n = g.n();
  const int cols = g.spectral_cols();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cols; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * cols + j;
      out[idx] = in[idx] * mult(i, j);
    }
  }
  return ScalarField::from_spectrum(g, std::move(out));
}

}  // namespace

ScalarField ScalarField::operator-() const {
  return map(*this, [](double v) { return -v; });
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  *this = zip(*this, other, [](double x, double y) { return x + y; });
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  *this = zip(*this, other, [](double x, double y) { return x - y; });
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  *this = map(*this, [s](double v) { return v * s; });
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField axpy(const ScalarField& a, double s, const ScalarField& b) {
  return zip(a, b, [s](double x, double y) { return x + s * y; });
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}

ScalarField subtract_mean(const ScalarField& f) {
  const double m = f.mean();
  return map(f, [m](double v) { return v - m; });
}

ScalarField derivative(const ScalarField& f, MultiIndex order) {
  const int a = order.a;
  const int b = order.b;
  if (a < 0 || b < 0 || a + b > 2) throw UnsupportedOrderError(a, b);
  if (a == 0 && b == 0) return f;
  const TorusGrid& g = f.grid();
  const int n = g.n();
  const int nyq = n / 2;
  return spectral_map(f, [&](int i, int j) {
    if ((a % 2 == 1 && i == nyq) || (b % 2 == 1 && j == nyq)) return Complex(0.0, 0.0);
    const Complex ikx(0.0, kTwoPi * g.freq(i));
    const Complex iky(0.0, kTwoPi * j);
    Complex m(1.0, 0.0);
    for (int r = 0; r < a; ++r) m *= ikx;
    for (int r = 0; r < b; ++r) m *= iky;
    return m;
  });
}

ScalarField laplacian(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  return spectral_map(f, [&](int i, int j) {
    const double k = g.k_mag(i, j);
    return Complex(-k * k, 0.0);
  });
}

namespace {

double l2(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s / static_cast<double>(f.grid().size()));
}

void require_mean_zero(const ScalarField& f) {
  const double m = f.mean();
  const double tol = 1e-10 * l2(f);
  if (std::abs(m) > tol) throw MeanViolationError(m, tol);
}

}  // namespace

ScalarField inv_laplacian(const ScalarField& f) {
  require_mean_zero(f);
  const TorusGrid& g = f.grid();
  return spectral_map(f, [&](int i, int j) {
    if (i == 0 && j == 0) return Complex(0.0, 0.0);
    const double k = g.k_mag(i, j);
    return Complex(-1.0 / (k * k), 0.0);
  });
}

VectorField gradient(const ScalarField& f) {
  return {derivative(f, {1, 0}), derivative(f, {0, 1})};
}

VectorField perp_gradient(const ScalarField& psi) {
  return {-derivative(psi, {0, 1}), derivative(psi, {1, 0})};
}

ScalarField divergence(const VectorField& u) {
  return derivative(u.x, {1, 0}) + derivative(u.y, {0, 1});
}

Hessian hessian(const ScalarField& f) {
  return {derivative(f, {2, 0}), derivative(f, {1, 1}), derivative(f, {0, 2})};
}

ScalarField dealias(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  const int cut = g.dealias_cutoff();
  return spectral_map(f, [&](int i, int j) {
    const int p = std::abs(g.freq(i));
    return (p > cut || j > cut) ? Complex(0.0, 0.0) : Complex(1.0, 0.0);
  });
}

ScalarField dealiased_product(const ScalarField& a, const ScalarField& b) {
  return dealias(multiply(a, b));
}

NormKind NormKind::Calpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("Holder exponent must lie in (0,1), got " + std::to_string(alpha));
  }
  return NormKind(Tag::Calpha, alpha);
}

double spectral_weighted_sq(const ScalarField& f, const std::function<double(double)>& weight) {
  const TorusGrid& g = f.grid();
  const Spectrum& s = f.spectrum();
  const int n = g.n();
  const int cols = g.spectral_cols();
  const double scale = 1.0 / (static_cast<double>(g.size()) * static_cast<double>(g.size()));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (i == 0 && j == 0) continue;
      const Complex c = s[static_cast<std::size_t>(i) * cols + j];
      total += g.column_weight(j) * weight(g.k_mag(i, j)) * std::norm(c);
    }
  }
  return total * scale;
}

namespace {

double linf(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

double holder_seminorm(const ScalarField& f, double alpha) {
  const int n = f.n();
  const double h = f.grid().h();
  static constexpr int kDirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  double best = 0.0;
  for (int d = 1; d <= n / 2; d *= 2) {
    for (const auto& dir : kDirs) {
      const bool diagonal = dir[0] != 0 && dir[1] != 0;
      const double dist = d * h * (diagonal ? std::sqrt(2.0) : 1.0);
      const double denom = std::pow(dist, alpha);
      double worst = 0.0;
      for (int i = 0; i < n; ++i) {
        const int i2 = (i + dir[0] * d) & (n - 1);
        for (int j = 0; j < n; ++j) {
          const int j2 = (j + dir[1] * d + n) & (n - 1);
          worst = std::max(worst, std::abs(f(i, j) - f(i2, j2)));
        }
      }
      best = std::max(best, worst / denom);
    }
  }
  return best;
}

double vector_l2(const VectorField& u) {
  require_same_grid(u.x, u.y);
  auto x = u.x.values();
  auto y = u.y.values();
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * x[k] + y[k] * y[k];
  return std::sqrt(s / static_cast<double>(x.size()));
}

double vector_linf(const VectorField& u) {
  require_same_grid(u.x, u.y);
  auto x = u.x.values();
  auto y = u.y.values();
  double m = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, std::hypot(x[k], y[k]));
  return m;
}

double hessian_linf(const Hessian& h) {
  auto a = h.xx.values();
  auto b = h.xy.values();
  auto c = h.yy.values();
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double half_trace = 0.5 * (a[k] + c[k]);
    const double radius = std::hypot(0.5 * (a[k] - c[k]), b[k]);
    m = std::max(m, std::abs(half_trace) + radius);
  }
  return m;
}

double hessian_l2(const Hessian& h) {
  auto a = h.xx.values();
  auto b = h.xy.values();
  auto c = h.yy.values();
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * a[k] + 2.0 * b[k] * b[k] + c[k] * c[k];
  return std::sqrt(s / static_cast<double>(a.size()));
}

bool is_mean_zero(const ScalarField& f, double tol) {
  return std::abs(f.mean()) <= tol * l2(f);
}

double norm(const ScalarField& f, NormKind kind) {
  switch (kind.tag()) {
    case NormKind::Tag::L2:
      return l2(f);
    case NormKind::Tag::Linf:
      return linf(f);
    case NormKind::Tag::Hs:
    case NormKind::Tag::Hminus1: {
      require_mean_zero(f);
      const double s = kind.param();
      return std::sqrt(spectral_weighted_sq(f, [s](double k) { return std::pow(k, 2.0 * s); }));
    }
    case NormKind::Tag::W1inf:
      return linf(f) + vector_linf(gradient(f));
    case NormKind::Tag::Calpha:
      return linf(f) + holder_seminorm(f, kind.param());
    case NormKind::Tag::GradLinf:
      return vector_linf(gradient(f));
  }
  return 0.0;
}

}  // namespace sglab
