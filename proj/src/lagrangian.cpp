#include "sglab/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "parallel.hpp"
#include "sglab/errors.hpp"
#include "sglab/field_io.hpp"

namespace sglab {

void VelocityProvider::require_covered(double t) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(t_end()));
  if (t < t_begin() - slack || t > t_end() + slack) {
    throw CoverageError("velocity requested at t = " + std::to_string(t) + " outside [" +
                        std::to_string(t_begin()) + ", " + std::to_string(t_end()) + "]");
  }
}

FrozenVelocity::FrozenVelocity(VectorField u, double t0, double t1)
    : u_(std::move(u)), t0_(t0), t1_(t1) {}

VectorField FrozenVelocity::at(double t) const {
  require_covered(t);
  return u_;
}

TrajectoryVelocity::TrajectoryVelocity(const Trajectory& tr) {
  if (tr.steps.empty()) throw CoverageError("trajectory has no recorded steps");
  for (const auto& s : tr.steps) {
    if (!times_.empty() && !(s.time > times_.back())) continue;
    times_.push_back(s.time);
    potentials_.push_back(s.potential);
  }
}

ScalarField TrajectoryVelocity::potential_at(double t) const {
  require_covered(t);
  const int count = static_cast<int>(times_.size());
  if (count == 1) return potentials_.front();
  // index of the first recorded time strictly above t, clamped
  const int upper = static_cast<int>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  const int order = std::min(count, 4);
  int first = std::clamp(upper - order / 2, 0, count - order);
  ScalarField out = ScalarField::zeros(potentials_.front().grid());
  bool exact = false;
  for (int a = first; a < first + order; ++a) {
    if (times_[a] == t) {
      out = potentials_[a];
      exact = true;
      break;
    }
  }
  if (exact) return out;
  for (int a = first; a < first + order; ++a) {
    double w = 1.0;
    for (int b = first; b < first + order; ++b) {
      if (b != a) w *= (t - times_[b]) / (times_[a] - times_[b]);
    }
    out = axpy(out, w, potentials_[a]);
  }
  return out;
}

VectorField TrajectoryVelocity::at(double t) const { return perp_gradient(potential_at(t)); }

FlowMap FlowMap::identity(int m, double time) {
  FlowMap f;
  f.m = m;
  f.time = time;
  const std::size_t count = static_cast<std::size_t>(m) * m;
  f.x.resize(count);
  f.y.resize(count);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      f.x[static_cast<std::size_t>(i) * m + j] = f.label(i);
      f.y[static_cast<std::size_t>(i) * m + j] = f.label(j);
    }
  }
  return f;
}

namespace {

void lagrange_weights(double f, double w[4]) {
  w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
  w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
  w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0;
  w[3] = (f + 1.0) * f * (f - 1.0) / 6.0;
}

}  // namespace

double interpolate(const ScalarField& f, double x, double y) {
  const int n = f.n();
  const double sx = x * n;
  const double sy = y * n;
  const double fx = std::floor(sx);
  const double fy = std::floor(sy);
  double wx[4], wy[4];
  lagrange_weights(sx - fx, wx);
  lagrange_weights(sy - fy, wy);
  const long ix = static_cast<long>(fx) - 1;
  const long iy = static_cast<long>(fy) - 1;
  const long mask = n - 1;
  double s = 0.0;
  for (int a = 0; a < 4; ++a) {
    const int i = static_cast<int>((ix + a) & mask);
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += wy[b] * f(i, static_cast<int>((iy + b) & mask));
    s += wx[a] * row;
  }
  return s;
}

namespace {

// Advance every particle of (x, y) by RK4 on [t, t + h].
void rk4_particles(const VelocityProvider& u, std::vector<double>& x, std::vector<double>& y,
                   double t, double h, int threads) {
  const VectorField v1 = u.at(t);
  const VectorField v2 = u.at(t + 0.5 * h);
  const VectorField v4 = u.at(t + h);
  detail::parallel_for(x.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      const double x0 = x[p], y0 = y[p];
      const double k1x = interpolate(v1.x, x0, y0), k1y = interpolate(v1.y, x0, y0);
      const double x1 = x0 + 0.5 * h * k1x, y1 = y0 + 0.5 * h * k1y;
      const double k2x = interpolate(v2.x, x1, y1), k2y = interpolate(v2.y, x1, y1);
      const double x2 = x0 + 0.5 * h * k2x, y2 = y0 + 0.5 * h * k2y;
      const double k3x = interpolate(v2.x, x2, y2), k3y = interpolate(v2.y, x2, y2);
      const double x3 = x0 + h * k3x, y3 = y0 + h * k3y;
      const double k4x = interpolate(v4.x, x3, y3), k4y = interpolate(v4.y, x3, y3);
      x[p] = x0 + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      y[p] = y0 + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    }
  });
}

void integrate(const VelocityProvider& u, std::vector<double>& x, std::vector<double>& y,
               double t0, double t1, double dt, int threads) {
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  if (lo < u.t_begin() - slack || hi > u.t_end() + slack) {
    throw CoverageError("velocity provider covers [" + std::to_string(u.t_begin()) + ", " +
                        std::to_string(u.t_end()) + "], flow needs [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "]");
  }
  if (t0 == t1) return;
  if (!(std::abs(dt) > 0.0)) throw ConfigError("particle time step must be nonzero");
  const long steps = std::max(1L, static_cast<long>(std::ceil((hi - lo) / std::abs(dt) - 1e-9)));
  const double h = (t1 - t0) / static_cast<double>(steps);
  for (long k = 0; k < steps; ++k) {
    const double t = (k + 1 == steps) ? t1 - h : t0 + k * h;
    rk4_particles(u, x, y, t, h, threads);
  }
}

}  // namespace

FlowMap advect_flow(const VelocityProvider& u, const FlowMap& labels, double t0, double t1,
                    double dt, int threads) {
  FlowMap out = labels;
  integrate(u, out.x, out.y, t0, t1, dt, threads);
  out.time = t1;
  return out;
}

double flow_gap(const FlowMap& a, const FlowMap& b) {
  if (a.m != b.m || a.x.size() != b.x.size()) {
    throw ShapeError("flow maps have different label grids (" + std::to_string(a.m) + " vs " +
                     std::to_string(b.m) + ")");
  }
  if (std::abs(a.time - b.time) > 1e-12 * std::max(1.0, std::abs(a.time))) {
    throw ShapeError("flow maps are at different times");
  }
  double s = 0.0;
  for (std::size_t p = 0; p < a.x.size(); ++p) {
    const double dx = a.x[p] - b.x[p];
    const double dy = a.y[p] - b.y[p];
    s += dx * dx + dy * dy;
  }
  return std::sqrt(s / static_cast<double>(a.x.size()));
}

double measure_preservation_defect(const FlowMap& flow) {
  if (flow.m < 16) throw PreconditionError("measure preservation needs m >= 16");
  const int b = kMeasureBins;
  std::vector<double> mass(static_cast<std::size_t>(b) * b, 0.0);
  auto wrap = [b](long i) { return static_cast<std::size_t>(((i % b) + b) % b); };
  for (std::size_t p = 0; p < flow.x.size(); ++p) {
    // bin centres sit at (i + 1/2)/b
    const double sx = flow.x[p] * b - 0.5;
    const double sy = flow.y[p] * b - 0.5;
    const double fx = std::floor(sx), fy = std::floor(sy);
    const double ax = sx - fx, ay = sy - fy;
    const long ix = static_cast<long>(fx), iy = static_cast<long>(fy);
    mass[wrap(ix) * b + wrap(iy)] += (1 - ax) * (1 - ay);
    mass[wrap(ix + 1) * b + wrap(iy)] += ax * (1 - ay);
    mass[wrap(ix) * b + wrap(iy + 1)] += (1 - ax) * ay;
    mass[wrap(ix + 1) * b + wrap(iy + 1)] += ax * ay;
  }
  const double uniform = static_cast<double>(flow.x.size()) / mass.size();
  double worst = 0.0;
  for (double v : mass) worst = std::max(worst, std::abs(v / uniform - 1.0));
  return worst;
}

ScalarField pushforward_density(const ScalarField& rho0, const VelocityProvider& u, double t,
                                double dt, int threads) {
  const TorusGrid& g = rho0.grid();
  const int n = g.n();
  std::vector<double> x(g.size()), y(g.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      x[static_cast<std::size_t>(i) * n + j] = g.coord(i);
      y[static_cast<std::size_t>(i) * n + j] = g.coord(j);
    }
  }
  integrate(u, x, y, t, 0.0, dt, threads);
  std::vector<double> v(g.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = interpolate(rho0, x[p], y[p]);
  ScalarField out(g, std::move(v));
  const double shift = rho0.mean() - out.mean();
  if (shift == 0.0) return out;
  return out + ScalarField::constant(g, shift);
}

FlowMap inverse_flow(const VelocityProvider& u, int m, double t, double dt, int threads) {
  FlowMap out = FlowMap::identity(m, t);
  integrate(u, out.x, out.y, t, 0.0, dt, threads);
  return out;
}

double lipschitz_estimate(const FlowMap& map) {
  const int m = map.m;
  const double h = 1.0 / m;
  static constexpr int kNeighbours[3][2] = {{1, 0}, {0, 1}, {1, 1}};
  double best = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const std::size_t p = static_cast<std::size_t>(i) * m + j;
      for (const auto& d : kNeighbours) {
        const int i2 = i + d[0], j2 = j + d[1];
        // crossing the lattice edge shifts the unwrapped image by one period
        const double sx = i2 >= m ? 1.0 : 0.0;
        const double sy = j2 >= m ? 1.0 : 0.0;
        const std::size_t q = static_cast<std::size_t>(i2 % m) * m + (j2 % m);
        const double dx = map.x[q] + sx - map.x[p];
        const double dy = map.y[q] + sy - map.y[p];
        const double da = h * std::hypot(d[0], d[1]);
        best = std::max(best, std::hypot(dx, dy) / da);
      }
    }
  }
  return best;
}

void write_flow_map(std::ostream& os, const FlowMap& f) {
  nlohmann::ordered_json h;
  h["m"] = f.m;
  h["time"] = f.time;
  os << h.dump() << '\n';
  detail::write_doubles(os, f.x);
  detail::write_doubles(os, f.y);
  if (!os) throw IoError("failed writing flow map");
}

void write_flow_map(const std::filesystem::path& path, const FlowMap& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_flow_map(os, f);
}

FlowMap read_flow_map(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("missing flow map header");
  FlowMap f;
  try {
    auto j = nlohmann::json::parse(line);
    f.m = j.at("m").get<int>();
    f.time = j.at("time").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad flow map header: ") + e.what());
  }
  if (f.m <= 0) throw IoError("flow map header has m <= 0");
  const std::size_t count = static_cast<std::size_t>(f.m) * f.m;
  f.x = detail::read_doubles(is, count);
  f.y = detail::read_doubles(is, count);
  return f;
}

FlowMap read_flow_map(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_flow_map(is);
}

}  // namespace sglab
