#pragma once

// Particle flow maps under computed velocities: flow gaps, measure
// preservation, backward characteristics and inverse flows.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sglab/torus_spectral.hpp"
#include "sglab/transport.hpp"

namespace sglab {

// Grid velocity as a function of time on a closed coverage interval.
class VelocityProvider {
 public:
  virtual ~VelocityProvider() = default;
  virtual double t_begin() const = 0;
  virtual double t_end() const = 0;
  // Throws CoverageError outside [t_begin, t_end].
  virtual VectorField at(double t) const = 0;

 protected:
  void require_covered(double t) const;
};

// The same field at every time in [t0, t1].
class FrozenVelocity : public VelocityProvider {
 public:
  FrozenVelocity(VectorField u, double t0, double t1);
  double t_begin() const override { return t0_; }
  double t_end() const override { return t1_; }
  VectorField at(double t) const override;

 private:
  VectorField u_;
  double t0_, t1_;
};

// perp_gradient of the trajectory potential, interpolated in time by cubic
// Lagrange polynomials through the four nearest recorded steps.
class TrajectoryVelocity : public VelocityProvider {
 public:
  explicit TrajectoryVelocity(const Trajectory& tr);
  double t_begin() const override { return times_.front(); }
  double t_end() const override { return times_.back(); }
  VectorField at(double t) const override;
  ScalarField potential_at(double t) const;

 private:
  std::vector<double> times_;
  std::vector<ScalarField> potentials_;
};

// Labels on an m x m lattice of cell centres; positions live in the covering
// plane and are never reduced mod 1.
struct FlowMap {
  int m = 0;
  double time = 0.0;
  std::vector<double> x;  // row-major, label index i (x) outer
  std::vector<double> y;

  static FlowMap identity(int m, double time = 0.0);
  double label(int i) const { return (i + 0.5) / m; }
};

// Tensor-product 4-point Lagrange interpolation of a periodic grid field at an
// arbitrary point of the plane. Fourth order for smooth fields.
double interpolate(const ScalarField& f, double x, double y);

// RK4 from t0 to t1 (t1 < t0 integrates backwards) with steps no longer than
// |dt|. Throws CoverageError if the provider does not cover [t0, t1].
FlowMap advect_flow(const VelocityProvider& u, const FlowMap& labels, double t0, double t1,
                    double dt, int threads = 1);

// RMS over labels of unwrapped position differences. ShapeError unless both
// maps share m and time.
double flow_gap(const FlowMap& a, const FlowMap& b);

inline constexpr int kMeasureBins = 8;

// Cloud-in-cell deposit of unit-mass particles onto a fixed 8 x 8 grid of
// bins; returns max |bin mass / uniform mass - 1|. A lattice of m labels per
// axis (m a multiple of 8) deposits exactly uniformly under any translation.
// Needs m >= 16.
double measure_preservation_defect(const FlowMap& flow);

// rho(t, x) = rho0(X^{-1}(t, x)) on the grid of rho0, by integrating
// characteristics from every grid point back to time 0. The result is shifted
// to the mean of rho0.
ScalarField pushforward_density(const ScalarField& rho0, const VelocityProvider& u, double t,
                                double dt, int threads = 1);

// X^{-1}(t, .) evaluated at the m x m labels (backward characteristics).
FlowMap inverse_flow(const VelocityProvider& u, int m, double t, double dt, int threads = 1);

// Largest finite-difference ratio |Y(a) - Y(b)| / |a - b| over lattice
// neighbours (axis and diagonal), periodic wrap accounted for.
double lipschitz_estimate(const FlowMap& map);

void write_flow_map(std::ostream& os, const FlowMap& f);
void write_flow_map(const std::filesystem::path& path, const FlowMap& f);
FlowMap read_flow_map(std::istream& is);
FlowMap read_flow_map(const std::filesystem::path& path);

}  // namespace sglab
