#pragma once

// Quadratic Wasserstein distances between probability densities on the torus:
// debiased entropic OT on grids up to 64^2, exact network-simplex OT on small
// grids, displacement interpolation and the Gronwall bound for SG^eps against
// Euler.

#include <string>
#include <vector>

#include "sglab/torus_spectral.hpp"
#include "sglab/transport.hpp"

namespace sglab {

// Cell masses at the grid points (i h, j h), row-major with x outer.
struct DensityOnTorus {
  TorusGrid grid;
  std::vector<double> weights;
};

// Validates weights >= 0 with sum 1 to 1e-12 (PreconditionError otherwise).
DensityOnTorus make_density(TorusGrid grid, std::vector<double> weights);

// Normalized m = 1 + eps rho. PreconditionError when min m < 0.
DensityOnTorus physical_density(const ScalarField& rho, double eps);

// Block sums onto a target_n grid; target_n must divide the grid size.
DensityOnTorus downsample(const DensityOnTorus& d, int target_n);

// Squared geodesic distance on the unit torus.
double torus_sq_dist(double x0, double y0, double x1, double y1);

struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> c;  // row-major
  double operator()(int i, int j) const { return c[static_cast<std::size_t>(i) * cols + j]; }
};

// Cost between the grid points of a and b. ResourceError beyond 2^26 entries.
CostMatrix torus_cost(const TorusGrid& a, const TorusGrid& b);

enum class OTMethod { Sinkhorn, Exact };
std::string to_string(OTMethod m);

struct OTResult {
  double distance = 0.0;  // W2
  OTMethod method = OTMethod::Exact;
  double reg = 0.0;
  int iterations = 0;
  double marginal_error = 0.0;
};

struct SinkhornOptions {
  double reg = 5e-4;
  double tol = 1e-9;
  int max_iter = 20000;
  // densities on larger grids are block-averaged down to this size
  int max_grid = 64;
};

// sqrt of the Sinkhorn divergence OT(a,b) - OT(a,a)/2 - OT(b,b)/2. Each term
// is solved in the log domain with reg annealing; iterations is their total
// and marginal_error their maximum. ConvergenceError at the cap.
OTResult w2_sinkhorn(const DensityOnTorus& a, const DensityOnTorus& b,
                     const SinkhornOptions& options = {});

struct PlanEntry {
  int source;  // cell index in a
  int target;  // cell index in b
  double mass;
};

struct ExactOT {
  OTResult result;
  std::vector<PlanEntry> plan;
};

inline constexpr int kExactMaxGrid = 16;

// Network simplex on grids up to 16^2; ResourceError beyond.
ExactOT w2_exact_small(const DensityOnTorus& a, const DensityOnTorus& b);

// Moves every atom of the optimal plan a fraction theta - 1 along its torus
// geodesic and deposits it onto the grid with cloud-in-cell weights.
DensityOnTorus displacement_interpolation(const DensityOnTorus& a, const DensityOnTorus& b,
                                          double theta);

// int |grad^perp psi - grad^perp phibar|^2 (1 + eps rho) dx
double weighted_velocity_gap_sq(const SimState& sg, const SimState& euler);

struct GronwallPoint {
  double t = 0.0;
  double a_t = 0.0;        // int_0^t (1 + 2 |D^2 phibar|_Linf)
  double integrand = 0.0;  // weighted_velocity_gap_sq
  double bound = 0.0;      // B(t)
};

// B(t) = int_0^t exp(A(t) - A(s)) I(s) ds by the trapezoid rule on the sample
// times. AlignmentError unless the sample times and the initial densities
// agree.
std::vector<GronwallPoint> gronwall_w2_bound(const Trajectory& sg, const Trajectory& euler);

}  // namespace sglab
