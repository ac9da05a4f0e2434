#pragma once

// Time integration of Euler, SG^eps and the first-order corrector system by
// RK4 with an elliptic re-solve at every stage.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sglab/elliptic_ma.hpp"
#include "sglab/run_config.hpp"
#include "sglab/torus_spectral.hpp"

namespace sglab {

// rho/potential are (rhobar, phibar), (rho, psi) or (rho1, phi1). A corrector
// state carries the Euler state at the same time as its background, and the
// two are advanced together.
struct SimState {
  double time = 0.0;
  Model model = Model::Euler;
  double eps = 0.0;
  ScalarField rho;
  ScalarField potential;
  std::shared_ptr<const SimState> background;
};

// Solve the model's elliptic equation for rho. Corrector states need the
// background; it is used as given.
SimState make_state(Model model, double eps, ScalarField rho, double time = 0.0,
                    std::shared_ptr<const SimState> background = nullptr);

// Euler/SG: rho from the config; corrector: rho1 = 0 around the Euler state.
SimState initial_state(const RunConfig& config);

// -u . grad rho (dealiased) with u = perp_gradient(potential); for the
// corrector -ubar . grad rho1 - u1 . grad rhobar. Throws ConfigError when a
// corrector state has no background.
ScalarField rhs(const SimState& state);

// Largest dt allowed by cfl h / max(||u||_Linf, 1e-14). The corrector is
// limited by the background velocity that advects it.
double max_stable_dt(const SimState& state, double cfl);

// One RK4 step; throws StepSizeError when dt exceeds max_stable_dt.
SimState step_rk4(const SimState& state, double dt, double cfl = 0.5);

// Corrector transport defect of rho~ = rhobar + eps rho1 advected by
// psi~ = phibar + eps phi1 with time derivative supplied: d_t rho~ + u~ . grad rho~.
ScalarField transport_residual(const ScalarField& drho_dt, const ScalarField& rho,
                               const ScalarField& psi);

struct DiagnosticsRecord {
  double t = 0.0;
  double l2_rho = 0.0;
  double linf_rho = 0.0;
  double grad_linf_rho = 0.0;
  double h2_rho = 0.0;
  double h3_rho = 0.0;
  double hess_linf_psi = 0.0;
  double hess_l2_psi = 0.0;
  double calpha_rho = 0.0;
  double grad_margin = 0.0;
  double hessian_margin = 0.0;
  double log_estimate_ratio = 0.0;
  bool inside = true;
  // Filled by paired experiments.
  std::optional<double> velocity_gap;
  std::optional<double> flow_gap;
  std::optional<double> hminus1_gap;
  std::optional<double> w2;
  std::optional<double> a_t;
  std::optional<double> gronwall_bound;
};

// m0 = ||rho^0||_Linf of the run, used by the bootstrap log-estimate ratio.
DiagnosticsRecord diagnose(const SimState& state, double m0,
                           double alpha = kDefaultHolderAlpha);

struct Trajectory {
  RunConfig config;
  std::vector<SimState> states;  // at sample times
  std::vector<DiagnosticsRecord> diagnostics;
  std::vector<double> dt_history;
  // Every accepted step, t = 0 included, for time interpolation of velocities.
  std::vector<SimState> steps;
  std::string exit_reason = "completed";
  std::optional<double> exit_time;
  double m0 = 0.0;
};

// Integrates to t_final sampling every sample_interval. Steps use the largest
// CFL-admissible dt that does not overshoot the next sample. With stop_on_exit
// an SG run ends at the first step where eps ||grad rho||_Linf >= 1/4; the exit
// time is interpolated linearly inside that step. Library errors end the run
// with exit_reason set to their kind() and the partial trajectory kept.
Trajectory run_simulation(const RunConfig& config);

}  // namespace sglab
