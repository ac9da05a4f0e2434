#include "sglab/transport.hpp"

#include <algorithm>
#include <cmath>

#include "sglab/errors.hpp"

namespace sglab {

SimState make_state(Model model, double eps, ScalarField rho, double time,
                    std::shared_ptr<const SimState> background) {
  SimState s{time, model, model == Model::Euler ? 0.0 : eps, rho, rho, std::move(background)};
  switch (model) {
    case Model::Euler:
      s.potential = inv_laplacian(rho);
      break;
    case Model::SGeps:
      s.potential = solve_sg_potential(rho, eps).psi;
      break;
    case Model::Corrector:
      if (!s.background) throw ConfigError("corrector state needs an Euler background");
      s.potential = solve_corrector_potential(rho, s.background->potential);
      break;
  }
  return s;
}

SimState initial_state(const RunConfig& config) {
  const TorusGrid grid(config.n);
  ScalarField rho0 = subtract_mean(make_initial_density(config.initial_data, grid));
  if (config.model != Model::Corrector) return make_state(config.model, config.eps, rho0);
  auto bg = std::make_shared<const SimState>(make_state(Model::Euler, 0.0, rho0));
  return make_state(Model::Corrector, config.eps, ScalarField::zeros(grid), 0.0, bg);
}

namespace {

// u . grad f, with u = perp_gradient(psi), before dealiasing
ScalarField advect(const ScalarField& psi, const ScalarField& f) {
  const VectorField u = perp_gradient(psi);
  const VectorField g = gradient(f);
  return multiply(u.x, g.x) + multiply(u.y, g.y);
}

}  // namespace

ScalarField rhs(const SimState& state) {
  if (state.model != Model::Corrector) return -dealias(advect(state.potential, state.rho));
  if (!state.background) throw ConfigError("corrector state needs an Euler background");
  const SimState& bg = *state.background;
  return -dealias(advect(bg.potential, state.rho) + advect(state.potential, bg.rho));
}

double max_stable_dt(const SimState& state, double cfl) {
  const SimState& carrier = state.model == Model::Corrector ? *state.background : state;
  const double umax = vector_linf(perp_gradient(carrier.potential));
  return cfl * carrier.rho.grid().h() / std::max(umax, 1e-14);
}

namespace {

// RK4 over the prognostic fields: [rho] or, for the corrector, [rhobar, rho1].
std::vector<ScalarField> prognostic(const SimState& s) {
  if (s.model == Model::Corrector) return {s.background->rho, s.rho};
  return {s.rho};
}

SimState assemble(const SimState& like, const std::vector<ScalarField>& y, double time) {
  if (like.model == Model::Corrector) {
    auto bg = std::make_shared<const SimState>(make_state(Model::Euler, 0.0, y[0], time));
    return make_state(Model::Corrector, like.eps, y[1], time, bg);
  }
  return make_state(like.model, like.eps, y[0], time);
}

std::vector<ScalarField> derivative_of(const SimState& s) {
  if (s.model == Model::Corrector) return {rhs(*s.background), rhs(s)};
  return {rhs(s)};
}

std::vector<ScalarField> shifted(const std::vector<ScalarField>& y,
                                 const std::vector<ScalarField>& k, double h) {
  std::vector<ScalarField> out;
  out.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out.push_back(axpy(y[i], h, k[i]));
  return out;
}

}  // namespace

SimState step_rk4(const SimState& state, double dt, double cfl) {
  if (dt == 0.0) return state;
  const double limit = max_stable_dt(state, cfl);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) throw StepSizeError(dt, limit);

  const auto y = prognostic(state);
  const auto k1 = derivative_of(state);
  const auto k2 = derivative_of(assemble(state, shifted(y, k1, 0.5 * dt), state.time + 0.5 * dt));
  const auto k3 = derivative_of(assemble(state, shifted(y, k2, 0.5 * dt), state.time + 0.5 * dt));
  const auto k4 = derivative_of(assemble(state, shifted(y, k3, dt), state.time + dt));

  std::vector<ScalarField> next;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ScalarField incr = k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i];
    next.push_back(subtract_mean(axpy(y[i], dt / 6.0, incr)));
  }
  return assemble(state, next, state.time + dt);
}

ScalarField transport_residual(const ScalarField& drho_dt, const ScalarField& rho,
                               const ScalarField& psi) {
  return drho_dt + dealias(advect(psi, rho));
}

DiagnosticsRecord diagnose(const SimState& state, double m0, double alpha) {
  DiagnosticsRecord d;
  d.t = state.time;
  d.l2_rho = norm(state.rho, NormKind::L2());
  d.linf_rho = norm(state.rho, NormKind::Linf());
  d.grad_linf_rho = norm(state.rho, NormKind::GradLinf());
  d.h2_rho = norm(state.rho, NormKind::Hs(2));
  d.h3_rho = norm(state.rho, NormKind::Hs(3));
  const Hessian h = hessian(state.potential);
  d.hess_linf_psi = hessian_linf(h);
  d.hess_l2_psi = hessian_l2(h);
  d.calpha_rho = norm(state.rho, NormKind::Calpha(alpha));
  const double eps = state.model == Model::SGeps ? state.eps : 0.0;
  const BootstrapStatus b = bootstrap_status(state.rho, state.potential, eps, alpha, m0);
  d.grad_margin = b.grad_margin;
  d.hessian_margin = b.hessian_margin;
  d.log_estimate_ratio = b.log_estimate_ratio;
  d.inside = b.inside;
  return d;
}

Trajectory run_simulation(const RunConfig& config) {
  validate(config);
  Trajectory tr;
  tr.config = config;
  const bool watch_exit = config.stop_on_exit && config.model == Model::SGeps;
  try {
    SimState s = initial_state(config);
    const ScalarField& rho0 = s.model == Model::Corrector ? s.background->rho : s.rho;
    tr.m0 = norm(rho0, NormKind::Linf());
    const double m0 = tr.m0 > 0.0 ? tr.m0 : 1.0;
    auto sample = [&](const SimState& st) {
      tr.states.push_back(st);
      tr.diagnostics.push_back(diagnose(st, m0));
    };
    sample(s);
    tr.steps.push_back(s);
    double g_prev = config.eps * norm(s.rho, NormKind::GradLinf());
    if (watch_exit && g_prev >= 0.25) {
      tr.exit_reason = "bootstrap_exit";
      tr.exit_time = 0.0;
      return tr;
    }
    const double t_end = config.t_final;
    const double slack = 1e-12 * std::max(1.0, t_end);
    for (long k = 1;; ++k) {
      double target = k * config.sample_interval;
      const bool last = target >= t_end - slack;
      if (last) target = t_end;
      while (s.time < target - slack) {
        const double remaining = target - s.time;
        const double limit = max_stable_dt(s, config.cfl);
        const bool lands = remaining <= limit;
        const double dt = lands ? remaining : limit;
        SimState next = step_rk4(s, dt, config.cfl);
        if (lands) next.time = target;
        tr.dt_history.push_back(dt);
        tr.steps.push_back(next);
        if (watch_exit) {
          const double g = config.eps * norm(next.rho, NormKind::GradLinf());
          if (g >= 0.25) {
            const double frac = (0.25 - g_prev) / (g - g_prev);
            tr.exit_time = s.time + frac * (next.time - s.time);
            tr.exit_reason = "bootstrap_exit";
            sample(next);
            return tr;
          }
          g_prev = g;
        }
        s = std::move(next);
      }
      sample(s);
      if (last) break;
    }
  } catch (const Error& e) {
    tr.exit_reason = e.kind();
  }
  return tr;
}

}  // namespace sglab
