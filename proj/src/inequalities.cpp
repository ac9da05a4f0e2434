#include "sglab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <random>

#include "parallel.hpp"
#include "sglab/elliptic_ma.hpp"
#include "sglab/errors.hpp"
#include "sglab/lagrangian.hpp"
#include "sglab/random_fields.hpp"

namespace sglab {

namespace {

class Digest {
 public:
  void bytes(const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void text(const std::string& s) { bytes(s.data(), s.size()); }
  void number(double v) { bytes(&v, sizeof v); }
  void field(const ScalarField& f) {
    const int n = f.n();
    bytes(&n, sizeof n);
    bytes(f.values().data(), f.values().size() * sizeof(double));
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

CheckResult make_result(std::string name, double ratio, double bound, double tol, bool exact,
                        const Digest& d) {
  CheckResult r;
  r.name = std::move(name);
  r.ratio = ratio;
  r.bound = bound;
  r.tolerance = tol;
  r.exact = exact;
  r.pass = std::isfinite(ratio) && ratio <= bound + tol;
  r.digest = d.hex();
  return r;
}

double hminus1(const ScalarField& f) { return norm(subtract_mean(f), NormKind::Hminus1()); }
double hs(const ScalarField& f, double s) { return norm(subtract_mean(f), NormKind::Hs(s)); }

void require_nonzero(const ScalarField& f, const char* what) {
  if (norm(f, NormKind::Linf()) == 0.0) throw DegenerateInputError(std::string(what) + " is zero");
}

// Zero-pad the spectrum of f onto the 2n grid. The Nyquist row and column
// are dropped so the padded spectrum stays Hermitian.
ScalarField refine(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  const int n = g.n();
  const TorusGrid fine(2 * n);
  Spectrum s(fine.spectral_size(), Complex(0.0, 0.0));
  const Spectrum& c = f.spectrum();
  for (int i = 0; i < n; ++i) {
    const int p = g.freq(i);
    if (p == -n / 2) continue;
    const int row = p >= 0 ? p : p + 2 * n;
    for (int j = 0; j < n / 2; ++j) {
      s[static_cast<std::size_t>(row) * fine.spectral_cols() + j] =
          4.0 * c[static_cast<std::size_t>(i) * g.spectral_cols() + j];
    }
  }
  return ScalarField::from_spectrum(fine, std::move(s));
}

// Grid-pointwise determinant of a Hessian.
std::vector<double> pointwise_det(const Hessian& h) {
  const auto xx = h.xx.values(), xy = h.xy.values(), yy = h.yy.values();
  std::vector<double> d(xx.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = xx[k] * yy[k] - xy[k] * xy[k];
  return d;
}

double grid_l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

double hessian_grid_l2(const Hessian& h) {
  const auto xx = h.xx.values(), xy = h.xy.values(), yy = h.yy.values();
  double s = 0.0;
  for (std::size_t k = 0; k < xx.size(); ++k) s += xx[k] * xx[k] + 2 * xy[k] * xy[k] + yy[k] * yy[k];
  return std::sqrt(s / static_cast<double>(xx.size()));
}

// -u . grad sigma, dealiased
ScalarField advect_rhs(const VectorField& u, const ScalarField& sigma) {
  const VectorField g = gradient(sigma);
  return -(dealiased_product(u.x, g.x) + dealiased_product(u.y, g.y));
}

// Classical RK4 for sigma_t = -u(t) . grad sigma + f from times[0] through
// every later entry of times.
ScalarField transport_rk4(ScalarField sigma, const std::function<VectorField(double)>& u,
                          const ScalarField* forcing, const std::vector<double>& times) {
  auto rhs = [&](double t, const ScalarField& s) {
    ScalarField r = advect_rhs(u(t), s);
    if (forcing) r += *forcing;
    return r;
  };
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double t = times[k - 1], dt = times[k] - t;
    const ScalarField k1 = rhs(t, sigma);
    const ScalarField k2 = rhs(t + 0.5 * dt, axpy(sigma, 0.5 * dt, k1));
    const ScalarField k3 = rhs(t + 0.5 * dt, axpy(sigma, 0.5 * dt, k2));
    const ScalarField k4 = rhs(t + dt, axpy(sigma, dt, k3));
    sigma = axpy(sigma, dt / 6.0, k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return sigma;
}

// Cumulative trapezoid of g over the recorded steps.
struct Cumulative {
  std::vector<double> t, value;

  double at(double time) const {
    if (time <= t.front()) return 0.0;
    auto it = std::lower_bound(t.begin(), t.end(), time);
    if (it == t.end()) throw CoverageError("time beyond the recorded steps");
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    if (*it == time) return value[k];
    const double w = (time - t[k - 1]) / (t[k] - t[k - 1]);
    return (1 - w) * value[k - 1] + w * value[k];
  }
};

Cumulative integrate_steps(const Trajectory& tr, const std::function<double(const SimState&)>& g) {
  if (tr.steps.empty()) throw SamplingError("trajectory has no recorded steps");
  Cumulative c;
  double prev = g(tr.steps.front()), acc = 0.0;
  c.t.push_back(tr.steps.front().time);
  c.value.push_back(0.0);
  for (std::size_t k = 1; k < tr.steps.size(); ++k) {
    const double cur = g(tr.steps[k]);
    acc += 0.5 * (tr.steps[k].time - tr.steps[k - 1].time) * (prev + cur);
    prev = cur;
    c.t.push_back(tr.steps[k].time);
    c.value.push_back(acc);
  }
  return c;
}

double hess_linf(const SimState& s) { return hessian_linf(hessian(s.potential)); }
double grad_linf(const SimState& s) { return norm(s.rho, NormKind::GradLinf()); }

void require_samples(const Trajectory& tr, std::size_t min) {
  if (tr.states.size() < min) {
    throw SamplingError("trajectory has " + std::to_string(tr.states.size()) +
                        " samples, need " + std::to_string(min));
  }
}

void digest_trajectory(Digest& d, const Trajectory& tr) {
  d.number(tr.config.eps);
  d.number(static_cast<double>(tr.steps.size()));
  if (!tr.states.empty()) d.field(tr.states.front().rho);
  if (!tr.states.empty()) d.field(tr.states.back().rho);
}

void require_aligned(const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size()) throw AlignmentError("sample counts differ");
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    if (std::abs(a.states[k].time - b.states[k].time) > 1e-12) {
      throw AlignmentError("sample times differ at index " + std::to_string(k));
    }
  }
}

}  // namespace

ScalarField exact_hessian_det(const ScalarField& psi) {
  const ScalarField fine = refine(psi);
  return ScalarField(fine.grid(), pointwise_det(hessian(fine)));
}

CheckResult check_wente(const ScalarField& psi) {
  Digest d;
  d.text("wente");
  d.field(psi);
  const double den = hessian_l2(hessian(psi));
  if (den == 0.0) throw DegenerateInputError("psi has zero Hessian");
  const double num = hminus1(exact_hessian_det(psi));
  return make_result("wente", num / (den * den), 1.0, 0.0, false, d);
}

CheckResult check_wente_closed_form(int n) {
  const ScalarField psi = ScalarField::from_function(
      TorusGrid(n), [](double x, double y) { return std::cos(kTwoPi * x) * std::cos(kTwoPi * y); });
  CheckResult w = check_wente(psi);
  const double expected = 1.0 / (8.0 * kPi);
  Digest d;
  d.text("wente_closed_form");
  d.field(psi);
  return make_result("wente_closed_form", std::abs(w.ratio - expected) / expected, 0.0,
                     kExactTolerance, true, d);
}

CheckResult check_endpoint_cz(const ScalarField& f, double alpha, double c_alpha) {
  require_nonzero(f, "f");
  if (!is_mean_zero(f)) throw MeanViolationError(f.mean(), 1e-10 * norm(f, NormKind::L2()));
  Digest d;
  d.text("endpoint_cz");
  d.field(f);
  d.number(alpha);
  const double lhs = hessian_linf(hessian(inv_laplacian(f)));
  const double sup = norm(f, NormKind::Linf());
  const double calpha = norm(f, NormKind::Calpha(alpha));
  const double rhs = sup * (1.0 + std::max(0.0, std::log(calpha / sup)));
  return make_result("endpoint_cz", lhs / rhs, c_alpha, 0.0, false, d);
}

CheckResult check_h1_interp(const ScalarField& g) {
  require_nonzero(g, "g");
  Digest d;
  d.text("h1_interp");
  d.field(g);
  const double l2 = hs(g, 0.0);
  // the spectral Cauchy-Schwarz identity is exact up to summation rounding
  return make_result("h1_interp", l2 * l2 / (hminus1(g) * hs(g, 1.0)), 1.0, 1e-12, true, d);
}

CheckResult check_sobolev_interp(const ScalarField& f, int m) {
  if (m < 2) throw ConfigError("sobolev interpolation needs m >= 2");
  require_nonzero(f, "f");
  Digest d;
  d.text("sobolev_interp");
  d.field(f);
  d.number(m);
  const double theta = (m - 1.0) / (m + 1.0);
  const double ratio =
      hs(f, 1.0) / (std::pow(hminus1(f), theta) * std::pow(hs(f, m), 1.0 - theta));
  return make_result("sobolev_interp_m" + std::to_string(m), ratio, 1.0, kExactTolerance, true, d);
}

CheckResult check_det_expansion(const ScalarField& phi, const ScalarField& eta, double eps) {
  Digest d;
  d.text("det_expansion");
  d.field(phi);
  d.field(eta);
  d.number(eps);
  const double scale = norm(hessian_det(axpy(phi, eps, eta)), NormKind::L2());
  if (scale == 0.0) throw DegenerateInputError("det D^2(phi + eps eta) vanishes");
  return make_result("det_expansion", det_expansion_residual(phi, eta, eps) / scale, 0.0,
                     kExactTolerance, true, d);
}

CheckResult check_det_lip(const ScalarField& f, const ScalarField& g) {
  Digest d;
  d.text("det_lip");
  d.field(f);
  d.field(g);
  const Hessian hf = hessian(f), hg = hessian(g), hd = hessian(f - g);
  const std::vector<double> df = pointwise_det(hf), dg = pointwise_det(hg);
  std::vector<double> diff(df.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = df[k] - dg[k];
  const double den = (hessian_linf(hf) + hessian_linf(hg)) * hessian_grid_l2(hd);
  if (den == 0.0) throw DegenerateInputError("det_lip needs f != g with nonzero Hessians");
  return make_result("det_lip", grid_l2(diff) / den, kDetLipConstant, 1e-12, false, d);
}

CheckResult check_forced_transport(const ScalarField& psi, const ScalarField& sigma0,
                                   const ScalarField& forcing, double t, int steps,
                                   ForcedBound bound) {
  if (!(t > 0.0) || steps < 1) throw ConfigError("forced transport needs t > 0 and steps >= 1");
  if (!(psi.grid() == sigma0.grid()) || !(psi.grid() == forcing.grid())) {
    throw ShapeError("forced transport fields live on different grids");
  }
  const double f_norm = hminus1(forcing);
  Digest d;
  d.text("forced_transport");
  d.field(psi);
  d.field(sigma0);
  d.field(forcing);
  d.number(t);
  d.number(steps);
  const VectorField u = perp_gradient(psi);
  const bool still = vector_linf(u) == 0.0;
  std::vector<double> times(steps + 1);
  for (int k = 0; k <= steps; ++k) times[k] = t * k / steps;
  auto vel = [&u](double) { return u; };
  const ScalarField forced = transport_rk4(sigma0, vel, &forcing, times);
  const ScalarField free = transport_rk4(sigma0, vel, nullptr, times);
  const double defect = hminus1(forced - free);
  if (f_norm == 0.0) {
    // no forcing: the defect must vanish, ratio 0 stands for 0/0
    const double ratio = defect == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return make_result(still ? "forced_transport_zero" : "forced_transport", ratio, 1.0,
                       kExactTolerance, still, d);
  }
  if (still) {
    return make_result("forced_transport_zero", defect / (t * f_norm), 1.0, kExactTolerance, true, d);
  }
  if (bound == ForcedBound::Plain) {
    return make_result("forced_transport", defect / (t * f_norm), 1.0, kNumericalSlack, false, d);
  }
  // int_0^t e^{M (t - s)} ds ||f||
  const double m = hessian_linf(hessian(psi));
  const double rhs = f_norm * std::expm1(m * t) / m;
  return make_result("forced_transport_gronwall", defect / rhs, 1.0, kNumericalSlack, false, d);
}

namespace {

struct FrozenPairData {
  FlowMap x1, x2;
  double gap = 0.0;
};

FrozenPairData frozen_pair(const FrozenFlowPair& p, const FrozenVelocity& u1,
                           const FrozenVelocity& u2) {
  const FlowMap id = FlowMap::identity(p.labels, 0.0);
  FrozenPairData out{advect_flow(u1, id, 0.0, p.t, p.dt), advect_flow(u2, id, 0.0, p.t, p.dt)};
  out.gap = flow_gap(out.x1, out.x2);
  if (out.gap == 0.0) throw DegenerateInputError("the two flows coincide");
  return out;
}

void digest_pair(Digest& d, const FrozenFlowPair& p) {
  d.field(p.psi1);
  d.field(p.psi2);
  d.number(p.t);
  d.number(p.labels);
  d.number(p.dt);
}

}  // namespace

CheckResult check_flow_hminus1(const ScalarField& rho0, const FrozenFlowPair& p) {
  Digest d;
  d.text("flow_hminus1");
  d.field(rho0);
  digest_pair(d, p);
  const FrozenVelocity u1(perp_gradient(p.psi1), 0.0, p.t), u2(perp_gradient(p.psi2), 0.0, p.t);
  const FrozenPairData f = frozen_pair(p, u1, u2);
  const ScalarField r1 = pushforward_density(rho0, u1, p.t, p.dt);
  const ScalarField r2 = pushforward_density(rho0, u2, p.t, p.dt);
  const double rhs = std::sqrt(2.0) * norm(rho0, NormKind::Linf()) * f.gap;
  return make_result("flow_hminus1", hminus1(r1 - r2) / rhs, 1.0, kNumericalSlack, false, d);
}

CheckResult check_inv_gap(const FrozenFlowPair& p) {
  Digest d;
  d.text("inv_gap");
  digest_pair(d, p);
  const FrozenVelocity u1(perp_gradient(p.psi1), 0.0, p.t), u2(perp_gradient(p.psi2), 0.0, p.t);
  const FrozenPairData f = frozen_pair(p, u1, u2);
  const FlowMap y1 = inverse_flow(u1, p.labels, p.t, p.dt);
  const FlowMap y2 = inverse_flow(u2, p.labels, p.t, p.dt);
  const double ratio = flow_gap(y1, y2) / (lipschitz_estimate(y1) * f.gap);
  return make_result("inv_gap", ratio, 1.0, kNumericalSlack, false, d);
}

CheckResult check_density_stability(const ScalarField& rho0, const FrozenFlowPair& p) {
  Digest d;
  d.text("density_stability");
  d.field(rho0);
  digest_pair(d, p);
  const FrozenVelocity u1(perp_gradient(p.psi1), 0.0, p.t), u2(perp_gradient(p.psi2), 0.0, p.t);
  const FrozenPairData f = frozen_pair(p, u1, u2);
  const ScalarField r1 = pushforward_density(rho0, u1, p.t, p.dt);
  const ScalarField r2 = pushforward_density(rho0, u2, p.t, p.dt);
  const double m = std::max(hessian_linf(hessian(p.psi1)), hessian_linf(hessian(p.psi2)));
  const double rhs = norm(rho0, NormKind::GradLinf()) * std::exp(m * p.t) * f.gap;
  return make_result("density_stability", norm(r1 - r2, NormKind::L2()) / rhs, 1.0,
                     kNumericalSlack, false, d);
}

CheckResult check_hm_transport(const Trajectory& tr, int m) {
  if (m != 2 && m != 3) throw ConfigError("hm_transport supports m = 2 or 3");
  require_samples(tr, 10);
  Digest d;
  d.text("hm_transport");
  d.number(m);
  digest_trajectory(d, tr);
  const Cumulative lip =
      integrate_steps(tr, [](const SimState& s) { return hess_linf(s) + grad_linf(s); });
  const double h0 = hs(tr.states.front().rho, m);
  if (h0 == 0.0) throw DegenerateInputError("rho0 has zero H^m norm");
  double worst = 0.0;
  for (const auto& s : tr.states) {
    worst = std::max(worst, hs(s.rho, m) / (h0 * std::exp(lip.at(s.time))));
  }
  return make_result("hm_transport_m" + std::to_string(m), worst, 1.0, kNumericalSlack, false, d);
}

CheckResult check_grad_ode(const Trajectory& tr) {
  require_samples(tr, 2);
  Digest d;
  d.text("grad_ode");
  digest_trajectory(d, tr);
  const Cumulative lip = integrate_steps(tr, hess_linf);
  const double g0 = grad_linf(tr.states.front());
  if (g0 == 0.0) throw DegenerateInputError("rho0 is constant");
  double worst = 0.0;
  for (const auto& s : tr.states) {
    worst = std::max(worst, grad_linf(s) / (g0 * std::exp(lip.at(s.time))));
  }
  return make_result("grad_ode", worst, 1.0, 1e-3, false, d);
}

CheckResult check_h1_growth(const Trajectory& tr) {
  require_samples(tr, 2);
  Digest d;
  d.text("h1_growth");
  digest_trajectory(d, tr);
  const Cumulative lip = integrate_steps(tr, hess_linf);
  const double h0 = hs(tr.states.front().rho, 1.0);
  if (h0 == 0.0) throw DegenerateInputError("rho0 is constant");
  double worst = 0.0;
  for (const auto& s : tr.states) {
    worst = std::max(worst, hs(s.rho, 1.0) / ((1.0 + std::exp(lip.at(s.time))) * h0));
  }
  return make_result("h1_growth", worst, 1.0, kNumericalSlack, false, d);
}

CheckResult check_l2_hessian(const Trajectory& sg) {
  require_samples(sg, 2);
  Digest d;
  d.text("l2_hessian");
  digest_trajectory(d, sg);
  const double r0 = norm(sg.states.front().rho, NormKind::L2());
  if (r0 == 0.0) throw DegenerateInputError("rho0 is zero");
  double worst = 0.0;
  for (const auto& s : sg.states) worst = std::max(worst, hessian_l2(hessian(s.potential)));
  return make_result("l2_hessian", worst / (2.0 * r0), 1.0, kNumericalSlack, false, d);
}

PairedFlows paired_flows(const Trajectory& euler, const Trajectory& sg, int labels, double dt) {
  require_aligned(euler, sg);
  const TrajectoryVelocity ue(euler), us(sg);
  PairedFlows out;
  FlowMap x1 = FlowMap::identity(labels, euler.states.front().time), x2 = x1;
  for (std::size_t k = 0; k < euler.states.size(); ++k) {
    const double t = euler.states[k].time;
    if (k > 0) {
      x1 = advect_flow(ue, x1, x1.time, t, dt);
      x2 = advect_flow(us, x2, x2.time, t, dt);
      // both maps carry the same time for flow_gap
      x2.time = x1.time;
    }
    out.times.push_back(t);
    out.flow_gap.push_back(flow_gap(x1, x2));
  }
  return out;
}

namespace {

void require_flows(const Trajectory& euler, const Trajectory& sg, const PairedFlows& flows) {
  require_aligned(euler, sg);
  if (flows.times.size() != euler.states.size()) throw AlignmentError("flow samples differ");
}

double rho0_linf(const Trajectory& euler, const Trajectory& sg) {
  const double a = norm(euler.states.front().rho, NormKind::Linf());
  const double b = norm(sg.states.front().rho, NormKind::Linf());
  if (a != b) throw AlignmentError("trajectories start from different densities");
  return a;
}

double wente_ratio(const ScalarField& psi) {
  const double h = hessian_l2(hessian(psi));
  return h == 0.0 ? 0.0 : hminus1(exact_hessian_det(psi)) / (h * h);
}

}  // namespace

CheckResult check_flow_hminus1_pair(const Trajectory& euler, const Trajectory& sg,
                                    const PairedFlows& flows) {
  require_flows(euler, sg, flows);
  Digest d;
  d.text("flow_hminus1_pair");
  digest_trajectory(d, euler);
  digest_trajectory(d, sg);
  const double c = std::sqrt(2.0) * rho0_linf(euler, sg);
  double worst = 0.0;
  for (std::size_t k = 1; k < flows.times.size(); ++k) {
    if (flows.flow_gap[k] == 0.0) continue;
    const double lhs = hminus1(euler.states[k].rho - sg.states[k].rho);
    worst = std::max(worst, lhs / (c * flows.flow_gap[k]));
  }
  return make_result("flow_hminus1_pair", worst, 1.0, kNumericalSlack, false, d);
}

CheckResult check_vel_gap(const Trajectory& euler, const Trajectory& sg, const PairedFlows& flows) {
  require_flows(euler, sg, flows);
  Digest d;
  d.text("vel_gap");
  digest_trajectory(d, euler);
  digest_trajectory(d, sg);
  const double c = std::sqrt(2.0) * rho0_linf(euler, sg);
  const double eps = sg.states.front().eps;
  double worst = 0.0;
  for (std::size_t k = 1; k < flows.times.size(); ++k) {
    const VectorField gap = gradient(euler.states[k].potential - sg.states[k].potential);
    const double lhs = vector_l2(gap);
    const ScalarField& psi = sg.states[k].potential;
    const double h = hessian_l2(hessian(psi));
    const double rhs = c * flows.flow_gap[k] + wente_ratio(psi) * eps * h * h;
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
  }
  return make_result("vel_gap", worst, 1.0, kNumericalSlack, false, d);
}

CheckResult check_flow_gap_gronwall(const Trajectory& euler, const Trajectory& sg,
                                    const PairedFlows& flows) {
  require_flows(euler, sg, flows);
  Digest d;
  d.text("flow_gap_gronwall");
  digest_trajectory(d, euler);
  digest_trajectory(d, sg);
  const double c = std::sqrt(2.0) * rho0_linf(euler, sg);
  const double eps = sg.states.front().eps;
  double c_w = 0.0;
  for (const auto& s : sg.steps) c_w = std::max(c_w, wente_ratio(s.potential));
  const Cumulative growth = integrate_steps(euler, [c](const SimState& s) { return hess_linf(s) + c; });
  const Cumulative forcing = integrate_steps(sg, [](const SimState& s) {
    const double h = hessian_l2(hessian(s.potential));
    return h * h;
  });
  double worst = 0.0;
  for (std::size_t k = 1; k < flows.times.size(); ++k) {
    const double t = flows.times[k];
    const double rhs = std::exp(growth.at(t)) * (flows.flow_gap.front() + c_w * eps * forcing.at(t));
    if (rhs > 0.0) worst = std::max(worst, flows.flow_gap[k] / rhs);
  }
  return make_result("flow_gap_gronwall", worst, 1.0, kNumericalSlack, false, d);
}

CheckResult check_corrector_forcing(const Trajectory& corrector, double eps, ForcedBound bound) {
  require_samples(corrector, 2);
  if (corrector.steps.front().model != Model::Corrector) {
    throw ConfigError("corrector forcing needs a corrector trajectory");
  }
  Digest d;
  d.text("corrector_forcing");
  d.number(eps);
  digest_trajectory(d, corrector);
  auto tilde_rho = [eps](const SimState& s) { return axpy(s.background->rho, eps, s.rho); };
  // velocity of psi~ = phibar + eps phi1, interpolated in time like any run
  Trajectory tilde;
  std::vector<double> times, f_norm, stretch;
  for (const auto& s : corrector.steps) {
    tilde.steps.push_back(SimState{s.time, Model::Euler, 0.0, tilde_rho(s),
                                   axpy(s.background->potential, eps, s.potential), nullptr});
    times.push_back(s.time);
    const VectorField u1 = perp_gradient(s.potential);
    const VectorField g = gradient(s.rho);
    f_norm.push_back(eps * eps *
                     hminus1(dealiased_product(u1.x, g.x) + dealiased_product(u1.y, g.y)));
    stretch.push_back(bound == ForcedBound::Plain ? 0.0 : hess_linf(tilde.steps.back()));
  }
  // B(t_j) = int_0^{t_j} e^{L(t_j) - L(s)} ||f(s)|| ds with L the integral of
  // ||D^2 psi~||_Linf (L = 0 for the plain bound), trapezoid on the steps
  std::vector<double> rhs(times.size(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    const double grow = std::exp(0.5 * dt * (stretch[k - 1] + stretch[k]));
    acc = grow * (acc + 0.5 * dt * f_norm[k - 1]) + 0.5 * dt * f_norm[k];
    rhs[k] = acc;
  }
  const TrajectoryVelocity u(tilde);
  double worst = 0.0;
  ScalarField sigma = tilde.steps.front().rho;
  std::size_t step = 0;
  for (std::size_t k = 1; k < corrector.states.size(); ++k) {
    const double t = corrector.states[k].time;
    std::vector<double> span{times[step]};
    while (step + 1 < times.size() && times[step + 1] <= t) span.push_back(times[++step]);
    if (times[step] != t) throw AlignmentError("sample time is not a recorded step");
    sigma = transport_rk4(sigma, [&u](double s) { return u.at(s); },
                          nullptr, span);
    if (rhs[step] > 0.0) {
      worst = std::max(worst, hminus1(tilde_rho(corrector.states[k]) - sigma) / rhs[step]);
    }
  }
  const std::string name =
      bound == ForcedBound::Plain ? "corrector_forcing" : "corrector_forcing_gronwall";
  return make_result(name, worst, 1.0, kNumericalSlack, false, d);
}

bool is_exact_check(const std::string& name) {
  return name == "h1_interp" || name == "sobolev_interp_m2" || name == "sobolev_interp_m3" ||
         name == "det_expansion" || name == "forced_transport_zero" || name == "wente_closed_form";
}

namespace {

enum Stream : std::uint64_t {
  kWente = 1,
  kEndpoint,
  kH1Interp,
  kSobolev2,
  kSobolev3,
  kDetExpansion,
  kDetLip,
  kForcedZero,
  kForced,
  kFlows,
  kTrajectory,
};

using Task = std::function<std::vector<CheckResult>()>;

// Run a checker, turning library errors into a failed result.
CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    CheckResult r;
    r.name = name;
    r.error = e.kind() + ": " + e.what();
    return r;
  } catch (const std::exception& e) {
    CheckResult r;
    r.name = name;
    r.error = e.what();
    return r;
  }
}

ScalarField sample(const TorusGrid& g, std::mt19937_64& rng, double gamma, int kmax, double l2) {
  return random_field(g, RandomFieldSpec{gamma, kmax, l2}, rng);
}

double gamma_for(int index) { return 2.0 + index % 3; }

// Low-mode datum for the trajectory checks, L2 norm 1.
InitialData random_datum(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  InitialData data;
  data.preset.clear();
  double sq = 0.0;
  for (int p = 0; p <= 3; ++p) {
    for (int q = -3; q <= 3; ++q) {
      if (p == 0 && q <= 0) continue;
      const double w = std::pow(std::hypot(p, q), -2.0);
      FourierTerm t{p, q, w * gauss(rng), w * gauss(rng)};
      sq += 0.5 * (t.a * t.a + t.b * t.b);
      data.terms.push_back(t);
    }
  }
  const double s = 1.0 / std::sqrt(sq);
  for (auto& t : data.terms) {
    t.a *= s;
    t.b *= s;
  }
  return data;
}

std::vector<CheckResult> trajectory_checks(std::uint64_t seed, int n) {
  std::mt19937_64 rng(derive_seed(seed, kTrajectory, 0));
  RunConfig base;
  base.n = n;
  base.t_final = 0.5;
  base.sample_interval = 0.05;
  // at cfl 0.5 the coarse steps put O(dt^4) transport error on par with the
  // O(eps^2) corrector defect
  base.cfl = 0.2;
  base.initial_data = random_datum(rng);
  base.seed = seed;
  RunConfig ec = base, sc = base, cc = base;
  ec.model = Model::Euler;
  sc.model = Model::SGeps;
  sc.eps = 0.02;
  cc.model = Model::Corrector;
  cc.eps = 0.02;
  const Trajectory euler = run_simulation(ec);
  const Trajectory sg = run_simulation(sc);
  const Trajectory corr = run_simulation(cc);

  std::vector<CheckResult> out;
  auto add = [&](const std::string& name, int index, const std::function<CheckResult()>& body) {
    CheckResult r = guarded(name, body);
    r.index = index;
    out.push_back(std::move(r));
  };
  auto completed = [](const Trajectory& tr) {
    if (tr.exit_reason != "completed") throw SamplingError("run ended early: " + tr.exit_reason);
  };
  const Trajectory* runs[] = {&euler, &sg};
  for (int i = 0; i < 2; ++i) {
    const Trajectory& tr = *runs[i];
    add("hm_transport_m2", i, [&] { completed(tr); return check_hm_transport(tr, 2); });
    add("hm_transport_m3", i, [&] { completed(tr); return check_hm_transport(tr, 3); });
    add("grad_ode", i, [&] { completed(tr); return check_grad_ode(tr); });
    add("h1_growth", i, [&] { completed(tr); return check_h1_growth(tr); });
  }
  add("l2_hessian", 0, [&] { completed(sg); return check_l2_hessian(sg); });
  PairedFlows flows;
  bool have_flows = false;
  add("flow_hminus1_pair", 0, [&] {
    completed(euler);
    completed(sg);
    flows = paired_flows(euler, sg, n / 2, 0.01);
    have_flows = true;
    return check_flow_hminus1_pair(euler, sg, flows);
  });
  add("vel_gap", 0, [&] {
    if (!have_flows) throw SamplingError("paired flows unavailable");
    return check_vel_gap(euler, sg, flows);
  });
  add("flow_gap_gronwall", 0, [&] {
    if (!have_flows) throw SamplingError("paired flows unavailable");
    return check_flow_gap_gronwall(euler, sg, flows);
  });
  add("corrector_forcing", 0, [&] { completed(corr); return check_corrector_forcing(corr, 0.02); });
  add("corrector_forcing_gronwall", 0, [&] {
    completed(corr);
    return check_corrector_forcing(corr, 0.02, ForcedBound::Gronwall);
  });
  return out;
}

}  // namespace

std::vector<CheckResult> run_suite(std::uint64_t seed, int count, const SuiteOptions& opt) {
  if (count < 1) throw ConfigError("count must be >= 1");
  const TorusGrid grid(opt.n);
  const int n = opt.n;
  std::vector<Task> tasks;

  auto per_sample = [&](const std::string& name, Stream stream,
                        std::function<CheckResult(std::mt19937_64&, int)> body) {
    for (int i = 0; i < count; ++i) {
      tasks.push_back([=] {
        std::mt19937_64 rng(derive_seed(seed, stream, i));
        CheckResult r = guarded(name, [&] { return body(rng, i); });
        r.index = i;
        return std::vector<CheckResult>{r};
      });
    }
  };

  tasks.push_back([n] { return std::vector<CheckResult>{guarded("wente_closed_form", [n] {
                          return check_wente_closed_form(n);
                        })}; });
  per_sample("wente", kWente, [grid](std::mt19937_64& rng, int i) {
    return check_wente(sample(grid, rng, gamma_for(i), 0, 1.0));
  });
  per_sample("endpoint_cz", kEndpoint, [grid, opt](std::mt19937_64& rng, int i) {
    return check_endpoint_cz(sample(grid, rng, gamma_for(i), 0, 1.0), opt.alpha, opt.c_alpha);
  });
  per_sample("h1_interp", kH1Interp, [grid](std::mt19937_64& rng, int i) {
    return check_h1_interp(sample(grid, rng, gamma_for(i), 0, 1.0));
  });
  per_sample("sobolev_interp_m2", kSobolev2, [grid](std::mt19937_64& rng, int i) {
    return check_sobolev_interp(sample(grid, rng, gamma_for(i), 0, 1.0), 2);
  });
  per_sample("sobolev_interp_m3", kSobolev3, [grid](std::mt19937_64& rng, int i) {
    return check_sobolev_interp(sample(grid, rng, gamma_for(i), 0, 1.0), 3);
  });
  per_sample("det_expansion", kDetExpansion, [grid](std::mt19937_64& rng, int i) {
    const ScalarField phi = sample(grid, rng, gamma_for(i), 0, 1.0);
    const ScalarField eta = sample(grid, rng, gamma_for(i), 0, 1.0);
    const double eps = std::uniform_real_distribution<double>(1e-3, 0.1)(rng);
    return check_det_expansion(phi, eta, eps);
  });
  per_sample("det_lip", kDetLip, [grid](std::mt19937_64& rng, int i) {
    const ScalarField f = sample(grid, rng, gamma_for(i), 0, 1.0);
    const ScalarField g = sample(grid, rng, gamma_for(i), 0, 1.0);
    return check_det_lip(f, g);
  });
  per_sample("forced_transport_zero", kForcedZero, [grid](std::mt19937_64& rng, int i) {
    const ScalarField sigma0 = sample(grid, rng, gamma_for(i), 0, 1.0);
    const ScalarField f = sample(grid, rng, gamma_for(i), 0, 1.0);
    return check_forced_transport(ScalarField::zeros(grid), sigma0, f, 0.5, 20);
  });
  per_sample("forced_transport", kForced, [grid](std::mt19937_64& rng, int i) {
    const ScalarField psi = sample(grid, rng, 3.0, 4, 0.05);
    const ScalarField sigma0 = sample(grid, rng, gamma_for(i), 6, 1.0);
    const ScalarField f = sample(grid, rng, gamma_for(i), 6, 1.0);
    return check_forced_transport(psi, sigma0, f, 0.5, 100);
  });
  per_sample("forced_transport_gronwall", kForced, [grid](std::mt19937_64& rng, int i) {
    const ScalarField psi = sample(grid, rng, 3.0, 4, 0.05);
    const ScalarField sigma0 = sample(grid, rng, gamma_for(i), 6, 1.0);
    const ScalarField f = sample(grid, rng, gamma_for(i), 6, 1.0);
    return check_forced_transport(psi, sigma0, f, 0.5, 100, ForcedBound::Gronwall);
  });
  for (int i = 0; i < count; ++i) {
    tasks.push_back([=] {
      std::mt19937_64 rng(derive_seed(seed, kFlows, i));
      const ScalarField psi1 = sample(grid, rng, 3.0, 4, 0.05);
      const ScalarField psi2 = axpy(psi1, 0.1, sample(grid, rng, 3.0, 4, 0.05));
      const FrozenFlowPair p{psi1, psi2};
      const ScalarField rho0 = sample(grid, rng, gamma_for(i), 4, 1.0);
      std::vector<CheckResult> out{
          guarded("flow_hminus1", [&] { return check_flow_hminus1(rho0, p); }),
          guarded("inv_gap", [&] { return check_inv_gap(p); }),
          guarded("density_stability", [&] { return check_density_stability(rho0, p); })};
      for (auto& r : out) r.index = i;
      return out;
    });
  }
  if (opt.trajectories) tasks.push_back([seed, n] { return trajectory_checks(seed, n); });

  std::vector<std::vector<CheckResult>> slots(tasks.size());
  detail::parallel_for(tasks.size(), opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) slots[k] = tasks[k]();
  });
  std::vector<CheckResult> out;
  for (auto& s : slots) {
    for (auto& r : s) {
      r.seed = seed;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace sglab
