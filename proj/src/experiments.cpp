#include "sglab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "parallel.hpp"
#include "sglab/elliptic_ma.hpp"
#include "sglab/errors.hpp"
#include "sglab/lagrangian.hpp"

namespace sglab {

namespace {

RunConfig with_model(const RunConfig& base, Model m, double eps) {
  RunConfig c = base;
  c.model = m;
  c.eps = eps;
  return c;
}

bool all_inside(const Trajectory& tr) {
  return std::all_of(tr.diagnostics.begin(), tr.diagnostics.end(),
                     [](const DiagnosticsRecord& d) { return d.inside; });
}

void mark_failed(RunRecord& r, const std::string& reason) {
  r.status = "failed";
  r.reason = reason;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs shared by every eps entry.
struct Reference {
  Trajectory euler;
  std::optional<Trajectory> corrector;
};

void fill_gaps(RunRecord& rec, const Trajectory& euler, const Trajectory& sg,
               const ExperimentOptions& opt) {
  const int labels = opt.labels > 0 ? opt.labels : sg.config.n / 2;
  const PairedFlows flows = paired_flows(euler, sg, labels, opt.flow_dt);
  double sup = 0.0;
  for (std::size_t k = 0; k < sg.states.size(); ++k) {
    auto& d = rec.diagnostics[k];
    const double v = vector_l2(gradient(euler.states[k].potential - sg.states[k].potential));
    d.velocity_gap = v;
    d.flow_gap = flows.flow_gap[k];
    d.hminus1_gap =
        norm(subtract_mean(euler.states[k].rho - sg.states[k].rho), NormKind::Hminus1());
    sup = std::max(sup, v);
  }
  rec.sup_velocity_gap = sup;
}

void fill_wasserstein(RunRecord& rec, const Trajectory& euler, const Trajectory& sg,
                      const ExperimentOptions& opt) {
  const std::vector<GronwallPoint> bound = gronwall_w2_bound(sg, euler);
  const double eps = sg.config.eps;
  double sup = 0.0;
  for (std::size_t k = 0; k < sg.states.size(); ++k) {
    const DensityOnTorus a = physical_density(sg.states[k].rho, eps);
    const DensityOnTorus b = physical_density(euler.states[k].rho, eps);
    OTSample s;
    s.t = sg.states[k].time;
    s.w2 = w2_sinkhorn(a, b, opt.sinkhorn);
    const DensityOnTorus a16 = downsample(a, kExactMaxGrid), b16 = downsample(b, kExactMaxGrid);
    s.oracle_sinkhorn = w2_sinkhorn(a16, b16, opt.sinkhorn).distance;
    s.oracle_exact = w2_exact_small(a16, b16).result.distance;
    s.budget = std::abs(s.oracle_sinkhorn * s.oracle_sinkhorn - s.oracle_exact * s.oracle_exact);
    s.a_t = bound[k].a_t;
    s.bound = bound[k].bound;
    auto& d = rec.diagnostics[k];
    d.w2 = s.w2.distance;
    d.a_t = s.a_t;
    d.gronwall_bound = s.bound;
    sup = std::max(sup, s.w2.distance);
    rec.ot.push_back(s);
  }
  rec.sup_w2 = sup;
  rec.final_w2 = rec.ot.back().w2.distance;
}

void fill_corrector(RunRecord& rec, const Trajectory& corr, const Trajectory& sg) {
  if (corr.states.size() != sg.states.size()) throw AlignmentError("corrector samples differ");
  const double eps = sg.config.eps;
  double sup = 0.0, consistency = 0.0;
  // the second-order rate is stated under the ellipticity window
  // eps ||D^2 psi^eps|| <= 1/4 and eps ||D^2 psi~|| <= 1/4, not the gradient one
  rec.inside = true;
  for (std::size_t k = 0; k < sg.states.size(); ++k) {
    const SimState& c = corr.states[k];
    const SimState& bg = *c.background;
    const ScalarField tilde = axpy(bg.potential, eps, c.potential);
    if (sg.diagnostics[k].hessian_margin < 0.0 || eps * hessian_linf(hessian(tilde)) > 0.25) {
      rec.inside = false;
    }
    const double v = vector_l2(gradient(sg.states[k].potential - tilde));
    rec.diagnostics[k].velocity_gap = v;
    sup = std::max(sup, v);
    const ScalarField defect = elliptic_consistency_defect(bg.rho, bg.potential, c.rho, c.potential, eps);
    const ScalarField closed = elliptic_consistency_closed_form(bg.potential, c.potential, eps);
    consistency = std::max(consistency, norm(defect - closed, NormKind::L2()));
  }
  rec.sup_velocity_gap = sup;
  rec.consistency_error = consistency;
}

RunRecord run_one(const ExperimentSpec& spec, double eps, const Reference& ref,
                  const ExperimentOptions& opt) {
  RunRecord rec;
  rec.eps = eps;
  RunConfig cfg = with_model(spec.base, Model::SGeps, eps);
  if (spec.kind == ExperimentKind::Lifespan) cfg.stop_on_exit = true;
  const Trajectory sg = run_simulation(cfg);
  rec.diagnostics = sg.diagnostics;
  rec.reason = sg.exit_reason;
  rec.exit_time = sg.exit_time;
  rec.inside = all_inside(sg);

  if (spec.kind == ExperimentKind::Lifespan) {
    if (sg.exit_reason == "bootstrap_exit") {
      rec.metric = sg.exit_time;
    } else if (sg.exit_reason == "completed") {
      rec.status = "no_exit";
    } else {
      mark_failed(rec, sg.exit_reason);
    }
    std::vector<double> t, y;
    for (const auto& d : sg.diagnostics) {
      t.push_back(d.t);
      y.push_back(d.calpha_rho);
    }
    if (t.size() >= 3) rec.lifespan = fit_lifespan(t, y, sg.m0);
    return rec;
  }

  if (sg.exit_reason != "completed") {
    mark_failed(rec, sg.exit_reason);
    return rec;
  }
  switch (spec.kind) {
    case ExperimentKind::Stability:
      fill_gaps(rec, ref.euler, sg, opt);
      rec.metric = rec.sup_velocity_gap;
      break;
    case ExperimentKind::Wasserstein:
      fill_gaps(rec, ref.euler, sg, opt);
      fill_wasserstein(rec, ref.euler, sg, opt);
      rec.metric = rec.final_w2;
      break;
    case ExperimentKind::Corrector:
      fill_corrector(rec, *ref.corrector, sg);
      rec.metric = rec.sup_velocity_gap;
      break;
    default:
      break;
  }
  return rec;
}

std::string metric_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Stability:
      return "sup_velocity_gap";
    case ExperimentKind::Wasserstein:
      return "final_w2";
    case ExperimentKind::Corrector:
      return "sup_corrector_gap";
    case ExperimentKind::Lifespan:
      return "exit_time";
    case ExperimentKind::Inequalities:
      return "";
  }
  return "";
}

void fit_slope(ExperimentReport& rep) {
  const auto& spec = rep.spec;
  const int last = spec.slope_window.second < 0 ? static_cast<int>(spec.eps_list.size()) - 1
                                                 : spec.slope_window.second;
  std::vector<double> x, y, xa, ya;
  for (int i = spec.slope_window.first; i <= last && i < static_cast<int>(rep.runs.size()); ++i) {
    const RunRecord& r = rep.runs[i];
    if (!r.metric || !(*r.metric > 0.0)) continue;
    xa.push_back(r.eps);
    ya.push_back(*r.metric);
    // rates hold on the bootstrap window only; the lifespan runs leave it by design
    if (spec.kind != ExperimentKind::Lifespan && !r.inside) {
      rep.notes.push_back(fmt("eps %g left the bootstrap window and is excluded from the fit", r.eps));
      continue;
    }
    x.push_back(r.eps);
    y.push_back(*r.metric);
  }
  if (x.size() >= 2) {
    rep.fit = fit_loglog(x, y);
  } else {
    rep.notes.push_back("fewer than two eligible runs, no slope fit");
  }
  if (xa.size() != x.size() && xa.size() >= 2) rep.unfiltered_fit = fit_loglog(xa, ya);
}

}  // namespace

LifespanFit fit_lifespan(const std::vector<double>& t, const std::vector<double>& y, double m0) {
  if (t.size() != y.size()) throw ShapeError("lifespan series lengths differ");
  if (t.size() < 3) throw DegenerateInputError("lifespan fit needs three samples");
  if (!(m0 > 0.0)) throw PreconditionError("lifespan fit needs M0 > 0");
  auto logplus = [m0](double v) { return std::max(0.0, std::log(v / m0)); };
  std::vector<double> w;
  for (double v : y) w.push_back(std::log(1.0 + logplus(v)));
  const LinearFit f = fit_line(t, w);
  LifespanFit out;
  out.c_fit = f.slope / m0;
  out.r2 = f.r2;
  out.points = f.points;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double dy = (y[k + 1] - y[k - 1]) / (t[k + 1] - t[k - 1]);
    const double g = m0 * y[k] * (1.0 + logplus(y[k]));
    out.c_sup = std::max(out.c_sup, dy / g);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const ExperimentOptions& opt) {
  validate(spec);
  ExperimentReport rep;
  rep.spec = spec;
  rep.metric_name = metric_name(spec.kind);

  if (spec.kind == ExperimentKind::Inequalities) {
    SuiteOptions so;
    so.n = spec.base.n;
    so.threads = opt.threads;
    for (int s = 0; s < spec.seeds; ++s) {
      auto res = run_suite(spec.base.seed + static_cast<std::uint64_t>(s), spec.count, so);
      rep.checks.insert(rep.checks.end(), res.begin(), res.end());
    }
    rep.partial = std::any_of(rep.checks.begin(), rep.checks.end(),
                              [](const CheckResult& r) { return !r.error.empty(); });
    return rep;
  }

  Reference ref;
  if (spec.kind != ExperimentKind::Lifespan) {
    // Euler and the corrector do not depend on eps: one run serves every entry
    ref.euler = run_simulation(with_model(spec.base, Model::Euler, 0.0));
    std::string failed = ref.euler.exit_reason != "completed" ? "euler_" + ref.euler.exit_reason : "";
    if (failed.empty() && spec.kind == ExperimentKind::Corrector) {
      // rho1 and phi1 do not involve eps either; eps only scales their use
      ref.corrector = run_simulation(with_model(spec.base, Model::Corrector, spec.eps_list.front()));
      if (ref.corrector->exit_reason != "completed") failed = "corrector_" + ref.corrector->exit_reason;
    }
    if (!failed.empty()) {
      for (double eps : spec.eps_list) {
        RunRecord r;
        r.eps = eps;
        mark_failed(r, failed);
        rep.runs.push_back(r);
      }
      rep.partial = true;
      rep.notes.push_back("reference run failed: " + failed);
      return rep;
    }
  }

  rep.runs.resize(spec.eps_list.size());
  detail::parallel_for(spec.eps_list.size(), opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double eps = spec.eps_list[i];
      try {
        rep.runs[i] = run_one(spec, eps, ref, opt);
      } catch (const Error& err) {
        rep.runs[i] = RunRecord{};
        rep.runs[i].eps = eps;
        mark_failed(rep.runs[i], err.kind());
      }
    }
  });
  rep.partial = std::any_of(rep.runs.begin(), rep.runs.end(),
                            [](const RunRecord& r) { return r.status == "failed"; });
  if (spec.kind == ExperimentKind::Lifespan) {
    rep.notes.push_back(
        "the eps^-1 log log(1/eps) lifespan asymptotic is not resolvable at this scale: "
        "log log(1/eps) changes by less than 15% over the affordable eps range, so only "
        "monotonicity of t* and the quality of the Riccati-with-log fit are assessed");
  }
  fit_slope(rep);
  return rep;
}

const std::vector<std::string>& asserted_bounded_checks() {
  // the plain forced-transport forms are reported but not asserted: the
  // unweighted H^-1 bound fails under stretching flows
  static const std::vector<std::string> names{
      "wente",           "endpoint_cz",       "det_lip",           "flow_hminus1",
      "flow_hminus1_pair", "inv_gap",         "density_stability", "hm_transport_m2",
      "hm_transport_m3", "grad_ode",          "h1_growth",         "l2_hessian",
      "vel_gap",         "flow_gap_gronwall", "forced_transport_gronwall",
      "corrector_forcing_gronwall"};
  return names;
}

Assessment assess(const ExperimentReport& rep) {
  Assessment a;
  bool ok = true;
  auto check = [&](bool cond, const std::string& line) {
    a.lines.push_back((cond ? "PASS " : "FAIL ") + line);
    ok = ok && cond;
  };
  const auto& spec = rep.spec;

  if (spec.kind == ExperimentKind::Inequalities) {
    int exact_fail = 0, bounded_fail = 0, errors = 0;
    const auto& names = asserted_bounded_checks();
    for (const auto& r : rep.checks) {
      if (!r.error.empty()) ++errors;
      else if (r.exact && !r.pass) ++exact_fail;
      else if (!r.exact && !r.pass &&
               std::find(names.begin(), names.end(), r.name) != names.end()) {
        ++bounded_fail;
      }
    }
    check(!rep.checks.empty(), fmt("checks run: %zu", rep.checks.size()));
    check(errors == 0, fmt("checker errors: %d", errors));
    check(exact_fail == 0, fmt("exact-constant failures: %d", exact_fail));
    check(bounded_fail == 0, fmt("asserted bounded failures: %d", bounded_fail));
    a.pass = ok;
    return a;
  }

  const bool any_ok = std::any_of(rep.runs.begin(), rep.runs.end(),
                                  [](const RunRecord& r) { return r.status != "failed"; });
  check(any_ok, "at least one run succeeded");

  auto slope_in = [&](double target, double tol) {
    if (!rep.fit) {
      check(false, "slope fit available");
      return;
    }
    check(std::abs(rep.fit->slope - target) <= tol,
          fmt("slope %.4f within %g +- %g (%d runs inside the window)", rep.fit->slope, target, tol,
              rep.fit->points));
    // runs outside the window are excluded above; the rate over the full list
    // has to hold as well
    if (rep.unfiltered_fit) {
      check(std::abs(rep.unfiltered_fit->slope - target) <= tol,
            fmt("slope %.4f within %g +- %g over all %d runs", rep.unfiltered_fit->slope, target,
                tol, rep.unfiltered_fit->points));
    }
  };

  switch (spec.kind) {
    case ExperimentKind::Stability:
      slope_in(1.0, 0.15);
      break;
    case ExperimentKind::Corrector: {
      slope_in(2.0, 0.25);
      double worst = 0.0;
      for (const auto& r : rep.runs) worst = std::max(worst, r.consistency_error.value_or(0.0));
      check(worst <= kConsistencyTolerance, fmt("elliptic consistency error %.3e <= 1e-10", worst));
      break;
    }
    case ExperimentKind::Wasserstein: {
      slope_in(1.0, 0.2);
      double oracle = 0.0, margin = INFINITY;
      for (const auto& r : rep.runs) {
        for (const auto& s : r.ot) {
          oracle = std::max(oracle, std::abs(s.oracle_sinkhorn - s.oracle_exact));
          margin = std::min(margin, s.bound - (s.w2.distance * s.w2.distance + s.budget));
        }
      }
      check(oracle <= kOracleTolerance, fmt("oracle gap %.3e <= 2e-3 on 16^2", oracle));
      check(margin >= 0.0, fmt("min B(t) - (W2^2 + budget) = %.3e >= 0", margin));
      break;
    }
    case ExperimentKind::Lifespan: {
      // eps_list is decreasing, so exit times must increase along it
      bool mono = true, fits = true;
      for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        const auto& r = rep.runs[i];
        if (!r.exit_time) mono = false;
        if (i > 0 && r.exit_time && rep.runs[i - 1].exit_time &&
            !(*r.exit_time > *rep.runs[i - 1].exit_time)) {
          mono = false;
        }
        if (!r.lifespan || !(r.lifespan->r2 >= kLifespanMinR2) ||
            !std::isfinite(r.lifespan->c_fit) || !std::isfinite(r.lifespan->c_sup)) {
          fits = false;
        }
      }
      check(mono, "exit time strictly increasing as eps decreases");
      double r2 = 1.0;
      for (const auto& r : rep.runs) r2 = std::min(r2, r.lifespan ? r.lifespan->r2 : 0.0);
      check(fits, fmt("Riccati-with-log fit R^2 min %.4f >= 0.9 with finite C", r2));
      break;
    }
    default:
      break;
  }
  a.pass = ok;
  return a;
}

}  // namespace sglab
