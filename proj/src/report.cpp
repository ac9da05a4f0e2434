#include "sglab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "sglab/errors.hpp"

namespace sglab {

namespace {

using ojson = nlohmann::ordered_json;

std::string num(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

template <class T>
std::string opt_num(const std::optional<T>& v) {
  return v ? num(static_cast<double>(*v)) : "";
}

ojson diagnostics_json(const DiagnosticsRecord& d) {
  ojson j;
  j["t"] = d.t;
  j["l2_rho"] = d.l2_rho;
  j["linf_rho"] = d.linf_rho;
  j["grad_linf_rho"] = d.grad_linf_rho;
  j["h2_rho"] = d.h2_rho;
  j["h3_rho"] = d.h3_rho;
  j["hess_linf_psi"] = d.hess_linf_psi;
  j["hess_l2_psi"] = d.hess_l2_psi;
  j["calpha_rho"] = d.calpha_rho;
  j["grad_margin"] = d.grad_margin;
  j["hessian_margin"] = d.hessian_margin;
  j["log_estimate_ratio"] = d.log_estimate_ratio;
  j["inside"] = d.inside;
  if (d.velocity_gap) j["velocity_gap"] = *d.velocity_gap;
  if (d.flow_gap) j["flow_gap"] = *d.flow_gap;
  if (d.hminus1_gap) j["hminus1_gap"] = *d.hminus1_gap;
  if (d.w2) j["w2"] = *d.w2;
  if (d.a_t) j["a_t"] = *d.a_t;
  if (d.gronwall_bound) j["gronwall_bound"] = *d.gronwall_bound;
  return j;
}

ojson check_json(const CheckResult& r) {
  ojson j;
  j["name"] = r.name;
  j["ratio"] = r.ratio;
  j["pass"] = r.pass;
  j["seed"] = r.seed;
  j["digest"] = r.digest;
  j["index"] = r.index;
  j["bound"] = r.bound;
  j["tolerance"] = r.tolerance;
  j["exact"] = r.exact;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text,
                std::vector<std::filesystem::path>& written) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  os.close();
  if (!os) throw IoError("write failed: " + path.string());
  written.push_back(path);
}

template <class F>
std::string to_text(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

}  // namespace

std::string format_eps(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

void write_diagnostics_ndjson(std::ostream& os, const std::vector<DiagnosticsRecord>& diagnostics,
                              const std::vector<OTSample>& ot) {
  for (std::size_t k = 0; k < diagnostics.size(); ++k) {
    ojson j = diagnostics_json(diagnostics[k]);
    if (k < ot.size()) {
      const OTSample& s = ot[k];
      j["w2"] = s.w2.distance;
      j["method"] = to_string(s.w2.method);
      j["reg"] = s.w2.reg;
      j["marginal_error"] = s.w2.marginal_error;
      j["budget"] = s.budget;
      j["oracle_sinkhorn"] = s.oracle_sinkhorn;
      j["oracle_exact"] = s.oracle_exact;
    }
    os << j.dump() << '\n';
  }
}

void write_checks_ndjson(std::ostream& os, const std::vector<CheckResult>& checks) {
  for (const auto& r : checks) os << check_json(r).dump() << '\n';
}

void write_summary_csv(std::ostream& os, const ExperimentReport& rep) {
  os << "eps,sup_velocity_gap,sup_w2,exit_time,slope,slope_stderr,status,lifespan_c,lifespan_c_sup,"
        "lifespan_r2\n";
  for (const auto& r : rep.runs) {
    os << format_eps(r.eps) << ',' << opt_num(r.sup_velocity_gap) << ',' << opt_num(r.sup_w2)
       << ',' << opt_num(r.exit_time) << ",,," << r.status;
    if (!r.reason.empty() && r.status != "ok") os << ':' << r.reason;
    if (r.status == "ok" && !r.inside && rep.spec.kind != ExperimentKind::Lifespan) os << ":outside_window";
    os << ',';
    if (r.lifespan) os << num(r.lifespan->c_fit) << ',' << num(r.lifespan->c_sup) << ',' << num(r.lifespan->r2);
    else os << ",,";
    os << '\n';
  }
  const bool any_ok = std::any_of(rep.runs.begin(), rep.runs.end(),
                                  [](const RunRecord& r) { return r.status != "failed"; });
  os << "fit,,,,";
  if (rep.fit) {
    os << num(rep.fit->slope) << ',' << num(rep.fit->slope_stderr) << ",ok,,,\n";
  } else {
    os << ",," << (any_ok ? "no_fit" : "failed") << ",,,\n";
  }
}

void write_checks_summary_csv(std::ostream& os, const std::vector<CheckResult>& checks) {
  struct Row {
    int count = 0, failures = 0, errors = 0;
    double max_ratio = 0.0, bound = 0.0;
    bool exact = false;
  };
  std::vector<std::string> order;
  std::map<std::string, Row> rows;
  for (const auto& r : checks) {
    if (!rows.count(r.name)) order.push_back(r.name);
    Row& row = rows[r.name];
    ++row.count;
    if (!r.error.empty()) {
      ++row.errors;
      continue;
    }
    if (!r.pass) ++row.failures;
    row.max_ratio = std::max(row.max_ratio, r.ratio);
    row.bound = r.bound + r.tolerance;
    row.exact = r.exact;
  }
  os << "name,count,failures,errors,max_ratio,limit,exact\n";
  for (const auto& name : order) {
    const Row& row = rows[name];
    os << name << ',' << row.count << ',' << row.failures << ',' << row.errors << ','
       << num(row.max_ratio) << ',' << num(row.bound) << ',' << (row.exact ? "true" : "false")
       << '\n';
  }
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& rep, const Assessment& a,
                                               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;

  ojson j;
  j["spec"] = ojson::parse(serialize(rep.spec));
  j["metric"] = rep.metric_name;
  j["partial"] = rep.partial;
  if (rep.fit) {
    j["fit"] = {{"slope", rep.fit->slope},
                {"slope_stderr", rep.fit->slope_stderr},
                {"intercept", rep.fit->intercept},
                {"r2", rep.fit->r2},
                {"points", rep.fit->points}};
  }
  if (rep.unfiltered_fit) {
    j["unfiltered_fit"] = {{"slope", rep.unfiltered_fit->slope},
                           {"slope_stderr", rep.unfiltered_fit->slope_stderr},
                           {"intercept", rep.unfiltered_fit->intercept},
                           {"r2", rep.unfiltered_fit->r2},
                           {"points", rep.unfiltered_fit->points}};
  }
  ojson runs = ojson::array();
  for (const auto& r : rep.runs) {
    ojson o;
    o["eps"] = r.eps;
    o["status"] = r.status;
    o["reason"] = r.reason;
    o["inside"] = r.inside;
    if (r.metric) o["metric"] = *r.metric;
    if (r.exit_time) o["exit_time"] = *r.exit_time;
    if (r.consistency_error) o["consistency_error"] = *r.consistency_error;
    if (r.lifespan) {
      o["lifespan_fit"] = {{"c_fit", r.lifespan->c_fit},
                           {"r2", r.lifespan->r2},
                           {"c_sup", r.lifespan->c_sup},
                           {"points", r.lifespan->points}};
    }
    runs.push_back(o);
  }
  j["runs"] = runs;
  j["notes"] = rep.notes;
  j["assessment"] = {{"pass", a.pass}, {"lines", a.lines}};
  write_file(dir / "report.json", j.dump(2) + "\n", written);

  if (rep.spec.kind == ExperimentKind::Inequalities) {
    write_file(dir / "checks.ndjson", to_text([&](std::ostream& os) { write_checks_ndjson(os, rep.checks); }),
               written);
    write_file(dir / "checks_summary.csv",
               to_text([&](std::ostream& os) { write_checks_summary_csv(os, rep.checks); }), written);
    return written;
  }

  for (const auto& r : rep.runs) {
    write_file(dir / ("run_eps_" + format_eps(r.eps) + ".ndjson"),
               to_text([&](std::ostream& os) { write_diagnostics_ndjson(os, r.diagnostics, r.ot); }),
               written);
  }
  write_file(dir / "summary.csv", to_text([&](std::ostream& os) { write_summary_csv(os, rep); }),
             written);

  write_file(dir / "velocity_gap_vs_t.csv", to_text([&](std::ostream& os) {
               os << "eps,t,velocity_gap\n";
               for (const auto& r : rep.runs) {
                 for (const auto& d : r.diagnostics) {
                   if (d.velocity_gap) os << format_eps(r.eps) << ',' << num(d.t) << ',' << num(*d.velocity_gap) << '\n';
                 }
               }
             }),
             written);
  if (rep.spec.kind == ExperimentKind::Wasserstein) {
    write_file(dir / "w2_vs_t.csv", to_text([&](std::ostream& os) {
                 os << "eps,t,w2,w2_sq_plus_budget,bound\n";
                 for (const auto& r : rep.runs) {
                   for (const auto& s : r.ot) {
                     os << format_eps(r.eps) << ',' << num(s.t) << ',' << num(s.w2.distance) << ','
                        << num(s.w2.distance * s.w2.distance + s.budget) << ',' << num(s.bound) << '\n';
                   }
                 }
               }),
               written);
  }
  write_file(dir / "metric_vs_eps.csv", to_text([&](std::ostream& os) {
               os << "eps," << rep.metric_name << '\n';
               for (const auto& r : rep.runs) {
                 if (r.metric) os << format_eps(r.eps) << ',' << num(*r.metric) << '\n';
               }
             }),
             written);
  return written;
}

int exit_code(const Assessment& a) { return a.pass ? kExitOk : kExitAssertion; }

}  // namespace sglab
