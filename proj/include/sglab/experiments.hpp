#pragma once

// Experiment drivers: paired Euler / SG^eps runs over an eps list, slope fits
// and the per-kind pass/fail assessment.

#include <optional>
#include <string>
#include <vector>

#include "sglab/inequalities.hpp"
#include "sglab/run_config.hpp"
#include "sglab/stats.hpp"
#include "sglab/transport.hpp"
#include "sglab/wasserstein.hpp"

namespace sglab {

// Wasserstein distance between m^eps and mbar^eps = 1 + eps rhobar at one sample.
struct OTSample {
  double t = 0.0;
  OTResult w2;                  // Sinkhorn at up to 64^2
  double oracle_sinkhorn = 0.0;  // Sinkhorn on 16^2 block sums
  double oracle_exact = 0.0;     // network simplex on the same 16^2 pair
  // |S_16 - W2_exact,16^2|, the entropic bias measured at the oracle resolution
  double budget = 0.0;
  double a_t = 0.0;
  double bound = 0.0;  // B(t)
};

// y(t) = ||rho||_Calpha against the integrated Riccati-with-log comparison
// log(1 + log+(y / M0)) = w0 + C M0 t.
struct LifespanFit {
  double c_fit = 0.0;  // OLS slope / M0
  double r2 = 0.0;
  // smallest C with y' <= C M0 y (1 + log+(y / M0)) at every interior sample,
  // y' by centred differences
  double c_sup = 0.0;
  int points = 0;
};

struct RunRecord {
  double eps = 0.0;
  std::string status = "ok";  // ok | failed | no_exit
  std::string reason;         // exit reason of the SG run
  // Every sample inside the window of the kind's rate statement: eps ||grad rho||
  // <= 1/4, or for the corrector eps ||D^2 psi|| <= 1/4 for psi^eps and psi~.
  bool inside = true;
  std::vector<DiagnosticsRecord> diagnostics;
  std::vector<OTSample> ot;
  std::optional<double> exit_time;
  std::optional<double> sup_velocity_gap;
  std::optional<double> sup_w2;
  std::optional<double> final_w2;
  std::optional<double> consistency_error;  // max_t ||defect - closed form||_L2
  std::optional<LifespanFit> lifespan;
  std::optional<double> metric;  // value entering the slope fit
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::string metric_name;
  std::vector<RunRecord> runs;
  std::optional<LinearFit> fit;
  // Same window with runs outside the bootstrap window kept; reported next to
  // fit when the two differ.
  std::optional<LinearFit> unfiltered_fit;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;
  bool partial = false;  // some run failed
};

struct ExperimentOptions {
  int threads = 1;
  int labels = 0;         // flow-map lattice, 0 means n / 2
  double flow_dt = 0.01;  // particle step
  SinkhornOptions sinkhorn;
};

// stability: sup_t ||grad phibar - grad psi^eps||_L2 per eps, with flow and
// H^-1 gaps in the diagnostics. wasserstein: adds W2(m^eps, mbar^eps), its
// oracle check and B(t) at every sample; the fitted metric is W2 at the final
// sample. corrector: sup_t ||grad psi^eps - grad(phibar + eps phi1)||_L2 and
// the elliptic consistency identity. lifespan: exit time and the
// Riccati-with-log fit per eps, slope of log t* against log eps.
// inequalities: run_suite over `seeds` seeds from base.seed. Library errors
// in a run mark that run failed; the report is then partial.
ExperimentReport run_experiment(const ExperimentSpec& spec, const ExperimentOptions& options = {});

LifespanFit fit_lifespan(const std::vector<double>& t, const std::vector<double>& y, double m0);

struct Assessment {
  bool pass = false;
  std::vector<std::string> lines;  // one verdict per property
};

// The per-kind properties: slope windows (stability 1 +- 0.15, corrector
// 2 +- 0.25 and consistency <= 1e-10, wasserstein 1 +- 0.2 with oracle
// agreement 2e-3 and W2^2 + budget <= B), lifespan monotonicity with R^2 >= 0.9,
// inequality checks within bounds. An experiment with no successful run fails.
Assessment assess(const ExperimentReport& report);

inline constexpr double kConsistencyTolerance = 1e-10;
inline constexpr double kOracleTolerance = 2e-3;
inline constexpr double kLifespanMinR2 = 0.9;

// Checkers whose bounds the inequality experiment asserts.
const std::vector<std::string>& asserted_bounded_checks();

}  // namespace sglab
