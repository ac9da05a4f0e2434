#pragma once

// Result emission: NDJSON diagnostics per run, summary and plot CSVs, and the
// suite report. Output bytes depend only on the report contents.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sglab/experiments.hpp"

namespace sglab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 2;
inline constexpr int kExitInfrastructure = 3;

// One JSON object per sample, fixed key order; optional paired quantities are
// written only when present, OT keys (w2, method, reg, marginal_error, budget,
// oracle_sinkhorn, oracle_exact) only when ot is non-empty.
void write_diagnostics_ndjson(std::ostream& os, const std::vector<DiagnosticsRecord>& diagnostics,
                              const std::vector<OTSample>& ot = {});

// {"name", "ratio", "pass", "seed", "digest", ...} per check.
void write_checks_ndjson(std::ostream& os, const std::vector<CheckResult>& checks);

// Columns eps, sup_velocity_gap, sup_w2, exit_time, slope, slope_stderr,
// status, lifespan_c, lifespan_c_sup, lifespan_r2; one row per eps and a final
// "fit" row.
void write_summary_csv(std::ostream& os, const ExperimentReport& report);

// Per-checker count, failures and max ratio against its limit (bound plus
// tolerance).
void write_checks_summary_csv(std::ostream& os, const std::vector<CheckResult>& checks);

// Writes into dir (created if needed):
//   run_eps_<eps>.ndjson per run, summary.csv, report.json,
//   velocity_gap_vs_t.csv, w2_vs_t.csv (wasserstein), metric_vs_eps.csv,
//   checks.ndjson and checks_summary.csv (inequalities).
// Returns the paths written. IoError names the failing path.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const Assessment& assessment,
                                               const std::filesystem::path& dir);

// kExitOk when the assessment passes, kExitAssertion otherwise.
int exit_code(const Assessment& assessment);

std::string format_eps(double eps);

}  // namespace sglab
