// sglab: batch driver for single runs, experiments, the inequality suite and
// field file handling.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "sglab/errors.hpp"
#include "sglab/experiments.hpp"
#include "sglab/field_io.hpp"
#include "sglab/report.hpp"
#include "sglab/run_config.hpp"
#include "sglab/transport.hpp"

namespace fs = std::filesystem;
using namespace sglab;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string potential_kind(Model m) {
  switch (m) {
    case Model::Euler: return "phi_euler";
    case Model::SGeps: return "psi_sg";
    case Model::Corrector: return "phi_corrector";
  }
  return "potential";
}

std::string rho_kind(Model m) { return m == Model::Corrector ? "rho_corrector" : "rho"; }

std::optional<double> eps_of(const SimState& s) {
  if (s.model == Model::Euler) return std::nullopt;
  return s.eps;
}

RunConfig load_run(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : parse_run_config(slurp(f.config));
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.output_dir = f.out;
  validate(c);
  return c;
}

void write_checkpoint(const fs::path& dir, const std::string& tag, const SimState& s, std::size_t step) {
  write_field(dir / (tag + "_rho.bin"), s.rho, rho_kind(s.model), s.time, eps_of(s));
  write_field(dir / (tag + "_potential.bin"), s.potential, potential_kind(s.model), s.time, eps_of(s));
  nlohmann::ordered_json j;
  j["time"] = s.time;
  j["model"] = to_string(s.model);
  j["eps"] = s.eps;
  j["step"] = step;
  std::ofstream os(dir / (tag + "_checkpoint.json"), std::ios::binary);
  if (!os) throw IoError("cannot write " + (dir / (tag + "_checkpoint.json")).string());
  os << j.dump() << '\n';
}

int cmd_run(const Flags& f) {
  const RunConfig c = load_run(f);
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  const Trajectory tr = run_simulation(c);
  {
    std::ofstream os(dir / "diagnostics.ndjson", std::ios::binary);
    if (!os) throw IoError("cannot write " + (dir / "diagnostics.ndjson").string());
    write_diagnostics_ndjson(os, tr.diagnostics);
  }
  if (!tr.states.empty()) write_checkpoint(dir, "final", tr.states.back(), tr.steps.size() - 1);
  std::cout << "run " << to_string(c.model) << " eps=" << format_eps(c.eps) << " n=" << c.n
            << " exit=" << tr.exit_reason;
  if (tr.exit_time) std::cout << " t*=" << *tr.exit_time;
  std::cout << " samples=" << tr.diagnostics.size() << " out=" << dir.string() << '\n';
  // a numerical failure ends the run early; that is a failed result, not an
  // infrastructure problem
  return tr.exit_reason == "completed" || tr.exit_reason == "bootstrap_exit" ? kExitOk : kExitAssertion;
}

int finish_experiment(const ExperimentSpec& spec, const Flags& f) {
  ExperimentOptions opt;
  opt.threads = f.threads;
  const ExperimentReport rep = run_experiment(spec, opt);
  const Assessment a = assess(rep);
  const fs::path dir = f.out.empty() ? fs::path(spec.base.output_dir) : fs::path(f.out);
  emit_report(rep, a, dir);
  std::cout << to_string(spec.kind) << ": " << (a.pass ? "PASS" : "FAIL") << '\n';
  for (const auto& line : a.lines) std::cout << "  " << line << '\n';
  for (const auto& note : rep.notes) std::cout << "  note: " << note << '\n';
  std::cout << "  report: " << dir.string() << '\n';
  return exit_code(a);
}

ExperimentSpec load_spec(const Flags& f) {
  if (f.config.empty()) throw ConfigError("experiment needs --config");
  ExperimentSpec s = parse_experiment_spec(slurp(f.config));
  if (f.seed) s.base.seed = *f.seed;
  validate(s);
  return s;
}

int cmd_experiment(const Flags& f) { return finish_experiment(load_spec(f), f); }

int cmd_check(const Flags& f) {
  ExperimentSpec s;
  if (!f.config.empty()) {
    s = load_spec(f);
    if (s.kind != ExperimentKind::Inequalities) throw ConfigError("key 'kind': check needs \"inequalities\"");
  } else {
    s.kind = ExperimentKind::Inequalities;
    s.base.n = 64;
    s.seeds = 10;
    s.count = 20;
    if (f.seed) s.base.seed = *f.seed;
    s.base.output_dir = "out/check";
  }
  return finish_experiment(s, f);
}

// Initial rho and potential of a config as field files.
int cmd_dump(const Flags& f) {
  const RunConfig c = load_run(f);
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  write_checkpoint(dir, "initial", initial_state(c), 0);
  std::cout << "wrote " << (dir / "initial_rho.bin").string() << " and "
            << (dir / "initial_potential.bin").string() << '\n';
  return kExitOk;
}

int cmd_load(const std::string& path, const Flags& f) {
  FieldHeader h;
  const ScalarField field = read_field(fs::path(path), &h);
  nlohmann::ordered_json j;
  j["n"] = h.n;
  j["kind"] = h.kind;
  j["time"] = h.time;
  j["epsilon"] = h.epsilon ? nlohmann::ordered_json(*h.epsilon) : nlohmann::ordered_json(nullptr);
  j["mean"] = field.mean();
  j["l2"] = norm(field, NormKind::L2());
  j["linf"] = norm(field, NormKind::Linf());
  std::cout << j.dump() << '\n';
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    write_field(fs::path(f.out) / fs::path(path).filename(), field, h.kind, h.time, h.epsilon);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sglab: SG^eps versus Euler on the unit torus"};
  app.require_subcommand(1);
  Flags flags;
  std::string field_path;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    if (config_required) opt->required();
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "override the config seed");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "integrate a single RunConfig");
  common(run, false);
  auto* experiment = app.add_subcommand("experiment", "run an ExperimentSpec and write its report");
  common(experiment, true);
  auto* check = app.add_subcommand("check", "inequality suite (default 10 seeds x 20 samples, n = 64)");
  common(check, false);
  auto* dump = app.add_subcommand("dump", "write the initial rho and potential of a RunConfig");
  common(dump, false);
  auto* load = app.add_subcommand("load", "read a field file and print its header and norms");
  load->add_option("file", field_path, "field file")->required()->check(CLI::ExistingFile);
  load->add_option("--out", flags.out, "rewrite the field into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInfrastructure;
  }

  try {
    if (*run) return cmd_run(flags);
    if (*experiment) return cmd_experiment(flags);
    if (*check) return cmd_check(flags);
    if (*dump) return cmd_dump(flags);
    if (*load) return cmd_load(field_path, flags);
  } catch (const Error& e) {
    std::cerr << "sglab: " << e.kind() << ": " << e.what() << '\n';
    return kExitInfrastructure;
  } catch (const std::exception& e) {
    std::cerr << "sglab: " << e.what() << '\n';
    return kExitInfrastructure;
  }
  return kExitInfrastructure;
}
