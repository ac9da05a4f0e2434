#pragma once

// Run and experiment configuration, strict JSON parsing and canonical
// serialization.

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sglab/torus_spectral.hpp"

namespace sglab {

enum class Model { Euler, SGeps, Corrector };

std::string to_string(Model m);
Model model_from_string(const std::string& s);  // ConfigError on unknown names

// a cos(2 pi (p x + q y)) + b sin(2 pi (p x + q y))
struct FourierTerm {
  int p = 0;
  int q = 0;
  double a = 0.0;
  double b = 0.0;
  friend bool operator==(const FourierTerm&, const FourierTerm&) = default;
};

// Either a named preset ("default", "steep", "shear") or an explicit list of
// Fourier terms; preset is empty when terms are given.
struct InitialData {
  std::string preset = "default";
  std::vector<FourierTerm> terms;
  friend bool operator==(const InitialData&, const InitialData&) = default;
};

ScalarField make_initial_density(const InitialData& data, const TorusGrid& grid);

struct RunConfig {
  int n = 128;
  Model model = Model::Euler;
  double eps = 0.0;
  double t_final = 1.0;
  double cfl = 0.5;
  double sample_interval = 0.1;
  InitialData initial_data;
  bool stop_on_exit = false;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

enum class ExperimentKind { Stability, Wasserstein, Corrector, Lifespan, Inequalities };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Stability;
  std::vector<double> eps_list;
  RunConfig base;
  // Inclusive index range into eps_list used by slope fits.
  std::pair<int, int> slope_window{0, -1};
  // Inequality experiments: samples per checker and number of seeds starting
  // at base.seed.
  int count = 20;
  int seeds = 1;
  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

// Throw ConfigError naming the offending key.
RunConfig parse_run_config(const std::string& text);
ExperimentSpec parse_experiment_spec(const std::string& text);
// A document with a "kind" key is an experiment, otherwise a run.
std::variant<RunConfig, ExperimentSpec> parse_config(const std::string& text);

// Canonical single-line JSON: every field present, fixed key order.
std::string serialize(const RunConfig& c);
std::string serialize(const ExperimentSpec& s);

void validate(const RunConfig& c);
void validate(const ExperimentSpec& s);

}  // namespace sglab
