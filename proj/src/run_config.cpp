#include "sglab/run_config.hpp"

#include <cmath>
#include <json.hpp>
#include <set>

#include "sglab/errors.hpp"

namespace sglab {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string to_string(Model m) {
  switch (m) {
    case Model::Euler:
      return "Euler";
    case Model::SGeps:
      return "SGeps";
    case Model::Corrector:
      return "Corrector";
  }
  return "?";
}

Model model_from_string(const std::string& s) {
  if (s == "Euler") return Model::Euler;
  if (s == "SGeps") return Model::SGeps;
  if (s == "Corrector") return Model::Corrector;
  throw ConfigError("key 'model': expected one of Euler, SGeps, Corrector, got '" + s + "'");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Stability:
      return "stability";
    case ExperimentKind::Wasserstein:
      return "wasserstein";
    case ExperimentKind::Corrector:
      return "corrector";
    case ExperimentKind::Lifespan:
      return "lifespan";
    case ExperimentKind::Inequalities:
      return "inequalities";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "stability") return ExperimentKind::Stability;
  if (s == "wasserstein") return ExperimentKind::Wasserstein;
  if (s == "corrector") return ExperimentKind::Corrector;
  if (s == "lifespan") return ExperimentKind::Lifespan;
  if (s == "inequalities") return ExperimentKind::Inequalities;
  throw ConfigError("key 'kind': unknown experiment kind '" + s + "'");
}

namespace {

std::vector<FourierTerm> preset_terms(const std::string& name) {
  if (name == "default") return {{1, 1, 0.5, 0.0}, {1, -1, 0.5, 0.0}, {0, 2, 0.5, 0.0}};
  // 0.07 [cos(2 pi x) cos(2 pi y) + 0.7 cos(4 pi x + 2 pi y)], scaled so that
  // ||grad rho^0||_Linf is about 1 and eps in [0.05, 0.2] starts inside the
  // bootstrap region.
  if (name == "steep") return {{1, 1, 0.035, 0.0}, {1, -1, 0.035, 0.0}, {2, 1, 0.049, 0.0}};
  // -4 pi^2 cos(2 pi y): stationary shear with potential cos(2 pi y)
  if (name == "shear") return {{0, 1, -4.0 * kPi * kPi, 0.0}};
  throw ConfigError("key 'initial_data': unknown preset '" + name + "'");
}

}  // namespace

ScalarField make_initial_density(const InitialData& data, const TorusGrid& grid) {
  const auto terms = data.terms.empty() ? preset_terms(data.preset) : data.terms;
  return ScalarField::from_function(grid, [&](double x, double y) {
    double s = 0.0;
    for (const auto& t : terms) {
      const double th = kTwoPi * (t.p * x + t.q * y);
      s += t.a * std::cos(th) + t.b * std::sin(th);
    }
    return s;
  });
}

namespace {

std::string type_name(const json& j) { return j.type_name(); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError("key '" + key + "': expected number, got " + type_name(v));
  }
  return v.get<double>();
}

long long get_integer(const json& obj, const std::string& key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("key '" + key + "': expected integer, got " + type_name(v));
  }
  return v.get<long long>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError("key '" + key + "': expected boolean, got " + type_name(v));
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("key '" + key + "': expected string, got " + type_name(v));
  return v.get<std::string>();
}

InitialData parse_initial_data(const json& v) {
  InitialData d;
  if (v.is_string()) {
    d.preset = v.get<std::string>();
    preset_terms(d.preset);
    return d;
  }
  if (!v.is_array()) {
    throw ConfigError("key 'initial_data': expected preset name or array of terms, got " +
                      type_name(v));
  }
  d.preset.clear();
  for (const auto& t : v) {
    check_keys(t, {"p", "q", "a", "b"}, "initial_data term");
    if (!t.contains("p") || !t.contains("q")) {
      throw ConfigError("key 'initial_data': each term needs integer 'p' and 'q'");
    }
    FourierTerm term;
    term.p = static_cast<int>(get_integer(t, "p", 0));
    term.q = static_cast<int>(get_integer(t, "q", 0));
    term.a = get_number(t, "a", 0.0);
    term.b = get_number(t, "b", 0.0);
    d.terms.push_back(term);
  }
  if (d.terms.empty()) throw ConfigError("key 'initial_data': term list is empty");
  return d;
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j,
             {"n", "model", "eps", "t_final", "cfl", "sample_interval", "initial_data",
              "stop_on_exit", "seed", "output_dir"},
             "run config");
  RunConfig c;
  c.n = static_cast<int>(get_integer(j, "n", c.n));
  c.model = model_from_string(get_string(j, "model", to_string(c.model)));
  c.eps = get_number(j, "eps", c.eps);
  c.t_final = get_number(j, "t_final", c.t_final);
  c.cfl = get_number(j, "cfl", c.cfl);
  c.sample_interval = get_number(j, "sample_interval", c.sample_interval);
  if (j.contains("initial_data")) c.initial_data = parse_initial_data(j.at("initial_data"));
  c.stop_on_exit = get_bool(j, "stop_on_exit", c.stop_on_exit);
  const long long seed = get_integer(j, "seed", 0);
  if (seed < 0) throw ConfigError("key 'seed': expected nonnegative integer");
  c.seed = static_cast<std::uint64_t>(seed);
  c.output_dir = get_string(j, "output_dir", c.output_dir);
  validate(c);
  return c;
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

ExperimentSpec experiment_from_json(const json& j) {
  check_keys(j, {"kind", "eps_list", "base", "slope_window", "count", "seeds"}, "experiment spec");
  ExperimentSpec s;
  if (!j.contains("kind")) throw ConfigError("key 'kind': required");
  s.kind = experiment_kind_from_string(get_string(j, "kind", ""));
  if (j.contains("eps_list")) {
    const json& v = j.at("eps_list");
    if (!v.is_array()) throw ConfigError("key 'eps_list': expected array, got " + type_name(v));
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("key 'eps_list': expected numbers");
      s.eps_list.push_back(e.get<double>());
    }
  }
  if (j.contains("base")) s.base = run_config_from_json(j.at("base"));
  if (j.contains("slope_window")) {
    const json& v = j.at("slope_window");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
      throw ConfigError("key 'slope_window': expected [first, last] integer indices");
    }
    s.slope_window = {v[0].get<int>(), v[1].get<int>()};
  } else {
    s.slope_window = {0, static_cast<int>(s.eps_list.size()) - 1};
  }
  s.count = static_cast<int>(get_integer(j, "count", s.count));
  s.seeds = static_cast<int>(get_integer(j, "seeds", s.seeds));
  validate(s);
  return s;
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.n < 32 || (c.n & (c.n - 1)) != 0) {
    throw ConfigError("key 'n': expected a power of two >= 32, got " + std::to_string(c.n));
  }
  if (!(c.eps >= 0.0) || !std::isfinite(c.eps)) throw ConfigError("key 'eps': must be >= 0");
  if (!(c.t_final > 0.0) || !std::isfinite(c.t_final)) {
    throw ConfigError("key 't_final': must be > 0");
  }
  if (!(c.cfl > 0.0)) throw ConfigError("key 'cfl': must be > 0");
  if (!(c.sample_interval > 0.0)) throw ConfigError("key 'sample_interval': must be > 0");
  for (const auto& t : c.initial_data.terms) {
    if (t.p == 0 && t.q == 0) {
      throw ConfigError("key 'initial_data': the (0,0) mode would give a nonzero mean");
    }
    if (std::max(std::abs(t.p), std::abs(t.q)) > c.n / 3) {
      throw ConfigError("key 'initial_data': mode (" + std::to_string(t.p) + "," +
                        std::to_string(t.q) + ") is above the dealiasing cutoff");
    }
  }
}

void validate(const ExperimentSpec& s) {
  validate(s.base);
  const int len = static_cast<int>(s.eps_list.size());
  for (double e : s.eps_list) {
    if (!(e >= 0.0)) throw ConfigError("key 'eps_list': entries must be >= 0");
  }
  for (int i = 1; i < len; ++i) {
    if (!(s.eps_list[i] < s.eps_list[i - 1])) {
      throw ConfigError("key 'eps_list': must be strictly decreasing");
    }
  }
  if (s.kind != ExperimentKind::Inequalities) {
    if (len < 3) throw ConfigError("key 'eps_list': need at least 3 entries for a slope fit");
    const auto [lo, hi] = s.slope_window;
    if (lo < 0 || hi >= len || hi - lo < 1) {
      throw ConfigError("key 'slope_window': need 0 <= first < last < " + std::to_string(len));
    }
  }
  if (s.count < 1) throw ConfigError("key 'count': must be >= 1");
  if (s.seeds < 1) throw ConfigError("key 'seeds': must be >= 1");
}

RunConfig parse_run_config(const std::string& text) {
  return run_config_from_json(parse_document(text));
}

ExperimentSpec parse_experiment_spec(const std::string& text) {
  return experiment_from_json(parse_document(text));
}

std::variant<RunConfig, ExperimentSpec> parse_config(const std::string& text) {
  json j = parse_document(text);
  if (j.is_object() && j.contains("kind")) return experiment_from_json(j);
  return run_config_from_json(j);
}

namespace {

ojson to_json(const RunConfig& c) {
  ojson j;
  j["n"] = c.n;
  j["model"] = to_string(c.model);
  j["eps"] = c.eps;
  j["t_final"] = c.t_final;
  j["cfl"] = c.cfl;
  j["sample_interval"] = c.sample_interval;
  if (c.initial_data.terms.empty()) {
    j["initial_data"] = c.initial_data.preset;
  } else {
    ojson terms = ojson::array();
    for (const auto& t : c.initial_data.terms) {
      ojson o;
      o["p"] = t.p;
      o["q"] = t.q;
      o["a"] = t.a;
      o["b"] = t.b;
      terms.push_back(o);
    }
    j["initial_data"] = terms;
  }
  j["stop_on_exit"] = c.stop_on_exit;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace

std::string serialize(const RunConfig& c) { return to_json(c).dump(); }

std::string serialize(const ExperimentSpec& s) {
  ojson j;
  j["kind"] = to_string(s.kind);
  j["eps_list"] = s.eps_list;
  j["base"] = to_json(s.base);
  j["slope_window"] = {s.slope_window.first, s.slope_window.second};
  j["count"] = s.count;
  j["seeds"] = s.seeds;
  return j.dump();
}

}  // namespace sglab
