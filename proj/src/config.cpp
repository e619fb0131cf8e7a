#include "ddinv/config.hpp"

#include <set>

#include <fmt/format.h>

namespace ddinv {

namespace {

Json poly_to_json(const PolyhedronFiles& p) {
  Json j{{"A", p.A}};
  if (p.b) j["b"] = *p.b;
  return j;
}

PolyhedronFiles poly_from_json(const Json& j) {
  if (j.is_string()) return {j.get<std::string>(), std::nullopt};
  PolyhedronFiles p{j.at("A").get<std::string>(), std::nullopt};
  if (j.contains("b")) p.b = j["b"].get<std::string>();
  return p;
}

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void read_optional(const Json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(fmt::format("{}: expected an object", where));
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ParseError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

void check_choice(const std::string& value, const std::set<std::string>& allowed, const char* key) {
  if (!allowed.count(value)) throw ParseError(fmt::format("config: '{}' has invalid value '{}'", key, value));
}

}  // namespace

Json RunConfig::to_json() const {
  Json j;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["delta"] = delta;
  j["T"] = T;
  j["formulation"] = formulation;
  if (A) j["A"] = *A;
  if (B) j["B"] = *B;
  if (S) j["S"] = poly_to_json(*S);
  if (D) j["D"] = *D;
  if (input_set) j["input_set"] = poly_to_json(*input_set);
  if (data) j["data"] = *data;
  if (x0) j["x0"] = *x0;
  j["generation"] = Json{{"input_low", input_low},
                         {"input_high", input_high},
                         {"disturbance_mode", disturbance_mode}};
  j["options"] = Json{{"representation", representation},
                      {"margin", margin},
                      {"certificate_tol", certificate_tol},
                      {"max_variables", max_variables},
                      {"auto_minimize_above", auto_minimize_above}};
  j["simulation"] = Json{{"steps", steps}};
  j["verify"] = Json{{"model_check", model_check}, {"model_samples", model_samples}};
  j["sweep"] = Json{{"T_grid", T_grid},
                    {"delta_grid", delta_grid},
                    {"seeds", seeds},
                    {"data_policy", data_policy},
                    {"mode", sweep_mode}};
  return j;
}

RunConfig RunConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  try {
    check_keys(j, {"seed", "jobs", "delta", "T", "formulation", "A", "B", "S", "D", "input_set",
                   "data", "x0", "generation", "options", "simulation", "verify", "sweep"},
               "config");
    read_opt(j, "seed", c.seed);
    read_opt(j, "jobs", c.jobs);
    read_opt(j, "delta", c.delta);
    read_opt(j, "T", c.T);
    read_opt(j, "formulation", c.formulation);
    read_optional(j, "A", c.A);
    read_optional(j, "B", c.B);
    if (j.contains("S")) c.S = poly_from_json(j["S"]);
    read_optional(j, "D", c.D);
    if (j.contains("input_set")) c.input_set = poly_from_json(j["input_set"]);
    read_optional(j, "data", c.data);
    read_optional(j, "x0", c.x0);
    if (j.contains("generation")) {
      const Json& g = j["generation"];
      check_keys(g, {"input_low", "input_high", "disturbance_mode"}, "config.generation");
      read_opt(g, "input_low", c.input_low);
      read_opt(g, "input_high", c.input_high);
      read_opt(g, "disturbance_mode", c.disturbance_mode);
    }
    if (j.contains("options")) {
      const Json& o = j["options"];
      check_keys(o, {"representation", "margin", "certificate_tol", "max_variables", "auto_minimize_above"},
                 "config.options");
      read_opt(o, "representation", c.representation);
      read_opt(o, "margin", c.margin);
      read_opt(o, "certificate_tol", c.certificate_tol);
      read_opt(o, "max_variables", c.max_variables);
      read_opt(o, "auto_minimize_above", c.auto_minimize_above);
    }
    if (j.contains("simulation")) {
      check_keys(j["simulation"], {"steps"}, "config.simulation");
      read_opt(j["simulation"], "steps", c.steps);
    }
    if (j.contains("verify")) {
      check_keys(j["verify"], {"model_check", "model_samples"}, "config.verify");
      read_opt(j["verify"], "model_check", c.model_check);
      read_opt(j["verify"], "model_samples", c.model_samples);
    }
    if (j.contains("sweep")) {
      const Json& s = j["sweep"];
      check_keys(s, {"T_grid", "delta_grid", "seeds", "data_policy", "mode"}, "config.sweep");
      read_opt(s, "T_grid", c.T_grid);
      if (s.contains("delta_grid")) {
        const Json& g = s["delta_grid"];
        if (g.is_object()) {
          check_keys(g, {"start", "stop", "step"}, "config.sweep.delta_grid");
          c.delta_grid = make_grid(g.at("start").get<double>(), g.at("stop").get<double>(),
                                   g.at("step").get<double>());
        } else {
          c.delta_grid = g.get<std::vector<double>>();
        }
      }
      read_opt(s, "seeds", c.seeds);
      read_opt(s, "data_policy", c.data_policy);
      read_opt(s, "mode", c.sweep_mode);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  check_choice(c.formulation, {"model", "thm1", "thm2"}, "formulation");
  check_choice(c.disturbance_mode, {"box", "vertex"}, "generation.disturbance_mode");
  check_choice(c.representation, {"auto", "full", "minimal"}, "options.representation");
  check_choice(c.model_check, {"samples", "vertices"}, "verify.model_check");
  check_choice(c.data_policy, {"independent", "nested"}, "sweep.data_policy");
  check_choice(c.sweep_mode, {"grid", "threshold"}, "sweep.mode");
  if (c.delta < 0.0) throw ParseError("config: 'delta' must be nonnegative");
  if (c.T < 1) throw ParseError("config: 'T' must be positive");
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  const Json j = read_json(path);
  try {
    return from_json(j, path.parent_path().empty() ? "." : path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void RunConfig::absolutize() {
  auto fix = [this](std::string& p) { p = std::filesystem::absolute(resolve(p)).lexically_normal().string(); };
  for (auto* p : {&A, &B, &D, &data}) {
    if (*p) fix(**p);
  }
  for (auto* poly : {&S, &input_set}) {
    if (!*poly) continue;
    fix((*poly)->A);
    if ((*poly)->b) fix(*(*poly)->b);
  }
  base_dir = std::filesystem::current_path();
}

SynthesisOptions RunConfig::synthesis_options() const {
  SynthesisOptions o;
  o.representation = parse_representation(representation);
  o.margin = margin;
  o.certificate_tol = certificate_tol;
  o.max_variables = max_variables;
  o.auto_minimize_above = auto_minimize_above;
  return o;
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig s;
  s.T_grid = T_grid;
  s.delta_grid = delta_grid;
  s.seeds = seeds;
  s.nested = data_policy == "nested";
  s.threshold_search = sweep_mode == "threshold";
  s.jobs = jobs;
  s.input_bound = std::max(std::abs(input_low), std::abs(input_high));
  s.options = synthesis_options();
  return s;
}

}  // namespace ddinv
