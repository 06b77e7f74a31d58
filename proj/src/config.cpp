#include "capa/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace capa {

using nlohmann::json;

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::gamma_b_db: return "gamma_b_db";
    case Axis::gamma_e_db: return "gamma_e_db";
    case Axis::aperture_len: return "aperture_len";
    case Axis::k_eves: return "k_eves";
  }
  return "?";
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::rate: return "rate";
    case Metric::sop: return "sop";
    case Metric::slope: return "slope";
    case Metric::offset: return "offset";
    case Metric::gain: return "gain";
  }
  return "?";
}

Axis parse_axis(std::string_view s) {
  for (Axis a : {Axis::gamma_b_db, Axis::gamma_e_db, Axis::aperture_len, Axis::k_eves})
    if (to_string(a) == s) return a;
  throw DomainError("unknown axis '" + std::string(s) + "' (expected gamma_b_db, gamma_e_db, aperture_len or k_eves)");
}

Metric parse_metric(std::string_view s) {
  for (Metric m : {Metric::rate, Metric::sop, Metric::slope, Metric::offset, Metric::gain})
    if (to_string(m) == s) return m;
  throw DomainError("unknown output '" + std::string(s) + "' (expected rate, sop, slope, offset or gain)");
}

bool evaluator_supports(Evaluator ev, Metric m) {
  if (m == Metric::rate || m == Metric::sop) return true;
  return ev == Evaluator::asymptotic;
}

SeriesOptions SystemConfig::series_options() const {
  SeriesOptions o;
  o.q_floor = q_floor;
  o.series_tol = series_tol;
  return o;
}

EvalPrecision SystemConfig::eval_precision() const {
  switch (precision) {
    case PrecisionMode::standard: return EvalPrecision::standard();
    case PrecisionMode::extended: return EvalPrecision::extended();
    case PrecisionMode::automatic: break;
  }
  return {};
}

SystemConfig table1_preset() { return SystemConfig{}; }

namespace {

std::string_view precision_name(PrecisionMode p) {
  switch (p) {
    case PrecisionMode::standard: return "standard";
    case PrecisionMode::extended: return "extended";
    case PrecisionMode::automatic: return "auto";
  }
  return "?";
}

PrecisionMode parse_precision(const std::string& s, const std::string& path) {
  if (s == "standard") return PrecisionMode::standard;
  if (s == "extended") return PrecisionMode::extended;
  if (s == "auto") return PrecisionMode::automatic;
  throw ConfigError(path, "expected \"standard\", \"extended\" or \"auto\"");
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  std::set<std::string> ok(known.begin(), known.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
}

const json* member(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
  const json* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(join(path, key), "expected a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(path, key), "must be finite");
  return x;
}

std::int64_t get_integer(const json& obj, const std::string& path, const char* key, std::int64_t fallback) {
  const json* v = member(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v->get<std::int64_t>();
}

const json& require_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  return v;
}

template <class T, class Parse>
std::vector<T> get_list(const json& obj, const std::string& path, const char* key, std::vector<T> fallback,
                        Parse&& parse) {
  const json* v = member(obj, key);
  if (!v) return fallback;
  const std::string p = join(path, key);
  if (!v->is_array()) throw ConfigError(p, "expected an array");
  if (v->empty()) throw ConfigError(p, "must not be empty");
  std::vector<T> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& e = (*v)[i];
    const std::string ep = p + "[" + std::to_string(i) + "]";
    if (!e.is_string()) throw ConfigError(ep, "expected a string");
    try {
      T x = parse(e.get<std::string>());
      if (std::find(out.begin(), out.end(), x) != out.end()) throw ConfigError(ep, "duplicate entry");
      out.push_back(x);
    } catch (const DomainError& err) {
      throw ConfigError(ep, err.what());
    }
  }
  return out;
}

SweepSpec parse_sweep(const json& v, const std::string& path) {
  require_object(v, path);
  reject_unknown(v, path, {"axis", "values", "scenarios", "evaluators", "outputs"});
  SweepSpec s;
  const json* axis = member(v, "axis");
  if (!axis) throw ConfigError(join(path, "axis"), "required");
  if (!axis->is_string()) throw ConfigError(join(path, "axis"), "expected a string");
  try {
    s.axis = parse_axis(axis->get<std::string>());
  } catch (const DomainError& e) {
    throw ConfigError(join(path, "axis"), e.what());
  }

  const json* vals = member(v, "values");
  const std::string vp = join(path, "values");
  if (!vals) throw ConfigError(vp, "required");
  if (!vals->is_array()) throw ConfigError(vp, "expected an array");
  if (vals->empty()) throw ConfigError(vp, "must not be empty");
  for (std::size_t i = 0; i < vals->size(); ++i) {
    const json& e = (*vals)[i];
    const std::string ep = vp + "[" + std::to_string(i) + "]";
    if (!e.is_number()) throw ConfigError(ep, "expected a number");
    const double x = e.get<double>();
    if (!std::isfinite(x)) throw ConfigError(ep, "must be finite");
    if (s.axis == Axis::k_eves && (x < 1 || x != std::floor(x))) throw ConfigError(ep, "K must be a positive integer");
    if (s.axis == Axis::aperture_len && !(x > 0)) throw ConfigError(ep, "aperture length must be positive");
    if (!s.values.empty() && !(x > s.values.back())) throw ConfigError(ep, "values must be strictly increasing");
    s.values.push_back(x);
  }
  s.scenarios = get_list<Scenario>(v, path, "scenarios", s.scenarios, [](const std::string& x) { return parse_scenario(x); });
  s.evaluators = get_list<Evaluator>(v, path, "evaluators", s.evaluators,
                                     [](const std::string& x) { return parse_evaluator(x); });
  s.outputs = get_list<Metric>(v, path, "outputs", s.outputs, [](const std::string& x) { return parse_metric(x); });
  return s;
}

}  // namespace

SystemConfig parse_config(const json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"preset", "system", "numerics", "monte_carlo", "sweeps", "sweep"});
  SystemConfig c;
  if (const json* p = member(doc, "preset")) {
    if (!p->is_string()) throw ConfigError("preset", "expected a string");
    if (p->get<std::string>() != "table1") throw ConfigError("preset", "only \"table1\" is defined");
  }

  if (const json* s = member(doc, "system")) {
    require_object(*s, "system");
    reject_unknown(*s, "system", {"wavelength_m", "aperture_len_m", "gamma_b_db", "gamma_e_db", "k_eves", "r0"});
    c.wavelength_m = get_number(*s, "system", "wavelength_m", c.wavelength_m);
    // the aperture default follows the wavelength unless given
    c.aperture_len_m = get_number(*s, "system", "aperture_len_m", 40 * c.wavelength_m);
    c.gamma_b_db = get_number(*s, "system", "gamma_b_db", c.gamma_b_db);
    c.gamma_e_db = get_number(*s, "system", "gamma_e_db", c.gamma_e_db);
    c.k_eves = static_cast<int>(get_integer(*s, "system", "k_eves", c.k_eves));
    c.r0 = get_number(*s, "system", "r0", c.r0);
  }
  if (!(c.wavelength_m > 0)) throw ConfigError("system.wavelength_m", "must be positive");
  if (!(c.aperture_len_m > 0)) throw ConfigError("system.aperture_len_m", "must be positive");
  if (c.k_eves < 1) throw ConfigError("system.k_eves", "must be at least 1");
  if (!(c.r0 > 0)) throw ConfigError("system.r0", "must be positive");

  if (const json* n = member(doc, "numerics")) {
    require_object(*n, "numerics");
    reject_unknown(*n, "numerics", {"q_floor", "t", "series_tol", "epsilon_floor", "precision"});
    c.q_floor = static_cast<int>(get_integer(*n, "numerics", "q_floor", c.q_floor));
    c.t = static_cast<int>(get_integer(*n, "numerics", "t", c.t));
    c.series_tol = get_number(*n, "numerics", "series_tol", c.series_tol);
    c.epsilon_floor = get_number(*n, "numerics", "epsilon_floor", c.epsilon_floor);
    if (const json* p = member(*n, "precision")) {
      if (!p->is_string()) throw ConfigError("numerics.precision", "expected a string");
      c.precision = parse_precision(p->get<std::string>(), "numerics.precision");
    }
  }
  if (c.q_floor < 1 || c.q_floor > 2000) throw ConfigError("numerics.q_floor", "must lie in [1, 2000]");
  if (c.t < 8) throw ConfigError("numerics.t", "must be at least 8");
  if (!(c.series_tol > 0 && c.series_tol < 1)) throw ConfigError("numerics.series_tol", "must lie in (0, 1)");
  if (!(c.epsilon_floor > 0 && c.epsilon_floor < 1)) throw ConfigError("numerics.epsilon_floor", "must lie in (0, 1)");

  if (const json* m = member(doc, "monte_carlo")) {
    require_object(*m, "monte_carlo");
    reject_unknown(*m, "monte_carlo", {"trials", "seed"});
    c.trials = get_integer(*m, "monte_carlo", "trials", c.trials);
    const json* seed = member(*m, "seed");
    if (seed) {
      if (!seed->is_number_unsigned()) throw ConfigError("monte_carlo.seed", "expected a nonnegative integer");
      c.seed = seed->get<std::uint64_t>();
    }
  }
  if (c.trials < 1) throw ConfigError("monte_carlo.trials", "must be positive");

  const json* sweeps = member(doc, "sweeps");
  const json* single = member(doc, "sweep");
  if (sweeps && single) throw ConfigError("sweep", "give either \"sweep\" or \"sweeps\", not both");
  if (single) c.sweeps.push_back(parse_sweep(*single, "sweep"));
  if (sweeps) {
    if (!sweeps->is_array()) throw ConfigError("sweeps", "expected an array");
    for (std::size_t i = 0; i < sweeps->size(); ++i)
      c.sweeps.push_back(parse_sweep((*sweeps)[i], "sweeps[" + std::to_string(i) + "]"));
  }
  return c;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const SystemConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["system"] = {{"wavelength_m", c.wavelength_m}, {"aperture_len_m", c.aperture_len_m},
                 {"gamma_b_db", c.gamma_b_db},     {"gamma_e_db", c.gamma_e_db},
                 {"k_eves", c.k_eves},             {"r0", c.r0}};
  j["numerics"] = {{"q_floor", c.q_floor},
                   {"t", c.t},
                   {"series_tol", c.series_tol},
                   {"epsilon_floor", c.epsilon_floor},
                   {"precision", std::string(precision_name(c.precision))}};
  j["monte_carlo"] = {{"trials", c.trials}, {"seed", c.seed}};
  json sw = json::array();
  for (const auto& s : c.sweeps) {
    json e;
    e["axis"] = std::string(to_string(s.axis));
    e["values"] = s.values;
    json sc = json::array(), ev = json::array(), out = json::array();
    for (auto x : s.scenarios) sc.push_back(std::string(to_string(x)));
    for (auto x : s.evaluators) ev.push_back(std::string(to_string(x)));
    for (auto x : s.outputs) out.push_back(std::string(to_string(x)));
    e["scenarios"] = sc;
    e["evaluators"] = ev;
    e["outputs"] = out;
    sw.push_back(e);
  }
  j["sweeps"] = sw;
  return j;
}

}  // namespace capa
