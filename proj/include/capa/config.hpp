#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capa/secrecy.hpp"
#include "capa/snr_models.hpp"

namespace capa {

enum class Axis { gamma_b_db, gamma_e_db, aperture_len, k_eves };
enum class Metric { rate, sop, slope, offset, gain };

std::string_view to_string(Axis a);
std::string_view to_string(Metric m);
Axis parse_axis(std::string_view s);
Metric parse_metric(std::string_view s);

// Rate and SOP come from every evaluator; slope, offset and gain only from the asymptotic one.
bool evaluator_supports(Evaluator ev, Metric m);

struct ConfigError : std::runtime_error {
  std::string path;  // e.g. "sweeps[0].scenarios"
  ConfigError(std::string field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), path(std::move(field)) {}
};

struct SweepSpec {
  Axis axis = Axis::gamma_b_db;
  std::vector<double> values;
  std::vector<Scenario> scenarios{Scenario::SE, Scenario::MIE, Scenario::MCE};
  std::vector<Evaluator> evaluators{Evaluator::quadrature, Evaluator::monte_carlo, Evaluator::spda_mc};
  std::vector<Metric> outputs{Metric::rate, Metric::sop};

  bool operator==(const SweepSpec&) const = default;
};

struct SystemConfig {
  std::string preset = "table1";
  double wavelength_m = 0.1249;
  double aperture_len_m = 40 * 0.1249;
  double gamma_b_db = 20.0;
  double gamma_e_db = 20.0;
  int k_eves = 5;
  double r0 = 3.0;
  // numerics
  int q_floor = 160;
  int t = 1000;
  double series_tol = 1e-8;
  double epsilon_floor = 1e-8;
  PrecisionMode precision = PrecisionMode::automatic;
  // Monte Carlo
  std::int64_t trials = 200000;
  std::uint64_t seed = 1;
  std::vector<SweepSpec> sweeps;

  bool operator==(const SystemConfig&) const = default;

  SeriesOptions series_options() const;
  EvalPrecision eval_precision() const;
};

SystemConfig table1_preset();

// Throws ConfigError naming the offending field.
SystemConfig parse_config(const nlohmann::json& doc);
SystemConfig load_config(const std::string& path);
// Every field explicit, so parse_config(to_json(c)) == c.
nlohmann::json to_json(const SystemConfig& c);

}  // namespace capa
