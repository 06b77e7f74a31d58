#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "capa/config.hpp"

namespace capa {

struct SweepOptions {
  int threads = 0;  // 0 = hardware concurrency
  bool timing = false;
  std::string cache_dir;  // spectrum cache; empty disables the disk cache
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::vector<Evaluator> evaluators;  // replaces every sweep's list when nonempty
};

struct SweepRow {
  std::string axis;
  double value = 0.0;
  Scenario scenario = Scenario::SE;
  Evaluator evaluator = Evaluator::quadrature;
  Metric metric = Metric::rate;
  double result = 0.0;
  std::string error;  // tag such as "precision-loss"; result is unused when set
  std::optional<double> std_err;
  std::optional<std::uint64_t> seed;
  std::optional<double> wall_ms;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t errors = 0;
  std::size_t clamped = 0;
  std::vector<std::string> summary;  // spectrum diagnostics, one line each
};

extern const char* const kCsvHeader;

SweepResult run_sweep(const SystemConfig& cfg, const SweepOptions& opt);
std::string format_row(const SweepRow& row);
void write_csv(const SweepResult& res, std::ostream& out);

}  // namespace capa
