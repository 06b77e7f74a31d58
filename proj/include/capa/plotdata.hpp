#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace capa {

struct PlotDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Splits a sweep CSV into one wide file per (metric, axis), named
// <metric>_<axis>.csv, with a `value` column followed by one column per
// scenario/evaluator series (and a matching std_err column for stochastic
// series). Error rows become empty cells. Returns the written paths in order.
std::vector<std::string> emit_plotdata(const std::string& csv_path, const std::string& outdir);

}  // namespace capa
