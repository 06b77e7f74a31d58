#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "capa/config.hpp"
#include "capa/plotdata.hpp"
#include "capa/spectral.hpp"
#include "capa/sweep.hpp"

using namespace capa;

namespace {

std::string cache_dir_from_env() {
  const char* d = std::getenv("CAPA_CACHE_DIR");
  return d ? d : "";
}

int cmd_sweep(const std::string& config_path, const std::string& out_path, std::int64_t trials, std::int64_t seed,
              const std::vector<std::string>& evaluators, int threads, bool timing) {
  SystemConfig cfg;
  SweepOptions opt;
  try {
    cfg = load_config(config_path);
    if (cfg.sweeps.empty()) throw ConfigError("sweeps", "no sweep defined");
    for (std::size_t i = 0; i < evaluators.size(); ++i) {
      try {
        opt.evaluators.push_back(parse_evaluator(evaluators[i]));
      } catch (const DomainError& e) {
        throw ConfigError("--evaluator[" + std::to_string(i) + "]", e.what());
      }
    }
    if (trials != 0) {
      if (trials < 1) throw ConfigError("--trials", "must be positive");
      opt.trials = trials;
    }
    if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  opt.threads = threads;
  opt.timing = timing;
  opt.cache_dir = cache_dir_from_env();

  const SweepResult res = run_sweep(cfg, opt);
  if (out_path.empty()) {
    write_csv(res, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "cannot write " << out_path << '\n';
      return 1;
    }
    write_csv(res, out);
  }
  std::cerr << "# summary\n";
  for (const auto& s : res.summary) std::cerr << "# " << s << '\n';
  std::cerr << "# rows=" << res.rows.size() << " errors=" << res.errors << " sop_clamped=" << res.clamped << '\n';
  return res.errors > 0 ? 1 : 0;
}

int cmd_spectrum(double lambda, double length, int t, double floor) {
  std::string warning;
  const auto geom = ApertureGeometry::make(lambda, length, &warning);
  if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
  const auto spec = decompose_cached(geom, t, floor, cache_dir_from_env());
  std::printf("index,sigma,epsilon\n");
  for (std::size_t i = 0; i < spec.sigmas.size(); ++i)
    std::printf("%zu,%.17g,%.17g\n", i + 1, spec.sigmas[i], spec.epsilons[i]);
  std::fprintf(stderr, "# dof=%d sigma_min=%.6g trace_residual=%.3e landau(0.5)=%d predicted=%.2f\n", spec.dof,
               spec.sigma_min, spec.trace_residual(), landau_count(spec, 0.5), landau_prediction(spec.dof, 0.5));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CAPA wiretap secrecy analytics"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "run the parameter sweeps of a config and write CSV rows");
  std::string config_path, out_path;
  std::int64_t trials = 0, seed = -1;
  std::vector<std::string> evaluators;
  int threads = 0;
  bool timing = false;
  sweep->add_option("--config", config_path, "JSON config")->required();
  sweep->add_option("--out", out_path, "CSV output (default stdout)");
  sweep->add_option("--trials", trials, "Monte Carlo trials per point");
  sweep->add_option("--seed", seed, "Monte Carlo seed");
  sweep->add_option("--evaluator", evaluators, "evaluators to run (repeatable)");
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)");
  sweep->add_flag("--timing", timing, "fill the wall_ms column");

  auto* spectrum = app.add_subcommand("spectrum", "print the kernel eigenvalue profile");
  double lambda = 0.1249, length = 40 * 0.1249, floor = 1e-8;
  int t = 1000;
  spectrum->add_option("--lambda", lambda, "wavelength in metres")->required();
  spectrum->add_option("--length", length, "aperture length in metres")->required();
  spectrum->add_option("--t", t, "quadrature order");
  spectrum->add_option("--floor", floor, "normalized eigenvalue floor");

  auto* plot = app.add_subcommand("plotdata", "split a sweep CSV into per-figure files");
  std::string csv_in, outdir = ".";
  plot->add_option("csv", csv_in, "sweep CSV")->required();
  plot->add_option("--outdir", outdir, "output directory");

  auto* config = app.add_subcommand("config", "print a config with every default made explicit");
  std::string show_path;
  config->add_option("--config", show_path, "JSON config (default: the table1 preset)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sweep) return cmd_sweep(config_path, out_path, trials, seed, evaluators, threads, timing);
    if (*spectrum) return cmd_spectrum(lambda, length, t, floor);
    if (*plot) {
      try {
        for (const auto& p : emit_plotdata(csv_in, outdir)) std::cerr << "wrote " << p << '\n';
      } catch (const PlotDataError& e) {
        std::cerr << "plotdata: " << e.what() << '\n';
        return 2;
      }
      return 0;
    }
    if (*config) {
      SystemConfig c = table1_preset();
      if (!show_path.empty()) {
        try {
          c = load_config(show_path);
        } catch (const ConfigError& e) {
          std::cerr << "config error: " << e.what() << '\n';
          return 2;
        }
      }
      std::cout << to_json(c).dump(2) << '\n';
      return 0;
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
