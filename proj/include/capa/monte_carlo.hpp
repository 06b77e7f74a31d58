#pragma once

#include <cstdint>
#include <vector>

#include "capa/snr_models.hpp"
#include "capa/spectral.hpp"

namespace capa {

struct McEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::int64_t n_trials = 0;
  std::uint64_t seed = 0;
};

// Streaming mean/variance; merge is the parallel (Chan et al.) combination.
struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  void merge(const Welford& o);
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_err() const;
};

struct McSecrecy {
  McEstimate rate;
  McEstimate sop;
};

struct McOptions {
  int threads = 0;  // 0 = hardware concurrency
  int block = 4096;
};

// Seed for block b of a run seeded with `seed` (SplitMix64 finalizer).
std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block);

// Secrecy rate and outage from independent (rho_b, rho_e) draws. The Bob
// sampler uses the given eigenvalues (normally the first dof of the spectrum).
McSecrecy mc_secrecy(const LinkBudget& lb, const std::vector<double>& bob_sigmas, double r0, std::int64_t n_trials,
                     std::uint64_t seed, const McOptions& opt = {});
McSecrecy mc_secrecy(const LinkBudget& lb, const SpectralDecomposition& spec, double r0, std::int64_t n_trials,
                     std::uint64_t seed, const McOptions& opt = {});

struct EveRatioEstimate {
  McEstimate ratio;  // sum s^2 E / sum s E, divided by lambda/2
  double cv = 0.0;   // sample std / mean of the per-realization ratio
};

// Conditional variance of an Eve observation given Bob's channel, over all retained eigenvalues.
EveRatioEstimate mc_exact_eve(const std::vector<double>& sigmas, double wavelength_m, std::int64_t n_trials,
                              std::uint64_t seed, const McOptions& opt = {});
EveRatioEstimate mc_exact_eve(const LinkBudget& lb, const SpectralDecomposition& spec, std::int64_t n_trials,
                              std::uint64_t seed, const McOptions& opt = {});

// Half-wavelength discrete array with floor(2L/lambda) i.i.d. Rayleigh elements.
double spda_element_ratio();  // 2 / (5 sqrt(4 pi))
int spda_element_count(const ApertureGeometry& geom);
McSecrecy spda_baseline(const LinkBudget& lb, const ApertureGeometry& geom, double r0, std::int64_t n_trials,
                        std::uint64_t seed, const McOptions& opt = {});

}  // namespace capa
