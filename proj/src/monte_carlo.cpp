#include "capa/monte_carlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

#include "capa/simd.hpp"
#include "capa/specfun.hpp"

namespace capa {

void Welford::merge(const Welford& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double total = static_cast<double>(n + o.n);
  const double d = o.mean - mean;
  mean += d * static_cast<double>(o.n) / total;
  m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
  n += o.n;
}

double Welford::std_err() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (block + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Runs body(rng, count, accs) for each block and merges accumulators in block order,
// so the result does not depend on the thread count.
template <int NAcc, class Body>
std::array<Welford, NAcc> run_blocks(std::int64_t n_trials, std::uint64_t seed, const McOptions& opt, Body&& body) {
  if (n_trials < 1) throw DomainError("Monte Carlo needs at least one trial");
  if (opt.block < 1) throw DomainError("Monte Carlo block size must be positive");
  const std::int64_t nblocks = (n_trials + opt.block - 1) / opt.block;
  std::vector<std::array<Welford, NAcc>> parts(nblocks);
  unsigned hw = opt.threads > 0 ? static_cast<unsigned>(opt.threads) : std::max(1u, std::thread::hardware_concurrency());
  const auto nthreads = static_cast<unsigned>(std::min<std::int64_t>(hw, nblocks));

  auto worker = [&](unsigned t) {
    for (std::int64_t b = t; b < nblocks; b += nthreads) {
      Rng rng(block_seed(seed, static_cast<std::uint64_t>(b)));
      const std::int64_t count = std::min<std::int64_t>(opt.block, n_trials - b * opt.block);
      body(rng, count, parts[b]);
    }
  };
  if (nthreads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  std::array<Welford, NAcc> total{};
  for (const auto& p : parts)
    for (int i = 0; i < NAcc; ++i) total[i].merge(p[i]);
  return total;
}

McEstimate to_estimate(const Welford& w, std::uint64_t seed) {
  return {w.mean, w.std_err(), w.n, seed};
}

McSecrecy secrecy_from_samplers(double r0, std::int64_t n_trials, std::uint64_t seed, const McOptions& opt,
                                const std::vector<double>& bob_weights, const LinkBudget& eve) {
  if (!(r0 > 0.0)) throw DomainError("target rate must be positive");
  const double s = std::exp2(r0);
  auto body = [&](Rng& rng, std::int64_t count, std::array<Welford, 2>& acc) {
    std::vector<double> scratch;
    for (std::int64_t i = 0; i < count; ++i) {
      const double rb = sample_bob(bob_weights, 1.0, rng, scratch);
      const double re = sample_eve(eve, rng);
      acc[0].add(std::max(0.0, std::log2(1.0 + rb) - std::log2(1.0 + re)));
      acc[1].add(rb < s * (1.0 + re) - 1.0 ? 1.0 : 0.0);
    }
  };
  const auto acc = run_blocks<2>(n_trials, seed, opt, body);
  return {to_estimate(acc[0], seed), to_estimate(acc[1], seed)};
}

}  // namespace

McSecrecy mc_secrecy(const LinkBudget& lb, const std::vector<double>& bob_sigmas, double r0, std::int64_t n_trials,
                     std::uint64_t seed, const McOptions& opt) {
  if (bob_sigmas.empty()) throw DomainError("mc_secrecy: no eigenvalues");
  std::vector<double> w(bob_sigmas);
  for (double& x : w) x *= lb.gamma_bar_b;
  return secrecy_from_samplers(r0, n_trials, seed, opt, w, lb);
}

McSecrecy mc_secrecy(const LinkBudget& lb, const SpectralDecomposition& spec, double r0, std::int64_t n_trials,
                     std::uint64_t seed, const McOptions& opt) {
  return mc_secrecy(lb, spec.leading_sigmas(), r0, n_trials, seed, opt);
}

EveRatioEstimate mc_exact_eve(const std::vector<double>& sigmas, double wavelength_m, std::int64_t n_trials,
                              std::uint64_t seed, const McOptions& opt) {
  if (sigmas.empty()) throw DomainError("mc_exact_eve: no eigenvalues");
  if (!(wavelength_m > 0.0)) throw DomainError("mc_exact_eve: wavelength must be positive");
  const double half = wavelength_m / 2.0;
  std::vector<double> sq(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) sq[i] = sigmas[i] * sigmas[i];
  auto body = [&](Rng& rng, std::int64_t count, std::array<Welford, 1>& acc) {
    std::vector<double> e(sigmas.size());
    for (std::int64_t i = 0; i < count; ++i) {
      for (double& x : e) x = unit_exponential(rng);
      const double num = simd::dot(sq.data(), e.data(), e.size());
      const double den = simd::dot(sigmas.data(), e.data(), e.size());
      acc[0].add(num / den / half);
    }
  };
  const auto acc = run_blocks<1>(n_trials, seed, opt, body);
  EveRatioEstimate out;
  out.ratio = to_estimate(acc[0], seed);
  out.cv = acc[0].mean != 0.0 ? std::sqrt(acc[0].variance()) / acc[0].mean : 0.0;
  return out;
}

EveRatioEstimate mc_exact_eve(const LinkBudget&, const SpectralDecomposition& spec, std::int64_t n_trials,
                              std::uint64_t seed, const McOptions& opt) {
  return mc_exact_eve(spec.sigmas, spec.geom.wavelength_m, n_trials, seed, opt);
}

double spda_element_ratio() { return 2.0 / (5.0 * std::sqrt(4.0 * M_PI)); }

int spda_element_count(const ApertureGeometry& geom) {
  return static_cast<int>(std::floor(2.0 * geom.aperture_len_m / geom.wavelength_m + 1e-9));
}

McSecrecy spda_baseline(const LinkBudget& lb, const ApertureGeometry& geom, double r0, std::int64_t n_trials,
                        std::uint64_t seed, const McOptions& opt) {
  const int n_el = spda_element_count(geom);
  if (n_el < 2) throw DomainError("spda_baseline: need at least two half-wavelength elements");
  const double a_el = spda_element_ratio();
  const std::vector<double> w(n_el, lb.gamma_bar_b * (geom.wavelength_m / 2.0) * a_el);
  LinkBudget eve = lb;
  eve.gamma_bar_e = lb.gamma_bar_e * a_el;
  return secrecy_from_samplers(r0, n_trials, seed, opt, w, eve);
}

}  // namespace capa
