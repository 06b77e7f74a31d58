#include "capa/snr_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "capa/simd.hpp"
#include "capa/specfun.hpp"

namespace capa {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::SE: return "SE";
    case Scenario::MIE: return "MIE";
    case Scenario::MCE: return "MCE";
  }
  return "?";
}

Scenario parse_scenario(std::string_view s) {
  if (s == "SE") return Scenario::SE;
  if (s == "MIE") return Scenario::MIE;
  if (s == "MCE") return Scenario::MCE;
  throw DomainError("unknown scenario '" + std::string(s) + "' (expected SE, MIE or MCE)");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

LinkBudget LinkBudget::make(double gamma_bar_b, double gamma_bar_e, int k_eves, Scenario scenario) {
  if (!(gamma_bar_b > 0.0) || !std::isfinite(gamma_bar_b)) throw DomainError("gamma_bar_b must be positive");
  if (!(gamma_bar_e > 0.0) || !std::isfinite(gamma_bar_e)) throw DomainError("gamma_bar_e must be positive");
  if (k_eves < 1) throw DomainError("k_eves must be at least 1");
  LinkBudget lb;
  lb.gamma_bar_b = gamma_bar_b;
  lb.gamma_bar_e = gamma_bar_e;
  lb.k_eves = scenario == Scenario::SE ? 1 : k_eves;
  lb.scenario = scenario;
  return lb;
}

LinkBudget LinkBudget::from_db(double gamma_b_db, double gamma_e_db, int k_eves, Scenario scenario) {
  return make(db_to_linear(gamma_b_db), db_to_linear(gamma_e_db), k_eves, scenario);
}

double MoschopoulosSeries::weight_sum() const {
  long double s = 0.0L;
  for (double w : weights) s += w;
  return static_cast<double>(s);
}

namespace {

MoschopoulosSeries build(const std::vector<double>& sigmas, int q_floor, double tol, int q_cap) {
  if (sigmas.empty()) throw DomainError("build_psi: no eigenvalues");
  for (double s : sigmas)
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("build_psi: eigenvalues must be positive");
  if (q_floor < 1 || q_cap < q_floor) throw DomainError("build_psi: need 1 <= q_floor <= q_cap");

  MoschopoulosSeries ms;
  ms.sigmas = sigmas;
  ms.dof = static_cast<int>(sigmas.size());
  ms.sigma_min = *std::min_element(sigmas.begin(), sigmas.end());

  double log_prod = 0.0;
  std::vector<double> r(sigmas.size());
  for (std::size_t l = 0; l < sigmas.size(); ++l) {
    log_prod += std::log(sigmas[l]);
    r[l] = 1.0 - ms.sigma_min / sigmas[l];
  }
  ms.log_sigma_product = log_prod;
  ms.log_weight_prefix = ms.dof * std::log(ms.sigma_min) - log_prod;
  ms.weight_prefix = std::exp(ms.log_weight_prefix);

  std::vector<double> power(q_cap);
  simd::power_sums(r.data(), r.size(), power.size(), power.data());

  // the mixture weights obey the same recursion as psi, scaled by the prefix
  std::vector<long double> w;
  w.reserve(q_floor + 1);
  w.push_back(std::exp(static_cast<long double>(ms.log_weight_prefix)));
  long double total = w[0];
  int q = 0;
  while (true) {
    const bool converged = (1.0L - total) <= tol;
    if ((q >= q_floor && converged) || q >= q_cap) break;
    ++q;
    long double acc = 0.0L;
    for (int k = 1; k <= q; ++k) acc += static_cast<long double>(power[k - 1]) * w[q - k];
    w.push_back(acc / q);
    total += w.back();
  }
  ms.q_max = q;
  ms.residual = static_cast<double>(1.0L - total);
  ms.weights.resize(w.size());
  ms.psis.resize(w.size());
  ms.log_psis.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    ms.weights[i] = static_cast<double>(w[i]);
    ms.log_psis[i] = w[i] > 0 ? static_cast<double>(std::log(w[i])) - ms.log_weight_prefix
                              : -std::numeric_limits<double>::infinity();
    ms.psis[i] = i == 0 ? 1.0 : std::exp(ms.log_psis[i]);
  }
  return ms;
}

// ln k, tabulated once for the ranges the mixtures use
double log_int(int k) {
  static const std::vector<double> table = [] {
    std::vector<double> t(1 << 16);
    t[0] = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = std::log(static_cast<double>(i));
    return t;
  }();
  return k < static_cast<int>(table.size()) ? table[k] : std::log(static_cast<double>(k));
}

}  // namespace

MoschopoulosSeries build_psi(const std::vector<double>& sigmas, const SeriesOptions& opt) {
  return build(sigmas, opt.q_floor, opt.series_tol, opt.q_cap);
}

MoschopoulosSeries build_psi(const SpectralDecomposition& spec, const SeriesOptions& opt) {
  if (static_cast<int>(spec.sigmas.size()) < spec.dof) throw DomainError("build_psi: fewer eigenvalues than dof");
  return build_psi(spec.leading_sigmas(), opt);
}

MoschopoulosSeries build_psi_fixed(const std::vector<double>& sigmas, int q_max) {
  return build(sigmas, q_max, -1.0, q_max);
}

namespace {

// ln(t^a e^{-t} / a!) for a running downward or upward; callers step it.
struct PoissonTerm {
  double log_t;
  double t;
  double at(int a) const { return a * log_t - t - std::lgamma(a + 1.0); }
};

}  // namespace

double bob_cdf(double x, const LinkBudget& lb, const MoschopoulosSeries& ms) {
  if (!(x > 0.0)) return 0.0;
  const double t = x / (lb.gamma_bar_b * ms.sigma_min);
  const int n0 = ms.dof;
  const int top = n0 + ms.q_max;
  double p = reg_lower_gamma<double>(top, t);
  const PoissonTerm pt{std::log(t), t};
  double ld = pt.at(top - 1);
  const double lt = std::log(t);
  long double acc = static_cast<long double>(ms.weights[ms.q_max]) * p;
  for (int a = top - 1; a >= n0; --a) {
    // P(a, t) = P(a+1, t) + t^a e^{-t} / a!
    p += std::exp(ld);
    ld += log_int(a) - lt;
    acc += static_cast<long double>(ms.weights[a - n0]) * p;
  }
  return std::clamp(static_cast<double>(acc), 0.0, 1.0);
}

double bob_sf(double x, const LinkBudget& lb, const MoschopoulosSeries& ms) {
  if (!(x > 0.0)) return ms.weight_sum();
  const double t = x / (lb.gamma_bar_b * ms.sigma_min);
  const int n0 = ms.dof;
  double qv = reg_upper_gamma<double>(n0, t);
  const double lt = std::log(t);
  double ld = n0 * lt - t - std::lgamma(n0 + 1.0);
  long double acc = static_cast<long double>(ms.weights[0]) * qv;
  for (int q = 1; q <= ms.q_max; ++q) {
    const int a = n0 + q - 1;
    // Q(a+1, t) = Q(a, t) + t^a e^{-t} / a!
    qv += std::exp(ld);
    ld += lt - log_int(a + 1);
    acc += static_cast<long double>(ms.weights[q]) * qv;
  }
  return std::max(0.0, static_cast<double>(acc));
}

double bob_pdf(double x, const LinkBudget& lb, const MoschopoulosSeries& ms) {
  if (x < 0.0) return 0.0;
  const double beta = lb.gamma_bar_b * ms.sigma_min;
  const int n0 = ms.dof;
  if (x == 0.0) return n0 == 1 ? ms.weights[0] / beta : 0.0;
  const double t = x / beta;
  const double lt = std::log(t);
  // gamma(n0 + q, beta) density at x
  double ld = (n0 - 1) * lt - t - std::lgamma(static_cast<double>(n0));
  long double acc = 0.0L;
  for (int q = 0; q <= ms.q_max; ++q) {
    acc += static_cast<long double>(ms.weights[q]) * std::exp(ld);
    ld += lt - log_int(n0 + q);
  }
  return static_cast<double>(acc) / beta;
}

double eve_pdf(double x, const LinkBudget& lb) {
  if (x < 0.0) return 0.0;
  const double g = lb.gamma_bar_e;
  const int k = lb.k_eves;
  switch (lb.scenario) {
    case Scenario::SE: return std::exp(-x / g) / g;
    case Scenario::MIE:
      if (k == 1) return std::exp(-x / g) / g;
      return k * std::pow(-std::expm1(-x / g), k - 1) * std::exp(-x / g) / g;
    case Scenario::MCE:
      if (x == 0.0) return k == 1 ? 1.0 / g : 0.0;
      return std::exp((k - 1) * std::log(x / g) - x / g - std::lgamma(static_cast<double>(k))) / g;
  }
  return 0.0;
}

double eve_cdf(double x, const LinkBudget& lb) {
  if (!(x > 0.0)) return 0.0;
  const double g = lb.gamma_bar_e;
  switch (lb.scenario) {
    case Scenario::SE: return -std::expm1(-x / g);
    case Scenario::MIE: return std::pow(-std::expm1(-x / g), lb.k_eves);
    case Scenario::MCE: return reg_lower_gamma<double>(lb.k_eves, x / g);
  }
  return 0.0;
}

double eve_sf(double x, const LinkBudget& lb) {
  if (!(x > 0.0)) return 1.0;
  const double g = lb.gamma_bar_e;
  switch (lb.scenario) {
    case Scenario::SE: return std::exp(-x / g);
    case Scenario::MIE: return -std::expm1(lb.k_eves * std::log1p(-std::exp(-x / g)));
    case Scenario::MCE: return reg_upper_gamma<double>(lb.k_eves, x / g);
  }
  return 1.0;
}

double sample_bob(const std::vector<double>& sigmas, double gamma_bar_b, Rng& rng, std::vector<double>& scratch) {
  scratch.resize(sigmas.size());
  for (double& e : scratch) e = unit_exponential(rng);
  return gamma_bar_b * simd::dot(sigmas.data(), scratch.data(), sigmas.size());
}

double sample_bob(const MoschopoulosSeries& ms, const LinkBudget& lb, Rng& rng) {
  thread_local std::vector<double> scratch;
  return sample_bob(ms.sigmas, lb.gamma_bar_b, rng, scratch);
}

double sample_eve(const LinkBudget& lb, Rng& rng) {
  const double g = lb.gamma_bar_e;
  switch (lb.scenario) {
    case Scenario::SE: return g * unit_exponential(rng);
    case Scenario::MIE: {
      double m = 0.0;
      for (int k = 0; k < lb.k_eves; ++k) m = std::max(m, unit_exponential(rng));
      return g * m;
    }
    case Scenario::MCE: {
      double s = 0.0;
      for (int k = 0; k < lb.k_eves; ++k) s += unit_exponential(rng);
      return g * s;
    }
  }
  return 0.0;
}

}  // namespace capa
