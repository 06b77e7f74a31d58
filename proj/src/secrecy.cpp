#include "capa/secrecy.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace capa {

std::string_view to_string(Evaluator e) {
  switch (e) {
    case Evaluator::closed_form: return "closed-form";
    case Evaluator::quadrature: return "quadrature";
    case Evaluator::asymptotic: return "asymptotic";
    case Evaluator::monte_carlo: return "monte-carlo";
    case Evaluator::spda_mc: return "spda-mc";
  }
  return "?";
}

Evaluator parse_evaluator(std::string_view s) {
  if (s == "closed-form") return Evaluator::closed_form;
  if (s == "quadrature") return Evaluator::quadrature;
  if (s == "asymptotic") return Evaluator::asymptotic;
  if (s == "monte-carlo") return Evaluator::monte_carlo;
  if (s == "spda-mc") return Evaluator::spda_mc;
  throw DomainError("unknown evaluator '" + std::string(s) +
                    "' (expected closed-form, quadrature, asymptotic, monte-carlo or spda-mc)");
}

namespace {

constexpr double kLn2 = 0.69314718055994530942;

template <class F>
QuadResult integrate_pieces(F&& f, std::vector<double> breaks, double abs_tol, const char* what) {
  using boost::math::quadrature::gauss_kronrod;
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [](double b) { return !(b > 0.0) || !std::isfinite(b); }),
               breaks.end());
  breaks.push_back(0.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  breaks.push_back(std::numeric_limits<double>::infinity());

  // A coarse pass sizes each piece. Pieces that carry a negligible share of
  // the total only need to be good relative to the total, otherwise roundoff
  // in a near-zero piece drives the recursion to full depth.
  const std::size_t n = breaks.size() - 1;
  std::vector<double> l1(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gauss_kronrod<double, 61>::integrate(f, breaks[i], breaks[i + 1], 0, 0.0, nullptr, &l1[i]);
    total += l1[i];
  }
  QuadResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(l1[i] > 0.0)) continue;
    const double tol = std::clamp(1e-12 * total / l1[i], 1e-11, 1e-3);
    double err = 0.0;
    const double v = gauss_kronrod<double, 61>::integrate(f, breaks[i], breaks[i + 1], 15, tol, &err);
    out.value += v;
    out.abs_error += err;
  }
  if (!std::isfinite(out.value) || out.abs_error > abs_tol)
    throw QuadratureError(std::string(what) + ": quadrature reached only " + std::to_string(out.abs_error),
                          out.abs_error);
  return out;
}

double sigma_sum(const MoschopoulosSeries& ms) { return std::accumulate(ms.sigmas.begin(), ms.sigmas.end(), 0.0); }

std::vector<double> scales(const LinkBudget& lb, const MoschopoulosSeries& ms) {
  const double beta = lb.gamma_bar_b * ms.sigma_min;
  const double mb = lb.gamma_bar_b * sigma_sum(ms);
  const double ge = lb.gamma_bar_e;
  return {beta, 0.01 * beta, mb, 4.0 * mb, 16.0 * mb, ge, 0.01 * ge, lb.k_eves * ge, 8.0 * lb.k_eves * ge};
}

// E ln(1 + rho_e) style term Y of the offset, per scenario
double offset_eve_term(const LinkBudget& lb) {
  switch (lb.scenario) {
    case Scenario::SE: return scaled_e1(1.0 / lb.gamma_bar_e);
    case Scenario::MIE: return lemma::independent_offset_term(lb.k_eves, lb.gamma_bar_e);
    case Scenario::MCE: return scaled_e1(1.0 / (lb.k_eves * lb.gamma_bar_e));
  }
  return 0.0;
}

// X_m of the array-gain sum
long double gain_weight(const LinkBudget& lb, int dof, int m) {
  switch (lb.scenario) {
    case Scenario::SE: return 1.0L;
    case Scenario::MIE: return lemma::independent_gain_term(lb.k_eves, dof, m);
    case Scenario::MCE: return std::exp(static_cast<long double>(log_binomial(dof - m + lb.k_eves - 1, lb.k_eves - 1)));
  }
  return 1.0L;
}

}  // namespace

QuadResult secrecy_rate_quadrature(const LinkBudget& lb, const MoschopoulosSeries& ms, double abs_tol) {
  auto f = [&](double x) { return bob_sf(x, lb, ms) * eve_cdf(x, lb) / (1.0 + x); };
  QuadResult r = integrate_pieces(f, scales(lb, ms), abs_tol * kLn2, "secrecy_rate_quadrature");
  r.value = std::max(0.0, r.value / kLn2);
  r.abs_error /= kLn2;
  return r;
}

QuadResult bob_ergodic_rate(const LinkBudget& lb, const MoschopoulosSeries& ms, double abs_tol) {
  auto f = [&](double x) { return std::log1p(x) * bob_pdf(x, lb, ms); };
  QuadResult r = integrate_pieces(f, scales(lb, ms), abs_tol * kLn2, "bob_ergodic_rate");
  r.value /= kLn2;
  r.abs_error /= kLn2;
  return r;
}

QuadResult sop_quadrature(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0) {
  if (!(r0 > 0.0)) throw DomainError("sop_quadrature: target rate must be positive");
  const double s = std::exp2(r0);
  auto f = [&](double y) { return eve_pdf(y, lb) * bob_cdf(s * (1.0 + y) - 1.0, lb, ms); };
  const double ge = lb.gamma_bar_e;
  const double mb = lb.gamma_bar_b * sigma_sum(ms) / s;
  std::vector<double> br = {ge, 0.1 * ge, lb.k_eves * ge, 4.0 * lb.k_eves * ge, mb, 4.0 * mb};
  QuadResult r = integrate_pieces(f, br, 1e-9, "sop_quadrature");
  r.value = std::clamp(r.value, 0.0, 1.0);
  return r;
}

double high_snr_slope(const MoschopoulosSeries& ms) { return ms.weight_sum(); }

double high_snr_offset(const LinkBudget& lb, const MoschopoulosSeries& ms) {
  long double wh = 0.0L, w = 0.0L;
  for (int q = 0; q <= ms.q_max; ++q) {
    wh += static_cast<long double>(ms.weights[q]) * harmonic(ms.dof + q - 1);
    w += ms.weights[q];
  }
  const double bracket = euler_gamma<double>() + offset_eve_term(lb) - static_cast<double>(wh / w);
  return -std::log2(ms.sigma_min) + bracket / kLn2;
}

double asymptotic_rate(const LinkBudget& lb, const MoschopoulosSeries& ms) {
  const double head = std::log2(lb.gamma_bar_b * ms.sigma_min);
  const double y = offset_eve_term(lb) + euler_gamma<double>();
  long double acc = 0.0L;
  for (int q = 0; q <= ms.q_max; ++q)
    acc += static_cast<long double>(ms.weights[q]) * (head - (y - harmonic(ms.dof + q - 1)) / kLn2);
  return static_cast<double>(acc);
}

DiversityGain diversity_and_gain(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0) {
  if (!(r0 > 0.0)) throw DomainError("diversity_and_gain: target rate must be positive");
  const int n = ms.dof;
  const double s = std::exp2(r0);
  const double sg = s * lb.gamma_bar_e;
  const long double ratio = (s - 1.0) / sg;
  long double acc = 0.0L, term = 1.0L;
  for (int m = 0; m <= n; ++m) {
    if (m > 0) term *= ratio / m;
    acc += term * gain_weight(lb, n, m);
  }
  // psi_0 = 1 in this normalization
  const double log_ag = -std::log(sg) + (ms.log_sigma_product - static_cast<double>(std::log(acc))) / n;
  DiversityGain out;
  out.diversity_order = n;
  out.array_gain = std::exp(log_ag);
  out.asymptotic_sop = std::exp(-n * (log_ag + std::log(lb.gamma_bar_b)));
  return out;
}

Extended sop_leading_coefficient(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0) {
  using boost::multiprecision::exp;
  using boost::multiprecision::pow;
  const int n = ms.dof;
  const Extended s = pow(Extended(2), Extended(r0));
  const Extended sg = s * Extended(lb.gamma_bar_e);
  const Extended ratio = (s - 1) / sg;
  Extended acc = 0, term = 1;
  for (int m = 0; m <= n; ++m) {
    if (m > 0) term *= ratio / m;
    Extended x = 1;
    if (lb.scenario == Scenario::MIE) {
      const int k = lb.k_eves;
      Extended c = 1, sum = 0;
      for (int j = 0; j < k; ++j) {
        if (j > 0) c = c * Extended(k - j) / Extended(j);
        const Extended t = c * pow(Extended(1) / Extended(j + 1), n - m + 1);
        sum += (j % 2 == 0) ? t : Extended(-t);
      }
      x = Extended(k) * sum;
    } else if (lb.scenario == Scenario::MCE) {
      x = 1;
      for (int i = 1; i <= lb.k_eves - 1; ++i) x = x * Extended(n - m + i) / Extended(i);
    }
    acc += term * x;
  }
  return exp(-Extended(ms.log_sigma_product)) * acc * pow(sg, n);
}

SecrecyReport evaluate(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0, Evaluator ev,
                       const EvalPrecision& prec) {
  SecrecyReport rep;
  rep.scenario = lb.scenario;
  rep.evaluator = ev;
  rep.target_rate_r0 = r0;
  rep.hi_snr_slope = high_snr_slope(ms);
  rep.hi_snr_offset = high_snr_offset(lb, ms);
  const DiversityGain dg = diversity_and_gain(lb, ms, r0);
  rep.diversity_order = dg.diversity_order;
  rep.array_gain = dg.array_gain;
  switch (ev) {
    case Evaluator::closed_form:
      rep.rate_bits = secrecy_rate_closed(lb, ms, prec).value;
      rep.sop = sop_closed(lb, ms, r0, prec).value;
      break;
    case Evaluator::quadrature:
      rep.rate_bits = secrecy_rate_quadrature(lb, ms).value;
      rep.sop = sop_quadrature(lb, ms, r0).value;
      break;
    case Evaluator::asymptotic:
      rep.rate_bits = std::max(0.0, asymptotic_rate(lb, ms));
      rep.sop = std::min(1.0, dg.asymptotic_sop);
      break;
    case Evaluator::monte_carlo:
    case Evaluator::spda_mc:
      throw DomainError("evaluate: Monte Carlo evaluators need a trial budget; use the monte-carlo module");
  }
  return rep;
}

namespace lemma {

bool identity_holds(int k) {
  if (k < 1 || k > 20) throw DomainError("identity_holds: K must lie in [1, 20]");
  // common denominator lcm(1..k)
  std::int64_t den = 1;
  for (int d = 1; d <= k; ++d) den = std::lcm(den, static_cast<std::int64_t>(d));
  std::int64_t num = 0, c = 1;
  for (int d = 0; d < k; ++d) {
    if (d > 0) c = c * (k - d) / d;
    const std::int64_t t = c * (den / (d + 1));
    num += (d % 2 == 0) ? t : -t;
  }
  return num * k == den;
}

double log_plus_e1(double x) { return std::log(x) + exp_e1(x); }

double independent_offset_term(int k, double gamma_bar_e) {
  if (k < 1) throw DomainError("independent_offset_term: K must be positive");
  long double acc = 0.0L, c = 1.0L;
  for (int a = 0; a < k; ++a) {
    if (a > 0) c = c * (k - a) / a;
    const long double t = c / (1 + a) * scaled_e1(static_cast<long double>(1 + a) / gamma_bar_e);
    acc += (a % 2 == 0) ? t : -t;
  }
  return static_cast<double>(k * acc);
}

double independent_gain_term(int k, int dof, int m) {
  if (k < 1 || m < 0 || m > dof) throw DomainError("independent_gain_term: need K >= 1 and 0 <= m <= dof");
  long double acc = 0.0L, c = 1.0L;
  for (int n = 0; n < k; ++n) {
    if (n > 0) c = c * (k - n) / n;
    const long double t = c * std::pow(1.0L / (n + 1), dof - m + 1);
    acc += (n % 2 == 0) ? t : -t;
  }
  return static_cast<double>(k * acc);
}

double collaborative_offset_gap(int k, double gamma_bar_e) {
  return scaled_e1(1.0 / (k * gamma_bar_e)) - independent_offset_term(k, gamma_bar_e);
}

double collaborative_gain_gap(int k, int dof, int m) {
  const double c = std::exp(log_binomial(dof - m + k - 1, k - 1));
  return std::round(c) - independent_gain_term(k, dof, m);
}

}  // namespace lemma

}  // namespace capa
