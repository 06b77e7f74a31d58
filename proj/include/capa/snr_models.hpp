#pragma once

#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "capa/spectral.hpp"

namespace capa {

enum class Scenario { SE, MIE, MCE };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view s);  // throws DomainError

struct LinkBudget {
  double gamma_bar_b = 1.0;  // linear
  double gamma_bar_e = 1.0;  // linear, lambda/2 already folded in
  int k_eves = 1;
  Scenario scenario = Scenario::SE;

  // SE forces k_eves = 1; nonpositive SNRs or K < 1 throw DomainError.
  static LinkBudget make(double gamma_bar_b, double gamma_bar_e, int k_eves, Scenario scenario);
  static LinkBudget from_db(double gamma_b_db, double gamma_e_db, int k_eves, Scenario scenario);
};

double db_to_linear(double db);

struct SeriesOptions {
  int q_floor = 160;
  double series_tol = 1e-8;
  int q_cap = 2000;
};

struct MoschopoulosSeries {
  std::vector<double> psis;      // psi_0..psi_Q (inf past the double range; see log_psis)
  std::vector<double> log_psis;
  std::vector<double> weights;   // weight_prefix * psi_q, the gamma-mixture weights
  int q_max = 0;
  double sigma_min = 0.0;
  std::vector<double> sigmas;    // first dof eigenvalues
  int dof = 0;
  double weight_prefix = 0.0;
  double log_weight_prefix = 0.0;
  double log_sigma_product = 0.0;
  double residual = 0.0;         // 1 - sum of weights

  double weight_sum() const;
};

MoschopoulosSeries build_psi(const std::vector<double>& sigmas, const SeriesOptions& opt = {});
MoschopoulosSeries build_psi(const SpectralDecomposition& spec, const SeriesOptions& opt = {});
// Fixed truncation without the adaptive extension.
MoschopoulosSeries build_psi_fixed(const std::vector<double>& sigmas, int q_max);

double bob_pdf(double x, const LinkBudget& lb, const MoschopoulosSeries& ms);
double bob_cdf(double x, const LinkBudget& lb, const MoschopoulosSeries& ms);
// Mixture of gamma survival functions; tends to 0 (not to the residual) as x grows.
double bob_sf(double x, const LinkBudget& lb, const MoschopoulosSeries& ms);

double eve_pdf(double x, const LinkBudget& lb);
double eve_cdf(double x, const LinkBudget& lb);
double eve_sf(double x, const LinkBudget& lb);

using Rng = std::mt19937_64;

// Unit exponential from one 53-bit uniform.
inline double unit_exponential(Rng& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return -std::log1p(-u);
}

double sample_bob(const MoschopoulosSeries& ms, const LinkBudget& lb, Rng& rng);
double sample_bob(const std::vector<double>& sigmas, double gamma_bar_b, Rng& rng, std::vector<double>& scratch);
double sample_eve(const LinkBudget& lb, Rng& rng);

}  // namespace capa
