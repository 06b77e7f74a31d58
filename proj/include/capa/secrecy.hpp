#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "capa/snr_models.hpp"
#include "capa/specfun.hpp"

namespace capa {

enum class Evaluator { closed_form, quadrature, asymptotic, monte_carlo, spda_mc };

std::string_view to_string(Evaluator e);
Evaluator parse_evaluator(std::string_view s);  // throws DomainError

struct ClosedEval {
  double value = 0.0;
  double est_rel_err = 0.0;  // cancellation estimate of the tier that produced value
  bool extended = false;     // true when the extended type was needed
  bool clamped = false;      // SOP only: result pulled back into [0, 1] by more than 1e-9
};

struct SecrecyReport {
  Scenario scenario = Scenario::SE;
  Evaluator evaluator = Evaluator::closed_form;
  double rate_bits = 0.0;
  double sop = 0.0;
  double target_rate_r0 = 0.0;
  double hi_snr_slope = 0.0;
  double hi_snr_offset = 0.0;
  int diversity_order = 0;
  double array_gain = 0.0;
};

// Secrecy rate from the closed-form series (SE, MIE, MCE forms), bits/use.
ClosedEval secrecy_rate_closed(const LinkBudget& lb, const MoschopoulosSeries& ms,
                               const EvalPrecision& prec = {});
// Same, pinned to one arithmetic type; exposes the tracked estimate directly.
ClosedEval secrecy_rate_closed_double(const LinkBudget& lb, const MoschopoulosSeries& ms);
ClosedEval secrecy_rate_closed_extended(const LinkBudget& lb, const MoschopoulosSeries& ms);

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
};

struct QuadratureError : std::runtime_error {
  double achieved;
  QuadratureError(const std::string& what, double err) : std::runtime_error(what), achieved(err) {}
};

// (1/ln 2) int_0^inf (1 - F_b(x)) F_e(x) / (1 + x) dx
QuadResult secrecy_rate_quadrature(const LinkBudget& lb, const MoschopoulosSeries& ms, double abs_tol = 1e-7);
// E[log2(1 + rho_b)] by quadrature against the Bob density (no eavesdropper).
QuadResult bob_ergodic_rate(const LinkBudget& lb, const MoschopoulosSeries& ms, double abs_tol = 1e-7);

ClosedEval sop_closed(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0,
                      const EvalPrecision& prec = {});
// int_0^inf f_e(y) F_b(2^r0 (1 + y) - 1) dy
QuadResult sop_quadrature(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0);

double high_snr_slope(const MoschopoulosSeries& ms);
double high_snr_offset(const LinkBudget& lb, const MoschopoulosSeries& ms);
// The high-SNR approximation written as a q-sum; equals slope*(log2 gb - offset).
double asymptotic_rate(const LinkBudget& lb, const MoschopoulosSeries& ms);

struct DiversityGain {
  int diversity_order = 0;
  double array_gain = 0.0;
  double asymptotic_sop = 0.0;  // (Ag * gamma_bar_b)^(-dof)
};
DiversityGain diversity_and_gain(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0);

// SOP as a power series in z = 1/gamma_bar_b, coefficients of z^0..z^degree,
// obtained by truncated series arithmetic on the closed-form SOP expression.
std::vector<Extended> sop_z_series(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0, int degree);
// The leading z^dof coefficient predicted by the asymptotic analysis.
Extended sop_leading_coefficient(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0);

SecrecyReport evaluate(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0, Evaluator ev,
                       const EvalPrecision& prec = {});

namespace lemma {

// K sum_d C(K-1,d) (-1)^d / (d+1) == 1, in exact rational arithmetic.
bool identity_holds(int k);
// ln x + E1(x), tends to -gamma
double log_plus_e1(double x);
// K sum_a C(K-1,a) (-1)^a / (1+a) e^{(1+a)/ge} E1((1+a)/ge)
double independent_offset_term(int k, double gamma_bar_e);
// K sum_n C(K-1,n) (-1)^n (1/(n+1))^(dof-m+1)
double independent_gain_term(int k, int dof, int m);
// e^{1/(K ge)} E1(1/(K ge)) - independent_offset_term(K, ge)
double collaborative_offset_gap(int k, double gamma_bar_e);
// C(dof-m+K-1, K-1) - independent_gain_term(K, dof, m)
double collaborative_gain_gap(int k, int dof, int m);

}  // namespace lemma

}  // namespace capa
