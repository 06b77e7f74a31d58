#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "capa/snr_models.hpp"
#include "capa/specfun.hpp"

using namespace capa;

namespace {

// Exact CDF of sum_l s_l E_l for distinct s_l (hypoexponential law).
double hypoexp_cdf(double x, const std::vector<double>& s) {
  double sf = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double c = 1.0;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (j != i) c *= s[i] / (s[i] - s[j]);
    sf += c * std::exp(-x / s[i]);
  }
  return 1.0 - sf;
}

const std::vector<double> kSig4{0.062446424946964, 0.0622977286761627, 0.0599139270732228, 0.0450733846435806};

}  // namespace

TEST_CASE("scenario names") {
  CHECK(parse_scenario("SE") == Scenario::SE);
  CHECK(parse_scenario("MIE") == Scenario::MIE);
  CHECK(to_string(Scenario::MCE) == "MCE");
  CHECK_THROWS_AS(parse_scenario("XYZ"), DomainError);
}

TEST_CASE("link budget validation") {
  const auto se = LinkBudget::make(10.0, 2.0, 7, Scenario::SE);
  CHECK(se.k_eves == 1);
  CHECK(LinkBudget::from_db(20, 10, 3, Scenario::MIE).gamma_bar_b == doctest::Approx(100.0));
  CHECK(db_to_linear(-10) == doctest::Approx(0.1));
  CHECK_THROWS_AS(LinkBudget::make(0.0, 1.0, 1, Scenario::SE), DomainError);
  CHECK_THROWS_AS(LinkBudget::make(1.0, -1.0, 1, Scenario::SE), DomainError);
  CHECK_THROWS_AS(LinkBudget::make(1.0, 1.0, 0, Scenario::MIE), DomainError);
}

TEST_CASE("series weights for equal eigenvalues collapse to one gamma term") {
  const auto ms = build_psi(std::vector<double>(5, 0.05));
  CHECK(ms.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t q = 1; q < ms.weights.size(); ++q) CHECK(std::abs(ms.weights[q]) < 1e-15);
  CHECK(ms.weight_sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("series truncation meets the tolerance") {
  SeriesOptions opt;
  const auto ms = build_psi(kSig4, opt);
  CHECK(ms.q_max >= opt.q_floor);
  CHECK(std::abs(ms.residual) <= opt.series_tol);
  CHECK(ms.sigma_min == kSig4.back());
  CHECK(ms.dof == 4);
  for (double w : ms.weights) CHECK(w >= 0.0);

  // a badly spread spectrum needs more than the floor
  const auto wide = build_psi(std::vector<double>{1.0, 0.5, 0.2, 0.05, 0.01}, opt);
  CHECK(wide.q_max > opt.q_floor);
  CHECK(std::abs(wide.residual) <= opt.series_tol);
  const auto fixed = build_psi_fixed({1.0, 0.5, 0.2, 0.05, 0.01}, 20);
  CHECK(fixed.q_max == 20);
  CHECK(fixed.residual > opt.series_tol);
}

TEST_CASE("Bob CDF against the exact hypoexponential law") {
  const auto ms = build_psi(kSig4);
  const double gb = 100.0;
  const auto lb = LinkBudget::make(gb, 1.0, 1, Scenario::SE);
  std::vector<double> scaled(kSig4);
  for (auto& s : scaled) s *= gb;
  for (double x : {0.01, 0.3, 1.0, 3.0, 10.0, 24.0, 60.0, 200.0}) {
    CAPTURE(x);
    CHECK(std::abs(bob_cdf(x, lb, ms) - hypoexp_cdf(x, scaled)) < 1e-9);
  }
  // the same law from a second spectrum with very different spread
  const std::vector<double> s2{1.0, 0.9, 0.8, 0.7};
  const auto ms2 = build_psi(s2);
  const auto lb2 = LinkBudget::make(1.0, 1.0, 1, Scenario::SE);
  for (double x : {0.1, 1.0, 2.5, 5.0, 12.0}) CHECK(std::abs(bob_cdf(x, lb2, ms2) - hypoexp_cdf(x, s2)) < 1e-9);
}

TEST_CASE("Bob density and distribution consistency") {
  const auto ms = build_psi(kSig4);
  const auto lb = LinkBudget::make(100.0, 1.0, 1, Scenario::SE);
  CHECK(bob_pdf(0.0, lb, ms) == 0.0);
  CHECK(bob_cdf(0.0, lb, ms) == 0.0);
  CHECK(bob_pdf(-1.0, lb, ms) == 0.0);
  for (double x = 0.5; x < 100.0; x *= 1.4) {
    CAPTURE(x);
    const double h = 1e-5 * std::max(1.0, x);
    const double num = (bob_cdf(x + h, lb, ms) - bob_cdf(x - h, lb, ms)) / (2 * h);
    CHECK(std::abs(num - bob_pdf(x, lb, ms)) < 1e-5);
    CHECK(bob_cdf(x, lb, ms) + bob_sf(x, lb, ms) == doctest::Approx(ms.weight_sum()).epsilon(1e-12));
  }
  const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return bob_pdf(x, lb, ms); }, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));

  // one degree of freedom is an exponential
  const auto one = build_psi(std::vector<double>{0.05});
  const auto lb1 = LinkBudget::make(20.0, 1.0, 1, Scenario::SE);
  CHECK(bob_pdf(0.7, lb1, one) == doctest::Approx(std::exp(-0.7) / 1.0).epsilon(1e-13));
}

TEST_CASE("Eve models") {
  const double g = 3.0;
  const auto se = LinkBudget::make(1.0, g, 1, Scenario::SE);
  const auto mie1 = LinkBudget::make(1.0, g, 1, Scenario::MIE);
  const auto mce1 = LinkBudget::make(1.0, g, 1, Scenario::MCE);
  for (double x : {0.1, 1.0, 5.0, 20.0}) {
    CHECK(eve_cdf(x, se) == doctest::Approx(-std::expm1(-x / g)).epsilon(1e-15));
    CHECK(eve_cdf(x, mie1) == doctest::Approx(eve_cdf(x, se)).epsilon(1e-15));
    CHECK(eve_cdf(x, mce1) == doctest::Approx(eve_cdf(x, se)).epsilon(1e-14));
    CHECK(eve_pdf(x, mce1) == doctest::Approx(eve_pdf(x, se)).epsilon(1e-14));
  }
  // more eavesdroppers push the best/combined SNR up
  for (int k = 1; k < 8; ++k) {
    const auto a = LinkBudget::make(1.0, g, k, Scenario::MIE), b = LinkBudget::make(1.0, g, k + 1, Scenario::MIE);
    const auto c = LinkBudget::make(1.0, g, k + 1, Scenario::MCE);
    for (double x : {0.5, 2.0, 6.0, 15.0}) {
      CHECK(eve_cdf(x, b) <= eve_cdf(x, a));
      CHECK(eve_cdf(x, c) <= eve_cdf(x, b) + 1e-15);
      CHECK(eve_cdf(x, b) + eve_sf(x, b) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  const auto mce5 = LinkBudget::make(1.0, g, 5, Scenario::MCE);
  const double mean = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return x * eve_pdf(x, mce5); }, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
  CHECK(mean == doctest::Approx(15.0).epsilon(1e-8));
}

TEST_CASE("samplers reproduce the model means") {
  const auto ms = build_psi(kSig4);
  const auto lb = LinkBudget::make(100.0, 2.0, 5, Scenario::MCE);
  Rng rng(12345);
  const int n = 1000000;
  double sb = 0.0, sb2 = 0.0, se = 0.0, se2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double b = sample_bob(ms, lb, rng), e = sample_eve(lb, rng);
    sb += b;
    sb2 += b * b;
    se += e;
    se2 += e * e;
  }
  const double mb = sb / n, me = se / n;
  const double seb = std::sqrt((sb2 / n - mb * mb) / n), see = std::sqrt((se2 / n - me * me) / n);
  const double want_b = 100.0 * std::accumulate(kSig4.begin(), kSig4.end(), 0.0);
  CHECK(std::abs(mb - want_b) < 3 * seb);
  CHECK(std::abs(me - 10.0) < 3 * see);

  const auto mie = LinkBudget::make(100.0, 2.0, 3, Scenario::MIE);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = sample_eve(mie, rng);
    s += e;
    s2 += e * e;
  }
  // E[max of 3 exponentials] = g (1 + 1/2 + 1/3)
  const double m = s / n, err = std::sqrt((s2 / n - m * m) / n);
  CHECK(std::abs(m - 2.0 * (1.0 + 0.5 + 1.0 / 3.0)) < 3 * err);
}
