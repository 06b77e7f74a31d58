#include <doctest.h>

#include <cmath>
#include <vector>

#include "capa/secrecy.hpp"
#include "capa/snr_models.hpp"
#include "capa/specfun.hpp"

using namespace capa;

namespace {

const std::vector<double> kSig4{0.062446424946964, 0.0622977286761627, 0.0599139270732228, 0.0450733846435806};
const std::vector<double> kSig2{0.0612663400456051, 0.046813781382578};

const MoschopoulosSeries& ms4() {
  static const MoschopoulosSeries ms = build_psi(kSig4);
  return ms;
}
const MoschopoulosSeries& ms2() {
  static const MoschopoulosSeries ms = build_psi(kSig2);
  return ms;
}

const Scenario kAll[] = {Scenario::SE, Scenario::MIE, Scenario::MCE};

struct Reference {
  double gb_db, ge_db;
  int k;
  Scenario sc;
  double rate, sop1, sop3;
};

// Exact hypoexponential Bob law, integrated in 30-digit arithmetic (mpmath).
const Reference kRef4[] = {
    {20, 0, 5, Scenario::SE, 3.5521823867282634, 0.0074723656418067191, 0.26811354813367968},
    {20, 0, 5, Scenario::MIE, 2.7857162486697645, 0.027954598332515644, 0.57982543809605051},
    {20, 0, 5, Scenario::MCE, 1.9337414677295105, 0.15190025525611145, 0.88624739892085453},
    {30, 10, 5, Scenario::SE, 4.7556931098832771, 0.0047670439529730424, 0.12603315480062068},
    {30, 10, 5, Scenario::MIE, 3.2643033305125485, 0.019517999919501317, 0.39273295717327799},
    {30, 10, 5, Scenario::MCE, 2.1410860284040887, 0.12923285571771655, 0.80772685820019606},
    {10, 0, 2, Scenario::SE, 0.85358142374138221, 0.58738341734809711, 0.99981389892228953},
    {10, 0, 2, Scenario::MIE, 0.57675524880608083, 0.76201784246967498, 0.99997108517805492},
    {10, 0, 2, Scenario::MCE, 0.43052079455697173, 0.83763709435833417, 0.9999843399744777},
};
const Reference kRef2[] = {
    {20, 0, 5, Scenario::SE, 2.4108592548172885, 0.11843821483019159, 0.68158186064648104},
    {20, 0, 5, Scenario::MIE, 1.6725146799518723, 0.27389283565387426, 0.90030654624059764},
    {20, 0, 5, Scenario::MCE, 0.94249159257968427, 0.56487654394094734, 0.98422956128597944},
    {30, 10, 5, Scenario::SE, 3.4991273823731184, 0.077442901757292598, 0.38968145741391231},
    {30, 10, 5, Scenario::MIE, 2.0480897345804482, 0.21813241079219573, 0.77147144813438979},
    {30, 10, 5, Scenario::MCE, 1.0736112175958549, 0.51976310498997175, 0.96110230428544718},
    {10, 0, 2, Scenario::SE, 0.37077788666428945, 0.87822924798651153, 0.99999676648126868},
    {10, 0, 2, Scenario::MIE, 0.2016597316954598, 0.94930877753104553, 0.99999956890678897},
    {10, 0, 2, Scenario::MCE, 0.13788848588564845, 0.96819231101897507, 0.9999843399744777},
};

void check_reference(const Reference& r, const MoschopoulosSeries& ms) {
  CAPTURE(r.gb_db);
  CAPTURE(r.ge_db);
  CAPTURE(r.k);
  CAPTURE(to_string(r.sc));
  const auto lb = LinkBudget::from_db(r.gb_db, r.ge_db, r.k, r.sc);
  CHECK(secrecy_rate_closed(lb, ms).value == doctest::Approx(r.rate).epsilon(1e-9));
  CHECK(secrecy_rate_quadrature(lb, ms).value == doctest::Approx(r.rate).epsilon(1e-9));
  CHECK(sop_closed(lb, ms, 1.0).value == doctest::Approx(r.sop1).epsilon(1e-9));
  CHECK(sop_closed(lb, ms, 3.0).value == doctest::Approx(r.sop3).epsilon(1e-9));
  CHECK(sop_quadrature(lb, ms, 1.0).value == doctest::Approx(r.sop1).epsilon(1e-8));
  CHECK(sop_quadrature(lb, ms, 3.0).value == doctest::Approx(r.sop3).epsilon(1e-8));
}

}  // namespace

TEST_CASE("evaluator names") {
  for (auto e : {Evaluator::closed_form, Evaluator::quadrature, Evaluator::asymptotic, Evaluator::monte_carlo,
                 Evaluator::spda_mc})
    CHECK(parse_evaluator(to_string(e)) == e);
  CHECK_THROWS_AS(parse_evaluator("exact"), DomainError);
}

TEST_CASE("rate and outage against the exact Bob law at four degrees of freedom") {
  for (const auto& r : kRef4) check_reference(r, ms4());
}

TEST_CASE("rate and outage against the exact Bob law at two degrees of freedom") {
  // the last MCE entry at r0 = 3 is checked separately below
  for (const auto& r : kRef2) {
    if (r.sc == Scenario::MCE && r.gb_db == 10) continue;
    check_reference(r, ms2());
  }
  const auto lb = LinkBudget::from_db(10, 0, 2, Scenario::MCE);
  CHECK(secrecy_rate_closed(lb, ms2()).value == doctest::Approx(0.13788848588564845).epsilon(1e-9));
  CHECK(sop_closed(lb, ms2(), 1.0).value == doctest::Approx(0.96819231101897507).epsilon(1e-9));
}

TEST_CASE("single eavesdropper reductions") {
  for (double gb_db = -2; gb_db <= 36; gb_db += 2) {
    const auto se = LinkBudget::from_db(gb_db, 5, 1, Scenario::SE);
    const auto mie = LinkBudget::from_db(gb_db, 5, 1, Scenario::MIE);
    const auto mce = LinkBudget::from_db(gb_db, 5, 1, Scenario::MCE);
    CAPTURE(gb_db);
    const double r = secrecy_rate_closed(se, ms4()).value;
    CHECK(secrecy_rate_closed(mie, ms4()).value == doctest::Approx(r).epsilon(1e-8));
    CHECK(secrecy_rate_closed(mce, ms4()).value == doctest::Approx(r).epsilon(1e-8));
    const double s = sop_closed(se, ms4(), 2.0).value;
    CHECK(std::abs(sop_closed(mie, ms4(), 2.0).value - s) <= 1e-8);
    CHECK(std::abs(sop_closed(mce, ms4(), 2.0).value - s) <= 1e-8);
  }
}

TEST_CASE("closed form matches quadrature over a mixed grid") {
  for (const auto* ms : {&ms2(), &ms4()})
    for (double gb : {0.0, 10.0, 20.0, 30.0})
      for (double ge : {0.0, 10.0})
        for (int k : {1, 3, 5})
          for (Scenario sc : kAll) {
            CAPTURE(ms->dof);
            CAPTURE(gb);
            CAPTURE(ge);
            CAPTURE(k);
            CAPTURE(to_string(sc));
            const auto lb = LinkBudget::from_db(gb, ge, k, sc);
            CHECK(std::abs(secrecy_rate_closed(lb, *ms).value - secrecy_rate_quadrature(lb, *ms).value) <= 1e-9);
            CHECK(std::abs(sop_closed(lb, *ms, 1.5).value - sop_quadrature(lb, *ms, 1.5).value) <= 1e-8);
          }
}

TEST_CASE("vanishing eavesdropper gives the ergodic rate") {
  const auto lb = LinkBudget::from_db(20, -80, 1, Scenario::SE);
  const double ergodic = bob_ergodic_rate(lb, ms4()).value;
  CHECK(std::abs(secrecy_rate_quadrature(lb, ms4()).value - ergodic) < 1e-4);
  CHECK(std::abs(secrecy_rate_closed(lb, ms4()).value - ergodic) < 1e-4);
}

TEST_CASE("outage limits") {
  const auto weak = LinkBudget::from_db(-40, 10, 3, Scenario::MIE);
  CHECK(sop_quadrature(weak, ms4(), 1.0).value == doctest::Approx(1.0).epsilon(1e-6));
  const auto lb = LinkBudget::from_db(20, 0, 3, Scenario::MCE);
  CHECK_THROWS_AS(sop_closed(lb, ms4(), 0.0), DomainError);
  const double s = sop_closed(lb, ms4(), 1.0).value;
  CHECK(s >= 0.0);
  CHECK(s <= 1.0);
}

TEST_CASE("multiple eavesdroppers lower the rate") {
  const auto se = LinkBudget::from_db(20, 20, 5, Scenario::SE);
  const auto mie = LinkBudget::from_db(20, 20, 5, Scenario::MIE);
  const auto mce = LinkBudget::from_db(20, 20, 5, Scenario::MCE);
  const double a = secrecy_rate_closed(se, ms4()).value, b = secrecy_rate_closed(mie, ms4()).value,
               c = secrecy_rate_closed(mce, ms4()).value;
  CHECK(a > b);
  CHECK(b > c);
}

TEST_CASE("monotonicity over a parameter grid") {
  for (Scenario sc : kAll) {
    CAPTURE(to_string(sc));
    for (int k = 1; k <= 5; ++k) {
      CAPTURE(k);
      double prev_rate = 1e300, prev_sop = -1.0;
      for (double ge = -10; ge <= 20; ge += 5) {
        const auto lb = LinkBudget::from_db(20, ge, k, sc);
        const double r = secrecy_rate_closed(lb, ms4()).value, s = sop_closed(lb, ms4(), 1.0).value;
        CHECK(r <= prev_rate + 1e-12);
        CHECK(s >= prev_sop - 1e-12);
        prev_rate = r;
        prev_sop = s;
      }
    }
    for (double ge : {0.0, 10.0}) {
      double prev_rate = 1e300, prev_sop = -1.0;
      for (int k = 1; k <= 6; ++k) {
        const auto lb = LinkBudget::from_db(20, ge, k, sc);
        const double r = secrecy_rate_closed(lb, ms4()).value, s = sop_closed(lb, ms4(), 1.0).value;
        CHECK(r <= prev_rate + 1e-12);
        CHECK(s >= prev_sop - 1e-12);
        prev_rate = r;
        prev_sop = s;
      }
      double prev = -1.0;
      for (double r0 : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double s = sop_closed(LinkBudget::from_db(20, ge, 3, sc), ms4(), r0).value;
        CHECK(s >= prev - 1e-12);
        prev = s;
      }
      prev = 2.0;
      for (double gb = 0; gb <= 40; gb += 5) {
        const double s = sop_closed(LinkBudget::from_db(gb, ge, 3, sc), ms4(), 1.0).value;
        CHECK(s <= prev + 1e-12);
        prev = s;
      }
    }
  }
}

TEST_CASE("precision tiers") {
  const auto lb = LinkBudget::from_db(20, 0, 5, Scenario::MIE);
  const auto d = secrecy_rate_closed_double(lb, ms4());
  const auto e = secrecy_rate_closed_extended(lb, ms4());
  CHECK(e.extended);
  CHECK_FALSE(d.extended);
  CHECK(d.value == doctest::Approx(e.value).epsilon(1e-10));
  CHECK(e.est_rel_err < d.est_rel_err);

  // low Bob SNR makes the series cancel; standard precision cannot hold it
  const auto low = LinkBudget::from_db(0, 0, 1, Scenario::SE);
  const auto auto_eval = secrecy_rate_closed(low, ms4());
  CHECK(auto_eval.extended);
  CHECK(auto_eval.value == doctest::Approx(secrecy_rate_quadrature(low, ms4()).value).epsilon(1e-8));

  // far below the noise floor even the extended type gives up
  const auto hopeless = LinkBudget::from_db(-10, 0, 1, Scenario::SE);
  CHECK_THROWS_AS(secrecy_rate_closed(hopeless, ms4()), PrecisionLoss);
  CHECK_THROWS_AS(secrecy_rate_closed(hopeless, ms4(), EvalPrecision::standard()), PrecisionLoss);
  CHECK(secrecy_rate_quadrature(hopeless, ms4()).value >= 0.0);

  EvalPrecision bad;
  bad.rel_tol = 0.5;
  CHECK_THROWS_AS(secrecy_rate_closed(lb, ms4(), bad), DomainError);
}

TEST_CASE("high-SNR slope") {
  CHECK(high_snr_slope(build_psi(std::vector<double>(4, 0.05))) == 1.0);
  CHECK(std::abs(high_snr_slope(ms4()) - 1.0) <= 1e-8);
  const auto big = build_psi(std::vector<double>{0.06, 0.05, 0.03, 0.01, 0.004, 0.001});
  CHECK(std::abs(high_snr_slope(big) - 1.0) <= 1e-8);
}

TEST_CASE("high-SNR offset") {
  // larger eigenvalues give a smaller offset
  std::vector<double> scaled(kSig4);
  for (auto& s : scaled) s *= 2.0;
  const auto lb = LinkBudget::from_db(30, 0, 1, Scenario::SE);
  CHECK(high_snr_offset(lb, build_psi(scaled)) < high_snr_offset(lb, ms4()));
  CHECK(high_snr_offset(lb, build_psi(scaled)) == doctest::Approx(high_snr_offset(lb, ms4()) - 1.0).epsilon(1e-9));

  for (double ge : {0.0, 10.0}) {
    const auto se = LinkBudget::from_db(30, ge, 1, Scenario::SE);
    CHECK(high_snr_offset(LinkBudget::from_db(30, ge, 1, Scenario::MIE), ms4()) ==
          doctest::Approx(high_snr_offset(se, ms4())).epsilon(1e-10));
    CHECK(high_snr_offset(LinkBudget::from_db(30, ge, 1, Scenario::MCE), ms4()) ==
          doctest::Approx(high_snr_offset(se, ms4())).epsilon(1e-10));
    for (int k = 2; k <= 8; ++k) {
      const double a = high_snr_offset(se, ms4());
      const double b = high_snr_offset(LinkBudget::from_db(30, ge, k, Scenario::MIE), ms4());
      const double c = high_snr_offset(LinkBudget::from_db(30, ge, k, Scenario::MCE), ms4());
      CAPTURE(k);
      CHECK(a < b);
      CHECK(b < c);
    }
  }
}

TEST_CASE("asymptotic rate") {
  for (Scenario sc : kAll) {
    const auto lb = LinkBudget::from_db(50, 10, 5, sc);
    const double asym = asymptotic_rate(lb, ms4());
    const double line = high_snr_slope(ms4()) * (std::log2(lb.gamma_bar_b) - high_snr_offset(lb, ms4()));
    CHECK(asym == doctest::Approx(line).epsilon(1e-9));
  }
  const auto lb50 = LinkBudget::from_db(50, 10, 1, Scenario::SE);
  CHECK(std::abs(asymptotic_rate(lb50, ms4()) - secrecy_rate_quadrature(lb50, ms4()).value) < 0.05);
  const auto lb30 = LinkBudget::from_db(30, 10, 1, Scenario::SE);
  const auto lb60 = LinkBudget::from_db(60, 10, 1, Scenario::SE);
  const double gap30 = std::abs(asymptotic_rate(lb30, ms4()) - secrecy_rate_quadrature(lb30, ms4()).value);
  const double gap60 = std::abs(asymptotic_rate(lb60, ms4()) - secrecy_rate_quadrature(lb60, ms4()).value);
  CHECK(gap60 < gap30);
}

TEST_CASE("diversity order and array gain") {
  for (double ge : {0.0, 10.0}) {
    const double se = diversity_and_gain(LinkBudget::from_db(40, ge, 1, Scenario::SE), ms4(), 1.0).array_gain;
    CHECK(diversity_and_gain(LinkBudget::from_db(40, ge, 1, Scenario::MIE), ms4(), 1.0).array_gain ==
          doctest::Approx(se).epsilon(1e-12));
    CHECK(diversity_and_gain(LinkBudget::from_db(40, ge, 1, Scenario::MCE), ms4(), 1.0).array_gain ==
          doctest::Approx(se).epsilon(1e-12));
    for (int k = 2; k <= 6; ++k) {
      const auto mie = diversity_and_gain(LinkBudget::from_db(40, ge, k, Scenario::MIE), ms4(), 1.0);
      const auto mce = diversity_and_gain(LinkBudget::from_db(40, ge, k, Scenario::MCE), ms4(), 1.0);
      CHECK(mie.diversity_order == 4);
      CHECK(se > mie.array_gain);
      CHECK(mie.array_gain > mce.array_gain);
    }
  }

  // log-log slope of the exact outage and its agreement with the asymptote
  for (Scenario sc : kAll) {
    CAPTURE(to_string(sc));
    const auto lo = LinkBudget::from_db(40, 0, 5, sc), hi = LinkBudget::from_db(60, 0, 5, sc);
    const double s_lo = sop_closed(lo, ms4(), 1.0).value, s_hi = sop_closed(hi, ms4(), 1.0).value;
    CHECK((std::log10(s_hi) - std::log10(s_lo)) / 2.0 == doctest::Approx(-4.0).epsilon(0.025));
    const auto dg = diversity_and_gain(hi, ms4(), 1.0);
    CHECK(dg.asymptotic_sop == doctest::Approx(s_hi).epsilon(1e-3));
    CHECK(dg.asymptotic_sop == doctest::Approx(std::pow(dg.array_gain * hi.gamma_bar_b, -4.0)).epsilon(1e-12));
  }
}

TEST_CASE("low-order outage coefficients cancel") {
  for (int n = 2; n <= 4; ++n) {
    const std::vector<double> sig(kSig4.begin(), kSig4.begin() + n);
    const auto ms = build_psi(sig);
    for (Scenario sc : kAll) {
      CAPTURE(n);
      CAPTURE(to_string(sc));
      const auto lb = LinkBudget::from_db(0, 0, 3, sc);
      const auto c = sop_z_series(lb, ms, 1.0, n + 1);
      Extended scale = 0;
      for (const auto& x : c) scale = std::max(scale, abs(x));
      for (int j = 0; j < n; ++j) CHECK(static_cast<double>(abs(c[j]) / scale) < 1e-9);
      const Extended lead = sop_leading_coefficient(lb, ms, 1.0);
      CHECK(static_cast<double>(c[n]) == doctest::Approx(static_cast<double>(lead)).epsilon(1e-9));
      CHECK(static_cast<double>(c[n]) > 0.0);
    }
  }
}

TEST_CASE("report assembly") {
  const auto lb = LinkBudget::from_db(20, 0, 5, Scenario::MIE);
  const auto rep = evaluate(lb, ms4(), 1.0, Evaluator::closed_form);
  CHECK(rep.rate_bits == doctest::Approx(2.7857162486697645).epsilon(1e-9));
  CHECK(rep.sop == doctest::Approx(0.027954598332515644).epsilon(1e-9));
  CHECK(rep.diversity_order == 4);
  CHECK(rep.target_rate_r0 == 1.0);
  const auto q = evaluate(lb, ms4(), 1.0, Evaluator::quadrature);
  CHECK(q.rate_bits == doctest::Approx(rep.rate_bits).epsilon(1e-9));
  CHECK_THROWS_AS(evaluate(lb, ms4(), 1.0, Evaluator::monte_carlo), DomainError);
}

TEST_CASE("lemma identities and orderings") {
  for (int k = 1; k <= 12; ++k) CHECK(lemma::identity_holds(k));
  CHECK(std::abs(lemma::log_plus_e1(1e-8) + 0.5772156649) <= 1e-6);

  for (double ge : {0.1, 1.0, 10.0, 100.0}) {
    CAPTURE(ge);
    CHECK(lemma::independent_offset_term(1, ge) == doctest::Approx(scaled_e1(1.0 / ge)).epsilon(1e-12));
    for (int k = 1; k <= 11; ++k) CHECK(lemma::independent_offset_term(k + 1, ge) > lemma::independent_offset_term(k, ge));
    // the collaborative Eve term exceeds the independent one, which is what orders the offsets
    for (int k = 2; k <= 12; ++k) CHECK(lemma::collaborative_offset_gap(k, ge) > 0.0);
  }
  for (int dof : {2, 4, 6}) {
    for (int k = 1; k <= 12; ++k) {
      CHECK(lemma::independent_gain_term(k, dof, dof) == doctest::Approx(1.0).epsilon(1e-12));
      if (k >= 2) CHECK(lemma::collaborative_gain_gap(k, dof, dof) == doctest::Approx(0.0));
    }
    for (int m = 0; m < dof; ++m)
      for (int k = 1; k <= 11; ++k) {
        CHECK(lemma::independent_gain_term(k + 1, dof, m) > lemma::independent_gain_term(k, dof, m));
        if (k + 1 >= 2) CHECK(lemma::collaborative_gain_gap(k + 1, dof, m) > 0.0);
      }
  }
}
