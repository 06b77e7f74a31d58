// Closed-form secrecy rate and SOP series.
//
// Every exponential prefactor of the form e^{u/ge} Gamma(j, c) or
// e^{u/ge} E1(c), with c = u/ge + 1/beta, is carried as e^{-1/beta} times a
// reduced table entry, and that e^{-1/beta} cancels the e^{1/beta} in front of
// the binomial k-sum. Factorials are folded into neighbouring terms so nothing
// overflows before the final products. The remaining arithmetic is done in a
// Tracked<Real> so the caller can see how much cancellation occurred.

#include <cmath>
#include <vector>

#include "capa/secrecy.hpp"
#include "capa/specfun.hpp"

namespace capa {
namespace {

template <class Real>
using TR = Tracked<Real>;

template <class Real>
Real ln2() {
  using std::log;
  return log(Real(2));
}

// C(n, 0..n) as Real
template <class Real>
std::vector<Real> binomial_row(int n) {
  std::vector<Real> c(n + 1);
  c[0] = 1;
  for (int k = 1; k <= n; ++k) c[k] = c[k - 1] * Real(n - k + 1) / Real(k);
  return c;
}

inline int sign_of_power(int e) { return (e % 2 == 0) ? 1 : -1; }

// x^j / j! for j = 0..n
template <class Real>
std::vector<Real> exp_terms(const Real& x, int n) {
  std::vector<Real> a(n + 1);
  a[0] = 1;
  for (int j = 1; j <= n; ++j) a[j] = a[j - 1] * x / Real(j);
  return a;
}

// Reduced bracket sequence and cumulative B-sum for one (beta, ge, u).
template <class Real>
struct RateCore {
  std::vector<TR<Real>> bracket;  // k = 0..nmax, already divided by k!
  std::vector<TR<Real>> b_cum;    // running sum over m <= n of the B-series terms
};

// Single-Eve bracket with the Eve-dependent factors evaluated at u = 1 + a.
// u = 1 is the single-Eve form; u = 1 + a gives the a-th member of the
// multiple-independent-Eves sum.
template <class Real>
RateCore<Real> independent_core(const Real& beta, const Real& g, const Real& u, int nmax) {
  using std::log;
  using T = TR<Real>;
  const Real c = u / g + 1 / beta;
  const Real h = beta * g / (u * beta + g);
  const Real r = g / (u * beta + g);
  const Real lr = log(r);
  const Real lh = log(h);
  const Real inv_ln2 = 1 / ln2<Real>();
  const Real log2_beta = log(beta) * inv_ln2;
  const ReducedGammaTable<Real> tab(c, nmax + 1);
  const Real se1_beta = scaled_e1(1 / beta);

  const T x0 = T(h) * (T(log(1 / beta)) + T(tab.scaled_e1_c)) + T(g / u) * (T(se1_beta) - T(tab.scaled_e1_c));

  // G_i = sum_{i' <= i} r^{i'+1} e^c Gamma(i'+1, c) / i'!
  std::vector<T> gsum(nmax + 1);
  {
    Real rp = r;
    T acc = 0;
    for (int i = 0; i <= nmax; ++i) {
      acc += T(rp * tab.s[i]);
      gsum[i] = acc;
      rp *= r;
    }
  }

  RateCore<Real> core;
  core.bracket.resize(nmax + 1);
  T p_sum = 0;
  Real rp = r * r;  // r^{k+1} for k = 1
  for (int k = 0; k <= nmax; ++k) {
    if (k >= 1) {
      p_sum += T(beta * rp) * (T(tab.f[k]) + T(tab.s[k]) * T(lr)) + T(beta / Real(k)) * gsum[k - 1];
      rp *= r;
    }
    core.bracket[k] = (x0 + p_sum) * T(inv_ln2) + T(log2_beta * beta) * gsum[k];
  }

  // B-series: (1/beta)^m / m! sum_t C(m,t) (-1)^{m-t} h^{t+1} [F(t+1,c) + Gamma(t+1,c) ln h] e^c,
  // regrouped as sum_t (-1)^{m-t} [(1/beta)^{m-t}/(m-t)!] [h (h/beta)^t] [f_t + s_t ln h]
  const std::vector<Real> a = exp_terms(1 / beta, nmax);
  std::vector<Real> hb(nmax + 1);
  hb[0] = h;
  for (int t = 1; t <= nmax; ++t) hb[t] = hb[t - 1] * (h / beta);
  std::vector<T> bracket_f(nmax + 1);
  for (int t = 0; t <= nmax; ++t) bracket_f[t] = T(tab.f[t]) + T(tab.s[t]) * T(lh);
  core.b_cum.resize(nmax + 1);
  T cum = 0;
  for (int m = 0; m <= nmax; ++m) {
    T bm = 0;
    for (int t = 0; t <= m; ++t) {
      const T term = T(a[m - t] * hb[t]) * bracket_f[t];
      if ((m - t) % 2 == 0) bm += term;
      else bm -= term;
    }
    cum += bm;
    core.b_cum[m] = cum;
  }
  return core;
}

// Multiple-collaborative-Eves bracket (shape-K Eve density).
template <class Real>
RateCore<Real> collaborative_core(const Real& beta, const Real& g, int kk, int nmax) {
  using std::log;
  using std::pow;
  using T = TR<Real>;
  const Real c = 1 / g + 1 / beta;
  const Real h = beta * g / (beta + g);
  const Real r = g / (beta + g);
  const Real lr = log(r);
  const Real lh = log(h);
  const Real inv_ln2 = 1 / ln2<Real>();
  const Real log2_beta = log(beta) * inv_ln2;
  const int jmax = nmax + kk + 1;
  const ReducedGammaTable<Real> tab(c, jmax);
  const Real se1_beta = scaled_e1(1 / beta);
  const std::vector<Real> fact = factorial_table<Real>(kk + 1);
  const std::vector<Real> ck = binomial_row<Real>(kk - 1);

  // e^{c} Gamma(t, c) for t >= 1 is (t-1)! s[t-1]; t = 0 is e^c E1(c)
  auto gs_small = [&](int t) -> Real { return t == 0 ? tab.scaled_e1_c : fact[t - 1] * tab.s[t - 1]; };
  // (i + b)! / i!
  auto rising = [](int i, int b) {
    Real p = 1;
    for (int j = 1; j <= b; ++j) p *= Real(i + j);
    return p;
  };

  T first = 0;
  {
    Real hp = h;
    for (int a = 0; a < kk; ++a) {
      const T term = T(ck[a] * hp * fact[a]) * (T(tab.f[a]) + T(lr) * T(tab.s[a]));
      if ((kk - a - 1) % 2 == 0) first += term;
      else first -= term;
      hp *= h;
    }
  }

  T mid = T(pow(g, kk) * fact[kk - 1]) * (T(se1_beta) - T(tab.scaled_e1_c));
  // w = 1 member of the w-sum; it only exists when K >= 2
  for (int w = 1; w <= kk - 1; ++w) {
    Real lead = pow(g, w);
    for (int i = 1; i <= w - 1; ++i) lead *= Real(kk - i);
    const std::vector<Real> cw = binomial_row<Real>(kk - w);
    T inner = T(tab.scaled_e1_c) * T(Real(sign_of_power(kk - w)));
    Real hp = h;
    for (int t = 1; t <= kk - w; ++t) {
      const T term = T(cw[t] * hp * gs_small(t));
      if ((kk - w - t) % 2 == 0) inner += term;
      else inner -= term;
      hp *= h;
    }
    mid -= T(lead) * inner;
  }

  // V_i = (1/i!) sum_cc C(K-1,cc) (-1)^{K-1-cc} h^{cc+1} r^i e^c Gamma(i+cc+1, c)
  std::vector<T> v(nmax + 1);
  {
    Real rp = 1;
    for (int i = 0; i <= nmax; ++i) {
      T acc = 0;
      Real hp = h;
      for (int cc = 0; cc < kk; ++cc) {
        const T term = T(ck[cc] * hp * rp * tab.s[i + cc] * rising(i, cc));
        if ((kk - 1 - cc) % 2 == 0) acc += term;
        else acc -= term;
        hp *= h;
      }
      v[i] = acc;
      rp *= r;
    }
  }
  std::vector<T> vsum(nmax + 1);
  {
    T acc = 0;
    for (int i = 0; i <= nmax; ++i) {
      acc += v[i];
      vsum[i] = acc;
    }
  }

  RateCore<Real> core;
  core.bracket.resize(nmax + 1);
  const T base = first + mid;
  T p_sum = 0;
  Real rj = r;  // r^j
  for (int k = 0; k <= nmax; ++k) {
    if (k >= 1) {
      const int j = k;
      // t1_j / j!
      T t1 = 0;
      Real hp = h;
      for (int b = 0; b < kk; ++b) {
        const Real scale = ck[b] * hp * rj * rising(j, b);
        const T term = T(scale) * (T(tab.f[j + b]) + T(lr) * T(tab.s[j + b]));
        if ((kk - b - 1) % 2 == 0) t1 += term;
        else t1 -= term;
        hp *= h;
      }
      p_sum += t1 + T(1 / Real(j)) * vsum[j - 1];
      rj *= r;
    }
    core.bracket[k] = (base + p_sum) * T(inv_ln2) + T(log2_beta) * vsum[k];
  }

  // B-series for the shape-K density:
  // (1/beta)^k / k! sum_{f<=M} C(M,f) (-1)^{M-f} h^{f+1} f! [f_f + s_f ln h], M = K+k-1
  // regrouped as (M!/k!) h (h/beta)^f beta^{f-k} / (M-f)!
  std::vector<Real> down(nmax + 1);  // (1/beta)^d / (d+K-1)!
  down[0] = 1 / fact[kk - 1];
  for (int d = 1; d <= nmax; ++d) down[d] = down[d - 1] / beta / Real(d + kk - 1);
  std::vector<Real> hb(nmax + kk + 1);
  hb[0] = h;
  for (std::size_t f = 1; f < hb.size(); ++f) hb[f] = hb[f - 1] * (h / beta);
  core.b_cum.resize(nmax + 1);
  T cum = 0;
  for (int k = 0; k <= nmax; ++k) {
    const int m = kk + k - 1;
    const Real lead = rising(k, kk - 1);
    T bk = 0;
    for (int f = 0; f <= m; ++f) {
      Real tail;
      if (f <= k) {
        tail = down[k - f];
      } else {
        tail = pow(beta, f - k) / fact[m - f];
      }
      const T term = T(lead * hb[f] * tail) * (T(tab.f[f]) + T(tab.s[f]) * T(lh));
      if ((m - f) % 2 == 0) bk += term;
      else bk -= term;
    }
    cum += bk;
    core.b_cum[k] = cum;
  }
  return core;
}

// sum_q w_q [ sum_j (-1)^j (1/beta)^j/j! bracket_{n-j} - B_cum[n]/ln 2 ], n = dof + q - 1
template <class Real>
TR<Real> assemble(const RateCore<Real>& core, const MoschopoulosSeries& ms, const Real& beta) {
  using T = TR<Real>;
  const int nmax = ms.dof + ms.q_max - 1;
  const std::vector<Real> a = exp_terms(1 / beta, nmax);
  const Real inv_ln2 = 1 / ln2<Real>();
  T total = 0;
  for (int q = 0; q <= ms.q_max; ++q) {
    const int n = ms.dof + q - 1;
    T acc = 0;
    for (int j = 0; j <= n; ++j) {
      const T term = T(a[j]) * core.bracket[n - j];
      if (j % 2 == 0) acc += term;
      else acc -= term;
    }
    acc -= core.b_cum[n] * T(inv_ln2);
    total += T(Real(ms.weights[q])) * acc;
  }
  return total;
}

template <class Real>
TR<Real> rate_closed_impl(const LinkBudget& lb, const MoschopoulosSeries& ms) {
  using T = TR<Real>;
  const Real gb = lb.gamma_bar_b;
  const Real g = lb.gamma_bar_e;
  const Real beta = gb * Real(ms.sigma_min);
  const int nmax = ms.dof + ms.q_max - 1;
  const int kk = lb.k_eves;
  switch (lb.scenario) {
    case Scenario::SE: {
      const auto core = independent_core<Real>(beta, g, Real(1), nmax);
      return assemble(core, ms, beta) * T(1 / g);
    }
    case Scenario::MIE: {
      const std::vector<Real> ck = binomial_row<Real>(kk - 1);
      T total = 0;
      for (int a = 0; a < kk; ++a) {
        const auto core = independent_core<Real>(beta, g, Real(1 + a), nmax);
        const T part = T(Real(kk) * ck[a] / g) * assemble(core, ms, beta);
        if (a % 2 == 0) total += part;
        else total -= part;
      }
      return total;
    }
    case Scenario::MCE: {
      using std::pow;
      const auto core = collaborative_core<Real>(beta, g, kk, nmax);
      const Real pre = 1 / (pow(g, kk) * factorial_table<Real>(kk - 1)[kk - 1]);
      return assemble(core, ms, beta) * T(pre);
    }
  }
  return T(0);
}

// SOP series, Eq. 46/57/69 structure, with beta^{-k} (2^R0 ge)^m rho^{m+1}
// regrouped as rho kappa^m (theta/beta)^{k-m}.
template <class Real>
TR<Real> sop_closed_impl(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0) {
  using std::exp;
  using std::pow;
  using T = TR<Real>;
  const Real s = pow(Real(2), Real(r0));
  const Real theta = s - 1;
  const Real g = lb.gamma_bar_e;
  const Real sg = s * g;
  const Real beta = Real(lb.gamma_bar_b) * Real(ms.sigma_min);
  const Real tau = theta / beta;
  const Real damp = exp(-tau);
  const int nmax = ms.dof + ms.q_max - 1;
  const int kk = lb.k_eves;
  const std::vector<Real> tt = exp_terms(tau, nmax);

  // cumulative sum over k <= n of sum_m coef_m kappa^m tau^{k-m}/(k-m)!
  auto cumulative = [&](const Real& kappa, const std::vector<Real>& coef) {
    std::vector<Real> kp(nmax + 1);
    kp[0] = coef[0];
    Real pw = 1;
    for (int m = 1; m <= nmax; ++m) {
      pw *= kappa;
      kp[m] = coef[m] * pw;
    }
    std::vector<T> cum(nmax + 1);
    T acc = 0;
    for (int k = 0; k <= nmax; ++k) {
      T term = 0;
      for (int m = 0; m <= k; ++m) term += T(kp[m] * tt[k - m]);
      acc += term;
      cum[k] = acc;
    }
    return cum;
  };

  auto outage_sum = [&](const Real& lead, const Real& rho_pow, const std::vector<T>& cum) {
    T total = 0;
    for (int q = 0; q <= ms.q_max; ++q) {
      const int n = ms.dof + q - 1;
      total += T(Real(ms.weights[q])) * (T(lead) - T(damp * rho_pow) * cum[n]);
    }
    return total;
  };

  switch (lb.scenario) {
    case Scenario::SE: {
      const Real rho = beta / (beta + sg);
      const std::vector<Real> ones(nmax + 1, Real(1));
      return outage_sum(Real(1), rho, cumulative(sg / (beta + sg), ones));
    }
    case Scenario::MIE: {
      const std::vector<Real> ck = binomial_row<Real>(kk - 1);
      const std::vector<Real> ones(nmax + 1, Real(1));
      T total = 0;
      for (int n = 0; n < kk; ++n) {
        const Real den = Real(n + 1) * beta + sg;
        const T part = T(Real(kk) * ck[n]) * outage_sum(1 / Real(n + 1), beta / den, cumulative(sg / den, ones));
        if (n % 2 == 0) total += part;
        else total -= part;
      }
      return total;
    }
    case Scenario::MCE: {
      const Real rho = beta / (beta + sg);
      // C(K+m-1, m) = (K+m-1)! / ((K-1)! m!)
      std::vector<Real> coef(nmax + 1);
      coef[0] = 1;
      for (int m = 1; m <= nmax; ++m) coef[m] = coef[m - 1] * Real(kk + m - 1) / Real(m);
      return outage_sum(Real(1), pow(rho, kk), cumulative(sg / (beta + sg), coef));
    }
  }
  return T(0);
}

template <class Real>
ClosedEval to_eval(const TR<Real>& t, bool extended) {
  ClosedEval e;
  e.value = static_cast<double>(t.v);
  e.est_rel_err = t.finite() ? t.rel_err() : std::numeric_limits<double>::infinity();
  e.extended = extended;
  return e;
}

template <class F>
ClosedEval run_tiers(F&& eval_in, const EvalPrecision& prec, int dof, const char* what) {
  prec.validate();
  auto accept = [&](const ClosedEval& e) {
    return std::isfinite(e.value) && std::isfinite(e.est_rel_err) && e.est_rel_err <= 1e-3;
  };
  bool try_double = prec.mode == PrecisionMode::standard ||
                    (prec.mode == PrecisionMode::automatic && dof <= prec.extended_dof_threshold);
  if (try_double) {
    ClosedEval d = eval_in(double{});
    if (prec.mode == PrecisionMode::standard) {
      if (!accept(d)) throw PrecisionLoss(std::string(what) + ": cancellation too large in standard precision",
                                          d.est_rel_err);
      return d;
    }
    if (std::isfinite(d.value) && d.est_rel_err <= prec.rel_tol) return d;
  }
  ClosedEval x = eval_in(Extended{});
  if (!accept(x)) throw PrecisionLoss(std::string(what) + ": cancellation too large in extended precision",
                                      x.est_rel_err);
  return x;
}

}  // namespace

ClosedEval secrecy_rate_closed_double(const LinkBudget& lb, const MoschopoulosSeries& ms) {
  return to_eval(rate_closed_impl<double>(lb, ms), false);
}

ClosedEval secrecy_rate_closed_extended(const LinkBudget& lb, const MoschopoulosSeries& ms) {
  return to_eval(rate_closed_impl<Extended>(lb, ms), true);
}

ClosedEval secrecy_rate_closed(const LinkBudget& lb, const MoschopoulosSeries& ms, const EvalPrecision& prec) {
  auto eval = [&](auto tag) {
    using Real = decltype(tag);
    return to_eval(rate_closed_impl<Real>(lb, ms), std::is_same_v<Real, Extended>);
  };
  ClosedEval e = run_tiers(eval, prec, ms.dof, "secrecy_rate_closed");
  if (e.value < 0.0) e.value = 0.0;
  return e;
}

ClosedEval sop_closed(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0, const EvalPrecision& prec) {
  if (!(r0 > 0.0)) throw DomainError("sop_closed: target rate must be positive");
  auto eval = [&](auto tag) {
    using Real = decltype(tag);
    return to_eval(sop_closed_impl<Real>(lb, ms, r0), std::is_same_v<Real, Extended>);
  };
  ClosedEval e = run_tiers(eval, prec, ms.dof, "sop_closed");
  if (e.value < -1e-9 || e.value > 1.0 + 1e-9) e.clamped = true;
  e.value = std::min(1.0, std::max(0.0, e.value));
  return e;
}

// ---------------------------------------------------------------------------
// Truncated power series in z = 1/gamma_bar_b.

namespace {

using Series = std::vector<Extended>;

Series series_mul(const Series& a, const Series& b) {
  const std::size_t d = a.size();
  Series out(d, Extended(0));
  for (std::size_t i = 0; i < d; ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; i + j < d; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// (alpha + slope z)^(-p)
Series inverse_power(const Extended& alpha, const Extended& slope, int p, int degree) {
  using boost::multiprecision::pow;
  Series out(degree + 1);
  const Extended ratio = -slope / alpha;
  Extended coef = pow(alpha, -p);
  for (int j = 0; j <= degree; ++j) {
    out[j] = coef;
    coef *= ratio * Extended(p + j) / Extended(j + 1);
  }
  return out;
}

Series exp_series(const Extended& rate, int degree) {
  Series out(degree + 1);
  out[0] = 1;
  for (int j = 1; j <= degree; ++j) out[j] = out[j - 1] * rate / Extended(j);
  return out;
}

}  // namespace

std::vector<Extended> sop_z_series(const LinkBudget& lb, const MoschopoulosSeries& ms, double r0, int degree) {
  using boost::multiprecision::pow;
  if (!(r0 > 0.0)) throw DomainError("sop_z_series: target rate must be positive");
  if (degree < 0) throw DomainError("sop_z_series: negative degree");
  const Extended s = pow(Extended(2), Extended(r0));
  const Extended theta = s - 1;
  const Extended sg = s * Extended(lb.gamma_bar_e);
  const Extended smin = ms.sigma_min;
  const int kk = lb.k_eves;
  const int d = degree;
  // e^{-theta/beta} with beta = smin / z
  const Series damp = exp_series(-theta / smin, d);
  const std::vector<Extended> fact = factorial_table<Extended>(d + kk + 2);

  // sum_k (z/smin)^k sum_m lead(k,m) theta^{k-m} sg^m inv(m) for k <= min(n, d)
  auto inner_sum = [&](int n, const Extended& alpha, auto&& lead, int pow_offset) {
    Series acc(d + 1, Extended(0));
    const int kmax = std::min(n, d);
    for (int k = 0; k <= kmax; ++k) {
      Series zk(d + 1, Extended(0));
      zk[k] = pow(1 / smin, k);
      Series bracket(d + 1, Extended(0));
      for (int m = 0; m <= k; ++m) {
        const Extended scale = lead(k, m) * pow(theta, k - m) * pow(sg, m);
        const Series inv = inverse_power(alpha, sg / smin, m + pow_offset, d);
        for (int j = 0; j <= d; ++j) bracket[j] += scale * inv[j];
      }
      const Series term = series_mul(zk, bracket);
      for (int j = 0; j <= d; ++j) acc[j] += term[j];
    }
    return series_mul(damp, acc);
  };

  Series total(d + 1, Extended(0));
  for (int q = 0; q <= ms.q_max; ++q) {
    const int n = ms.dof + q - 1;
    const Extended w = ms.weights[q];
    if (w == 0) continue;
    Series tq(d + 1, Extended(0));
    switch (lb.scenario) {
      case Scenario::SE: {
        auto lead = [&](int k, int m) { return 1 / fact[k - m]; };
        const Series body = inner_sum(n, Extended(1), lead, 1);
        tq[0] = 1;
        for (int j = 0; j <= d; ++j) tq[j] -= body[j];
        break;
      }
      case Scenario::MIE: {
        const std::vector<Extended> ck = binomial_row<Extended>(kk - 1);
        for (int nn = 0; nn < kk; ++nn) {
          auto lead = [&](int k, int m) { return 1 / fact[k - m]; };
          const Series body = inner_sum(n, Extended(nn + 1), lead, 1);
          const Extended coef = Extended(kk) * ck[nn] * Extended(sign_of_power(nn));
          tq[0] += coef / Extended(nn + 1);
          for (int j = 0; j <= d; ++j) tq[j] -= coef * body[j];
        }
        break;
      }
      case Scenario::MCE: {
        // (1/(K-1)!) (1/k!) C(k,m) (K+m-1)!
        auto lead = [&](int k, int m) {
          Extended c = 1;
          for (int i = 1; i <= m; ++i) c *= Extended(kk + i - 1) / Extended(i);  // C(K+m-1, m)
          return c / fact[k - m];
        };
        const Series body = inner_sum(n, Extended(1), lead, kk);
        tq[0] = 1;
        for (int j = 0; j <= d; ++j) tq[j] -= body[j];
        break;
      }
    }
    for (int j = 0; j <= d; ++j) total[j] += w * tq[j];
  }
  return total;
}

}  // namespace capa
