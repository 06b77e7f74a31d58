#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/float128.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace capa {

using Extended = boost::multiprecision::float128;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Raised when a closed-form sum loses too much to cancellation even in the
// extended type. Callers fall back to quadrature.
struct PrecisionLoss : std::runtime_error {
  double estimated_rel_err;
  PrecisionLoss(const std::string& what, double err) : std::runtime_error(what), estimated_rel_err(err) {}
};

enum class PrecisionMode { standard, extended, automatic };

struct EvalPrecision {
  PrecisionMode mode = PrecisionMode::automatic;
  double rel_tol = 1e-10;
  // automatic mode starts in the extended type above this DoF
  int extended_dof_threshold = 16;

  static EvalPrecision standard() { return {PrecisionMode::standard, 1e-10, 16}; }
  static EvalPrecision extended() { return {PrecisionMode::extended, 1e-20, 16}; }
  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-3)) throw DomainError("rel_tol must lie in (0, 1e-3]");
  }
};

template <class Real>
inline Real euler_gamma() {
  return boost::math::constants::euler<Real>();
}

struct GammaInt {
  double value;      // (n-1)!, +inf once it overflows
  double log_value;  // ln (n-1)!
};

GammaInt gamma_int(int n);
double log_factorial(int n);
double log_binomial(int n, int k);
double harmonic(int n);  // H_n, cached

// Value with a running bound on the magnitudes that went into it. The ratio
// m/|v| estimates how many digits were lost to cancellation.
template <class Real>
struct Tracked {
  Real v{0};
  Real m{0};

  Tracked() = default;
  Tracked(const Real& x) : v(x), m(x < 0 ? Real(-x) : x) {}  // NOLINT implicit on purpose
  Tracked(const Real& x, const Real& mag) : v(x), m(mag) {}
  template <class T, class = std::enable_if_t<std::is_arithmetic_v<T>>>
  Tracked(T x) : Tracked(Real(x)) {}  // NOLINT

  Tracked& operator+=(const Tracked& o) { v += o.v; m += o.m; return *this; }
  Tracked& operator-=(const Tracked& o) { v -= o.v; m += o.m; return *this; }
  Tracked& operator*=(const Tracked& o) { v *= o.v; m *= o.m; return *this; }
  Tracked& operator/=(const Tracked& o) {
    v /= o.v;
    m /= (o.v < 0 ? Real(-o.v) : o.v);
    return *this;
  }
  friend Tracked operator+(Tracked a, const Tracked& b) { return a += b; }
  friend Tracked operator-(Tracked a, const Tracked& b) { return a -= b; }
  friend Tracked operator*(Tracked a, const Tracked& b) { return a *= b; }
  friend Tracked operator/(Tracked a, const Tracked& b) { return a /= b; }
  friend Tracked operator-(Tracked a) { a.v = -a.v; return a; }

  double rel_err() const {
    using std::abs;
    const Real eps = std::numeric_limits<Real>::epsilon();
    if (v == 0) return m == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(eps * m / abs(v));
  }
  bool finite() const {
    using std::isfinite;
    using boost::multiprecision::isfinite;
    return isfinite(v) && isfinite(m);
  }
};

namespace detail {

template <class Real>
Real e1_series(const Real& x) {
  using std::abs;
  using std::log;
  const Real eps = std::numeric_limits<Real>::epsilon();
  Real sum = 0, term = 1;
  for (int k = 1; k < 1000; ++k) {
    term *= -x / k;
    const Real add = term / k;
    sum += add;
    if (abs(add) <= eps * abs(sum)) break;
  }
  return -euler_gamma<Real>() - log(x) - sum;
}

// e^x E1(x) by modified Lentz, valid for x >= 1
template <class Real>
Real scaled_e1_cf(const Real& x) {
  using std::abs;
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real tiny = std::numeric_limits<Real>::min() / eps;
  Real b = x + 1;
  Real c = 1 / tiny;
  Real d = 1 / b;
  Real h = d;
  for (int i = 1; i < 100000; ++i) {
    const Real an = -Real(i) * i;
    b += 2;
    d = 1 / (an * d + b);
    c = b + an / c;
    const Real del = c * d;
    h *= del;
    if (abs(del - 1) <= eps) break;
  }
  return h;
}

inline double lgam(double x) { return std::lgamma(x); }
inline Extended lgam(const Extended& x) { return boost::math::lgamma(x); }

// n! by direct product; falls back to exp(lgamma) past the double range
template <class Real>
Real factorial(int n) {
  using std::exp;
  if (n > 170 && std::numeric_limits<Real>::max_exponent <= 1024) return exp(lgam(Real(n + 1)));
  Real f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

template <class Real>
void require_positive(const Real& x, const char* what) {
  if (!(x > 0)) throw DomainError(std::string(what) + ": argument must be positive");
}

}  // namespace detail

template <class Real>
Real exp_e1(const Real& x) {
  using std::exp;
  detail::require_positive(x, "exp_e1");
  if (x < 1) return detail::e1_series(x);
  return detail::scaled_e1_cf(x) * exp(-x);
}

template <class Real>
Real scaled_e1(const Real& x) {
  using std::exp;
  detail::require_positive(x, "scaled_e1");
  if (x < 1) return exp(x) * detail::e1_series(x);
  return detail::scaled_e1_cf(x);
}

// Regularized upper gamma Q(n, x) for integer n >= 1.
template <class Real>
Real reg_upper_gamma(int n, const Real& x);

// Regularized lower gamma P(n, x) for integer n >= 1.
template <class Real>
Real reg_lower_gamma(int n, const Real& x) {
  using std::exp;
  using std::log;
  if (n < 1) throw DomainError("reg_lower_gamma: shape must be >= 1");
  if (x < 0) throw DomainError("reg_lower_gamma: x must be nonnegative");
  if (x == 0) return Real(0);
  if (x >= n + 1) return 1 - reg_upper_gamma<Real>(n, x);
  // P(n,x) = x^n e^{-x}/n! * sum_j x^j / ((n+1)...(n+j))
  const Real eps = std::numeric_limits<Real>::epsilon();
  Real term = 1, sum = 1;
  for (int j = 1; j < 100000; ++j) {
    term *= x / (n + j);
    sum += term;
    if (term <= eps * sum) break;
  }
  const Real lg = detail::lgam(Real(n + 1));
  return exp(n * log(x) - x - lg) * sum;
}

template <class Real>
Real reg_upper_gamma(int n, const Real& x) {
  using std::exp;
  using std::log;
  if (n < 1) throw DomainError("reg_upper_gamma: shape must be >= 1");
  if (x < 0) throw DomainError("reg_upper_gamma: x must be nonnegative");
  if (x == 0) return Real(1);
  if (x < n + 1) return 1 - reg_lower_gamma<Real>(n, x);
  // e^{-x} sum_{k<n} x^k/k!, summed from the largest term down in log form
  const Real lx = log(x);
  const Real top = (n - 1) * lx - detail::lgam(Real(n));
  Real term = 1, sum = 1;
  for (int k = n - 1; k >= 1; --k) {
    term *= Real(k) / x;
    sum += term;
  }
  return exp(top - x) * sum;
}

// Gamma(n, x) for integer n. n = 0 is E1(x).
template <class Real>
Real upper_gamma(int n, const Real& x) {
  using std::exp;
  using std::isfinite;
  using std::log;
  using boost::multiprecision::isfinite;
  detail::require_positive(x, "upper_gamma");
  if (n < 0) throw DomainError("upper_gamma: order must be nonnegative");
  if (n == 0) return exp_e1(x);
  Real term = 1, sum = 1, fact = 1;
  for (int k = 1; k < n; ++k) {
    term *= x / k;
    sum += term;
    fact *= k;
  }
  Real direct = fact * exp(-x) * sum;
  if (isfinite(direct) && direct > std::numeric_limits<Real>::min()) return direct;
  return exp(detail::lgam(Real(n)) + log(reg_upper_gamma<Real>(n, x)));
}

// n! (1 - e^{-x} sum_{k<=n} x^k/k!) = integral_0^x u^n e^{-u} du
template <class Real>
Real lower_gamma_int(int n, const Real& x) {
  using std::exp;
  using std::log;
  detail::require_positive(x, "lower_gamma_int");
  if (n < 0) throw DomainError("lower_gamma_int: order must be nonnegative");
  return detail::factorial<Real>(n) * reg_lower_gamma<Real>(n + 1, x);
}

// F(n+1, x) = integral_x^inf ln(u) u^n e^{-u} du, arranged as
// n! [ln x Q(n+1,x) + E1(x) + sum_{j=1}^n Q(j,x)/j].
template <class Real>
Real f_log_moment(int n_plus_1, const Real& x) {
  using std::exp;
  using std::log;
  detail::require_positive(x, "f_log_moment");
  if (n_plus_1 < 1) throw DomainError("f_log_moment: order must be >= 1");
  const int n = n_plus_1 - 1;
  Real acc = log(x) * reg_upper_gamma<Real>(n + 1, x) + exp_e1(x);
  for (int j = 1; j <= n; ++j) acc += reg_upper_gamma<Real>(j, x) / j;
  if (n == 0) return acc;
  return detail::factorial<Real>(n) * acc;
}

// Reduced forms of Gamma(j+1, c) and F(j+1, c) for one fixed c, j = 0..jmax:
//   s[j]     = e^c Gamma(j+1, c) / j!  = sum_{i<=j} c^i / i!
//   f[j]     = e^c F(j+1, c) / j!      = ln c * s[j] + e^c E1(c) + sum_{i=1}^{j} s[i-1] / i
//   scaled_e1 = e^c E1(c)              (the j = -1 member of the gamma family)
// Closed forms that multiply these by e^{-c}-type prefactors can then cancel
// the exponentials exactly instead of forming them.
template <class Real>
struct ReducedGammaTable {
  Real c{0};
  Real scaled_e1_c{0};
  std::vector<Real> s;
  std::vector<Real> f;

  ReducedGammaTable(const Real& c_, int jmax) : c(c_), s(jmax + 1), f(jmax + 1) {
    using std::log;
    detail::require_positive(c_, "ReducedGammaTable");
    scaled_e1_c = scaled_e1(c_);
    const Real lc = log(c_);
    Real term = 1, acc = 0, harmonic_part = 0;
    for (int j = 0; j <= jmax; ++j) {
      if (j > 0) {
        harmonic_part += s[j - 1] / j;
        term *= c_ / j;
      }
      acc += term;
      s[j] = acc;
      f[j] = lc * s[j] + scaled_e1_c + harmonic_part;
    }
  }
};

// Factorials 0!..n! in Real; overflow shows up as inf in double.
template <class Real>
std::vector<Real> factorial_table(int n) {
  std::vector<Real> f(n + 1);
  f[0] = 1;
  for (int k = 1; k <= n; ++k) f[k] = f[k - 1] * k;
  return f;
}

}  // namespace capa
