#include "capa/specfun.hpp"

#include <mutex>

namespace capa {

double log_factorial(int n) {
  if (n < 0) throw DomainError("log_factorial: negative argument");
  if (n < 2) return 0.0;
  return std::lgamma(static_cast<double>(n) + 1.0);
}

GammaInt gamma_int(int n) {
  if (n == 0) throw DomainError("gamma_int(0) diverges; use exponential integral branch");
  if (n < 0) throw DomainError("gamma_int: negative argument");
  double v = 1.0;
  for (int k = 2; k < n && std::isfinite(v); ++k) v *= k;
  return {v, log_factorial(n - 1)};
}

double log_binomial(int n, int k) {
  if (n < 0 || k < 0) throw DomainError("log_binomial: negative argument");
  if (k > n) throw DomainError("log_binomial: k > n");
  if (k == 0 || k == n) return 0.0;
  if (n <= 60) {
    // exact: C(n, i) stays below 2^63 for n <= 60 at every step
    const int kk = std::min(k, n - k);
    std::uint64_t c = 1;
    for (int i = 1; i <= kk; ++i) c = c * static_cast<std::uint64_t>(n - kk + i) / static_cast<std::uint64_t>(i);
    return std::log(static_cast<double>(c));
  }
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double harmonic(int n) {
  static std::mutex mu;
  static std::vector<double> table{0.0};
  if (n < 0) throw DomainError("harmonic: negative argument");
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<int>(table.size()) <= n) {
    const int k = static_cast<int>(table.size());
    table.push_back(table.back() + 1.0 / k);
  }
  return table[n];
}

}  // namespace capa
