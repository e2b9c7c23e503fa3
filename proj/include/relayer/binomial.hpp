// Binomial probability mass functions and their convolution.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace relayer {

/// Trials above this count are evaluated in the log domain.
inline constexpr int kLogDomainTrials = 60;

/// pmf[m] = C(n, m) q^m (1-q)^(n-m) for m = 0..n.
inline std::vector<double> binomial_pmf(int n, double q) {
  if (n < 0) throw std::invalid_argument("binomial trials must be >= 0");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::domain_error("binomial probability must lie in [0, 1]");

  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (q == 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (q == 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }

  if (n > kLogDomainTrials) {
    const double lq = std::log(q);
    const double lr = std::log1p(-q);
    const double lfn = std::lgamma(n + 1.0);
    for (int m = 0; m <= n; ++m) {
      const double lc = lfn - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0);
      pmf[m] = std::exp(lc + m * lq + (n - m) * lr);
    }
    return pmf;
  }

  double coeff = 1.0;  // C(n, m), updated incrementally
  for (int m = 0; m <= n; ++m) {
    pmf[m] = coeff * std::pow(q, m) * std::pow(1.0 - q, n - m);
    coeff = coeff * (n - m) / (m + 1.0);
  }
  return pmf;
}

/// Distribution of the sum of two independent counts.
inline std::vector<double> convolve(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// Count of successes among n1 trials at q1 plus n2 trials at q2.
inline std::vector<double> binomial_mixture_pmf(int n1, double q1, int n2,
                                                double q2) {
  return convolve(binomial_pmf(n1, q1), binomial_pmf(n2, q2));
}

}  // namespace relayer
