// Standard normal and chi-squared tail probabilities.
//
// Only integer degrees of freedom are needed anywhere in this library (the
// chi-bar-squared mixture has components chi^2_1 .. chi^2_{J-1}), so the
// survival function is computed exactly through the half-integer gamma
// recurrence instead of a general incomplete-gamma routine.

#pragma once

#include <cmath>
#include <stdexcept>

namespace lro {

// P(N(0,1) <= z)
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// P(N(0,1) > z)
inline double normal_sf(double z) {
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

// P(chi^2_df > x) for integer df >= 1.
//
// Q_1(x) = erfc(sqrt(x/2)),  Q_2(x) = exp(-x/2), and
// Q_{k+2}(x) = Q_k(x) + (x/2)^{k/2} e^{-x/2} / Gamma(k/2 + 1).
inline double chi_sq_survival(double x, int df) {
  if (df < 1) throw std::invalid_argument("chi_sq_survival: df must be >= 1");
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;

  const double h = 0.5 * x;
  double q, term;
  int k;
  if (df % 2 == 1) {
    q = std::erfc(std::sqrt(h));
    // first odd increment: (x/2)^{1/2} e^{-x/2} / Gamma(3/2)
    term = std::sqrt(h) * std::exp(-h) / (0.5 * std::sqrt(M_PI));
    k = 1;
  } else {
    q = std::exp(-h);
    term = h * std::exp(-h);  // (x/2)^1 e^{-x/2} / Gamma(2)
    k = 2;
  }
  while (k + 2 <= df) {
    q += term;
    k += 2;
    term *= h / (0.5 * k);  // advance (x/2)^{k/2}/Gamma(k/2+1) by one step
  }
  return q < 1.0 ? q : 1.0;
}

}  // namespace lro
