// Scalar Gaussian helpers: pdf/cdf, Q function and its inverse, entropies.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ssc {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kLn2 = 0.693147180559945309417232121458176568;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

inline double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * kPi * var);
}

inline double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * d * d / var - 0.5 * std::log(2.0 * kPi * var);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Q(x) = P[N(0,1) > x]
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Inverse of Q on (0,1), solved by safeguarded Newton on the complementary
// Gaussian CDF; absolute tolerance 1e-12 on the argument.
inline double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("q_inverse: p must be in (0,1)");
  double lo = -40.0, hi = 40.0;
  double x = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double fx = q_function(x) - p;  // decreasing in x
    if (fx > 0.0) lo = x; else hi = x;
    const double deriv = -normal_pdf(x);
    double step = fx / deriv;
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-12) return next;
    x = next;
  }
  return x;
}

// Binary entropy in bits.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

// phi(t)/Q(t) for large t where Q underflows (Mills ratio reciprocal).
inline double pdf_over_q(double t) {
  if (t < 36.0) {
    const double q = q_function(t);
    if (q > 0.0) return normal_pdf(t) / q;
  }
  const double t2 = t * t;
  return t * (1.0 + 1.0 / t2 - 2.0 / (t2 * t2));
}

}  // namespace ssc
