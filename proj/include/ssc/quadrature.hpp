// Gauss-Hermite rules (Golub-Welsch on the Jacobi matrix, computed with
// Eigen's symmetric eigensolver) and a recursive adaptive Simpson rule.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ssc/gaussian.hpp"

namespace ssc {

// Nodes/weights for the weight function exp(-x^2); weights sum to sqrt(pi).
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Cached; thread-safe.
const GaussHermiteRule& gauss_hermite(int order);

// E_{x ~ N(mean, var)}[f(x)] with an order-point Gauss-Hermite rule.
// var == 0 degenerates to f(mean).
template <typename F>
double gauss_expect(double mean, double var, int order, F&& f) {
  if (var == 0.0) return f(mean);
  if (var < 0.0) throw std::domain_error("gauss_expect: negative variance");
  const GaussHermiteRule& rule = gauss_hermite(order);
  const double scale = std::sqrt(2.0 * var);
  double acc = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * f(mean + scale * rule.nodes[i]);
  return acc / std::sqrt(kPi);
}

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_step(F&& f, double a, double fa, double b, double fb, double m,
                     double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson on [a,b] to absolute tolerance abs_tol.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 48) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = detail::simpson(a, fa, b, fb, fm);
  return detail::adaptive_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

// Adaptive integration over consecutive segments given by sorted breakpoints.
template <typename F>
double integrate_segments(F&& f, const std::vector<double>& breakpoints, double abs_tol) {
  if (breakpoints.size() < 2) return 0.0;
  const double per = abs_tol / static_cast<double>(breakpoints.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    acc += adaptive_simpson(f, breakpoints[i], breakpoints[i + 1], per);
  return acc;
}

}  // namespace ssc
