#include "ssc/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <map>
#include <mutex>

namespace ssc {

namespace {

GaussHermiteRule build_rule(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  // Jacobi matrix for Hermite polynomials: zero diagonal, off-diagonal sqrt(k/2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussHermiteRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(order);
  const double sqrt_pi = std::sqrt(kPi);
  for (int i = 0; i < order; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = sqrt_pi * v0 * v0;
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int order) {
  static std::map<int, GaussHermiteRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

}  // namespace ssc
