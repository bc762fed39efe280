// Section prior, MMSE denoiser g_in, the scalar state-evolution operator
// T_u(E) = E_{s,z}[ sum_i (g_in,i - s_i)^2 ] at Sigma(E), its fixed points,
// the MSE floor, basin probing and the GAMP threshold R_u.
//
// The (s,z) expectation is Monte Carlo with common random numbers: one
// SeWorkspace holds a counter-seeded sample bank that is reused for every
// evaluation, so the estimated operator is a deterministic smooth function of
// E and fixed-point iteration converges to solver tolerance.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "ssc/effective_noise.hpp"

namespace ssc {

class SectionPrior {
 public:
  enum class Kind { OneHot, Atoms };

  static SectionPrior one_hot(int B);
  // Finite-support prior: atoms(k, :) with probability weights[k]. The prior
  // must have unit second moment, matching the codeword power normalization.
  static SectionPrior atoms(Eigen::MatrixXd support, Eigen::VectorXd weights);

  Kind kind() const { return kind_; }
  int section_size() const { return B_; }
  // E[ ||s - E s||^2 ], the MSE of the prior-mean estimator.
  double prior_variance() const;
  const Eigen::MatrixXd& support() const { return support_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd mean() const;

 private:
  SectionPrior() = default;
  Kind kind_ = Kind::OneHot;
  int B_ = 2;
  Eigen::MatrixXd support_;  // Atoms only
  Eigen::VectorXd weights_;  // Atoms only
};

// Posterior mean of a section observed through AWGN with per-component
// variance Sigma^2/log2(B); z is the standard-normal noise realization.
Eigen::VectorXd denoise(const SectionPrior& prior, const Eigen::VectorXd& s,
                        const Eigen::VectorXd& z, double sigma);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

enum class SeEvaluator {
  MonteCarlo,        // counter-seeded bank of n_mc draws (the default)
  TensorQuadrature,  // tensor Gauss-Hermite grid over z; deterministic, for small B
};

struct SeOptions {
  int n_mc = 200000;
  std::uint64_t seed = 12345;
  double tol = 1e-9;
  int max_iter = 10000;
  SeEvaluator evaluator = SeEvaluator::MonteCarlo;
  int quad_points_per_dim = 0;  // 0: picked from B (TensorQuadrature only)
};

enum class MseRoute { Direct, SecondMomentIdentity };

// Common-random-number workspace: sample bank plus a cache of the denoiser
// MSE as a function of sigma.
class SeWorkspace {
 public:
  SeWorkspace(SectionPrior prior, SeOptions options);

  const SectionPrior& prior() const { return prior_; }
  const SeOptions& options() const { return options_; }

  // Average denoiser MSE at noise level sigma over the bank (cached).
  McEstimate mse(double sigma) const;
  // Same expectation through 1 - E[ sum_i g_i^2 ]; oracle route, uncached.
  McEstimate mse_route(double sigma, MseRoute route) const;

  // Bank access for other common-random-number expectations.
  Eigen::ArrayXXd z_samples(int start, int count) const;
  int atom_choice(int n) const;
  int bank_size() const { return bank_size_; }
  const Eigen::ArrayXd& bank_weights() const { return bank_weights_; }

  // TensorQuadrature stores nodes in the (B-1)-dimensional space of the
  // noise differences z_k - z_1, which both the denoiser MSE and the
  // potential's entropy-like term depend on exclusively.
  bool quadrature() const { return quadrature_; }
  const Eigen::ArrayXXd& diff_bank() const { return diff_bank_; }

 private:
  McEstimate evaluate(double sigma, MseRoute route) const;
  McEstimate reduce(const Eigen::ArrayXd& per_sample) const;

  SectionPrior prior_;
  SeOptions options_;
  int bank_size_ = 0;
  Eigen::ArrayXXd z_bank_;        // bank_size x B when materialized (MonteCarlo)
  Eigen::ArrayXXd diff_bank_;     // bank_size x (B-1) (TensorQuadrature)
  Eigen::ArrayXd bank_weights_;   // sums to 1
  Eigen::ArrayXd z_diff_;         // one-hot B=2 fast path: z0 - z1
  Eigen::VectorXi atom_choices_;  // Atoms prior: sampled atom per draw
  bool materialized_ = false;
  bool quadrature_ = false;

  mutable std::map<std::uint64_t, McEstimate> cache_;
  mutable std::mutex mutex_;
};

// One application of the SE operator of the uncoupled ensemble.
McEstimate se_operator_u(const EffectiveNoiseContext& ctx, const SeWorkspace& ws, double E);

struct SeSolveResult {
  double fixed_point = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // E^(0), E^(1), ...
  double mc_std_error = 0.0;
};

// Iterates T_u from E_init until |E^(t+1)-E^(t)| < tol. If stop_below is set,
// stops early once E drops to it (monotone trajectories stay below).
SeSolveResult se_fixed_point(const EffectiveNoiseContext& ctx, const SeWorkspace& ws,
                             double E_init,
                             std::optional<double> stop_below = std::nullopt);

// Exactly `steps` applications of T_u from E_init (no tolerance stopping);
// returns E^(0), ..., E^(steps).
std::vector<double> se_trajectory(const EffectiveNoiseContext& ctx, const SeWorkspace& ws,
                                  double E_init, int steps);

// Fixed point from the all-informative initialization E = 0.
double mse_floor(const EffectiveNoiseContext& ctx, const SeWorkspace& ws);

// Whether T_u^(inf)(E) lands on the MSE floor (within 10 tol).
bool in_basin(const EffectiveNoiseContext& ctx, const SeWorkspace& ws, double E);

// sup of the basin of attraction of the floor; 1 when the basin is all of [0,1].
double basin_boundary(const EffectiveNoiseContext& ctx, const SeWorkspace& ws);

// Whether a fixed point from E=0 is the low ("good") branch rather than the
// single surviving high fixed point of rates far above capacity. Threshold
// searches use this to stay in the first interval where decoding succeeds.
bool floor_is_good_phase(const SectionPrior& prior, double floor);

struct ThresholdResult {
  double rate = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int evaluations = 0;
};

// Bisection for R_u = sup{ R : T_u^(inf)(1) = E_0 }, to rate_tol bits.
// The initial bracket is expanded automatically if it does not straddle.
ThresholdResult threshold_gamp_u(const ChannelModel& channel, const QuadratureSpec& quad,
                                 const SectionPrior& prior, const SeOptions& options,
                                 double r_lo, double r_hi, double rate_tol);

}  // namespace ssc
