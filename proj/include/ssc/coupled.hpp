// Spatially coupled ensemble: block variance matrix J from a design function,
// per-block effective noise, the profile-valued SE operator with pinning,
// fixed-point profiles, saturated profiles, the shift operator, the coupled
// potential and the finite-size coupled GAMP threshold.
//
// Profiles are length-Gamma vectors of per-block MSE values in [0,1] with the
// first and last 3w entries pinned to exactly zero. A periodic (circulant)
// variant without pinning is provided as a test mode in which the coupled
// operator decouples exactly into the scalar one.
#pragma once

#include <functional>
#include <string>

#include "ssc/potential.hpp"

namespace ssc {

using DesignFunction = std::function<double(double)>;

// g(x) = 1 on [-1,1].
DesignFunction rectangular_design();
// g(x) = 1 - 0.8|x| on [-1,1]; exercises a nonuniform admissible design.
DesignFunction tapered_design();

struct CouplingSpec {
  int gamma = 0;
  int w = 0;
  double rate = 0.0;
  double rate_eff = 0.0;
  Eigen::MatrixXd variances;  // J, gamma x gamma, rows average to 1
  Eigen::VectorXd row_scale;  // the normalizers gamma_r
  bool periodic = false;
  std::string design_name;

  int pin_width() const { return periodic ? 0 : 3 * w; }
  bool pinned(int r) const {
    return !periodic && (r < pin_width() || r >= gamma - pin_width());
  }
};

// J(r,c) = gamma_r Gamma g((r-c)/w) / (2w+1), with gamma_r enforcing row sums
// Gamma. Requires Gamma > 8w unless periodic.
CouplingSpec build_coupling(int gamma, int w, const DesignFunction& g, double rate,
                            const std::string& design_name = "rectangular",
                            bool periodic = false);

// All ones off the pins, zero on them: the SE starting profile.
Eigen::VectorXd initial_profile(const CouplingSpec& spec);
Eigen::VectorXd flat_profile(const CouplingSpec& spec, double E);

// Per-block effective noise variances Sigma_c^2 (0 and +inf sentinels allowed).
Eigen::VectorXd effective_noise_per_block(const CouplingSpec& spec,
                                          const EffectiveNoiseContext& ctx,
                                          const Eigen::VectorXd& profile);

// One application of the coupled SE operator; pinning re-imposed on output.
Eigen::VectorXd se_operator_c(const CouplingSpec& spec, const EffectiveNoiseContext& ctx,
                              const SeWorkspace& ws, const Eigen::VectorXd& profile);

struct CoupledResult {
  Eigen::VectorXd profile;
  int iterations = 0;
  bool converged = false;
  bool decoded = false;           // stopped because max_r E_r fell below stop level
  Eigen::MatrixXd trajectory;     // (iterations+1) x gamma when recorded
};

// Iterate from the all-ones pinned profile until the sup-norm change drops
// below tol. stop_below_max ends the run early once max_r E_r <= it.
CoupledResult coupled_fixed_point(const CouplingSpec& spec, const EffectiveNoiseContext& ctx,
                                  const SeWorkspace& ws,
                                  std::optional<double> stop_below_max = std::nullopt,
                                  bool record_trajectory = false);

// Saturated profile of a unimodal fixed-point-shaped profile (Fig.-style
// construction): E_0 up to the crossing, the rising flank unchanged, the peak
// value held to the right. Throws on non-unimodal input.
Eigen::VectorXd saturate_profile(const Eigen::VectorXd& profile, double e_floor, int pin_width);

// [S(E)]_1 = E_0, [S(E)]_r = E_{r-1}.
Eigen::VectorXd shift_profile(const Eigen::VectorXd& profile, double e_floor);

// F_c(E) = sum_r U_u(E_r) - sum_c S_u(Sigma_c(E)).
double potential_c(const CouplingSpec& spec, const EffectiveNoiseContext& ctx,
                   const SeWorkspace& ws, const Eigen::VectorXd& profile);

enum class Degradation { Equal, Degraded, StrictlyDegraded, Incomparable };

// Componentwise comparison of E against G. E is degraded w.r.t. G when
// E >= G everywhere, and strictly so when in addition some component is
// larger; a degraded non-equal pair is therefore always strict, so the weak
// value only appears through Equal. E <= G reports Incomparable here; swap
// the arguments to test the other direction.
Degradation check_degradation(const Eigen::VectorXd& e, const Eigen::VectorXd& g);

inline bool is_degraded_or_equal(const Eigen::VectorXd& e, const Eigen::VectorXd& g) {
  const Degradation d = check_degradation(e, g);
  return d == Degradation::Equal || d == Degradation::Degraded ||
         d == Degradation::StrictlyDegraded;
}

struct CoupledThresholdResult {
  double rate = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int gamma = 0;  // finite-size estimate: always labeled with its geometry
  int w = 0;
};

// Bisection on "the coupled fixed point reaches the underlying floor".
CoupledThresholdResult threshold_gamp_c(int gamma, int w, const DesignFunction& g,
                                        const std::string& design_name,
                                        const ChannelModel& channel, const QuadratureSpec& quad,
                                        const SectionPrior& prior, const SeOptions& options,
                                        double r_lo, double r_hi, double rate_tol);

}  // namespace ssc
