// Potential functions whose stationary points are the SE fixed points:
// F_u(E) = U_u(E) - S_u(Sigma(E)), the free energy gap, the potential
// threshold R_pot, the large-alphabet potential and the large-alphabet
// thresholds (Fisher form of R_u, capacity form of R_pot).
//
// All entropies and potentials are in bits; the natural-log factor 2 ln 2
// appears explicitly where the formulas require it.
#pragma once

#include <string>

#include "ssc/state_evolution.hpp"

namespace ssc {

// H(Y|Z) in bits of the concatenated channel z -> N(.|z sqrt(1-E), E) -> P_out,
// with standard Gaussian input. Equals -E_z[ int dy phi log2 phi ].
// force_generic routes continuous channels through nested quadrature even
// when a closed form exists.
double cond_entropy_bits(const EffectiveNoiseContext& ctx, double E,
                         bool force_generic = false);

// U_u(E) = -E / (2 ln2 Sigma(E)^2) - (1/R) E_z[ int dy phi log2 phi ].
double u_pot(const EffectiveNoiseContext& ctx, double E);

// S_u(Sigma) = E_{s,z}[ log_B int dx p0(x) theta(x,s,z,Sigma) ], Monte Carlo
// over the workspace bank; exact limits at Sigma = 0 and Sigma = inf.
double s_pot(const SeWorkspace& ws, double sigma);
McEstimate s_pot_estimate(const SeWorkspace& ws, double sigma);

// F_u(E) = U_u(E) - S_u(Sigma(E)).
double potential_u(const EffectiveNoiseContext& ctx, const SeWorkspace& ws, double E);

// Large-alphabet potential phi_u(E) = U_u(E) - max(0, 1 - 1/(2 ln2 Sigma(E)^2)).
double potential_large_b(const EffectiveNoiseContext& ctx, double E);
// Same, shifted so that the value at E = 0 is zero.
double potential_large_b_shifted(const EffectiveNoiseContext& ctx, double E);

struct PotentialCurve {
  Eigen::VectorXd e_grid;
  Eigen::VectorXd values;
  double rate = 0.0;
  std::string channel;
};

PotentialCurve potential_curve(const EffectiveNoiseContext& ctx, const SeWorkspace& ws,
                               const Eigen::VectorXd& e_grid);
PotentialCurve large_b_curve(const EffectiveNoiseContext& ctx, const Eigen::VectorXd& e_grid,
                             bool shifted = true);

struct GapOptions {
  int grid_points = 201;
  double refine_tol = 1e-7;
};

struct GapResult {
  double gap = 0.0;      // +inf encoded by infinite = true
  bool infinite = false; // basin of the floor is all of [0,1], i.e. R < R_u
  double arg_e = 0.0;    // minimizer outside the basin (when finite)
};

// Delta F_u = inf_{E outside the floor's basin} F_u(E) - F_u(E_0); grid scan
// plus golden-section refinement near the grid minimum.
GapResult free_energy_gap(const EffectiveNoiseContext& ctx, const SeWorkspace& ws,
                          const GapOptions& opt = {});

// Bisection for R_pot = sup{ R : Delta F_u > 0 }.
ThresholdResult threshold_potential(const ChannelModel& channel, const QuadratureSpec& quad,
                                    const SectionPrior& prior, const SeOptions& options,
                                    double r_lo, double r_hi, double rate_tol,
                                    const GapOptions& gap_opt = {});

// Large-alphabet GAMP threshold F(0|1) / (2 ln 2).
double r_u_infinity(const EffectiveNoiseContext& ctx);

// Large-alphabet potential threshold H(Y) - H(Y|Z) with standard Gaussian Z;
// equals the Shannon capacity when the input map is capacity-achieving.
double r_pot_infinity(const EffectiveNoiseContext& ctx);

}  // namespace ssc
