#include "ssc/coupled.hpp"

#include <algorithm>
#include <cmath>

namespace ssc {

namespace {

void check_profile(const CouplingSpec& spec, const Eigen::VectorXd& profile) {
  if (profile.size() != spec.gamma)
    throw std::invalid_argument("profile: length must equal Gamma");
  for (int r = 0; r < spec.gamma; ++r) {
    if (!(profile[r] >= 0.0 && profile[r] <= 1.0))
      throw std::invalid_argument("profile: entries must be in [0,1]");
    if (spec.pinned(r) && profile[r] != 0.0)
      throw std::invalid_argument("profile: pinned entries must be exactly 0");
  }
}

double sigma_from_inv_var(double inv_var) {
  if (std::isinf(inv_var)) return 0.0;
  if (inv_var == 0.0) return kInf;
  return 1.0 / std::sqrt(inv_var);
}

}  // namespace

DesignFunction rectangular_design() {
  return [](double x) { return std::abs(x) <= 1.0 ? 1.0 : 0.0; };
}

DesignFunction tapered_design() {
  return [](double x) { return std::abs(x) <= 1.0 ? 1.0 - 0.8 * std::abs(x) : 0.0; };
}

CouplingSpec build_coupling(int gamma, int w, const DesignFunction& g, double rate,
                            const std::string& design_name, bool periodic) {
  if (w < 1) throw std::invalid_argument("build_coupling: w must be >= 1");
  if (!periodic && gamma <= 8 * w)
    throw std::invalid_argument("build_coupling: Gamma must exceed 8w");
  if (periodic && gamma < 2 * w + 1)
    throw std::invalid_argument("build_coupling: periodic Gamma must cover the window");
  if (!(rate > 0.0)) throw std::invalid_argument("build_coupling: rate must be > 0");
  if (!(g(0.0) > 0.0)) throw std::invalid_argument("build_coupling: design must be positive at 0");

  CouplingSpec spec;
  spec.gamma = gamma;
  spec.w = w;
  spec.rate = rate;
  spec.rate_eff = periodic ? rate : rate * (1.0 - 8.0 * w / static_cast<double>(gamma));
  spec.periodic = periodic;
  spec.design_name = design_name;
  spec.variances = Eigen::MatrixXd::Zero(gamma, gamma);
  spec.row_scale.resize(gamma);
  for (int r = 0; r < gamma; ++r) {
    double gsum = 0.0;
    for (int c = 0; c < gamma; ++c) {
      int d = r - c;
      if (periodic) {
        d = ((d % gamma) + gamma) % gamma;
        if (d > gamma / 2) d -= gamma;
      }
      gsum += g(static_cast<double>(d) / w);
    }
    if (!(gsum > 0.0)) throw std::invalid_argument("build_coupling: empty design row");
    const double scale = (2.0 * w + 1.0) / gsum;
    spec.row_scale[r] = scale;
    for (int c = 0; c < gamma; ++c) {
      int d = r - c;
      if (periodic) {
        d = ((d % gamma) + gamma) % gamma;
        if (d > gamma / 2) d -= gamma;
      }
      const double gx = g(static_cast<double>(d) / w);
      if (gx != 0.0) spec.variances(r, c) = scale * gamma * gx / (2.0 * w + 1.0);
    }
  }
  return spec;
}

Eigen::VectorXd initial_profile(const CouplingSpec& spec) {
  Eigen::VectorXd e = Eigen::VectorXd::Ones(spec.gamma);
  for (int r = 0; r < spec.gamma; ++r)
    if (spec.pinned(r)) e[r] = 0.0;
  return e;
}

Eigen::VectorXd flat_profile(const CouplingSpec& spec, double E) {
  Eigen::VectorXd e = Eigen::VectorXd::Constant(spec.gamma, E);
  for (int r = 0; r < spec.gamma; ++r)
    if (spec.pinned(r)) e[r] = 0.0;
  return e;
}

static Eigen::VectorXd block_noise_inv_var(const CouplingSpec& spec,
                                           const EffectiveNoiseContext& ctx,
                                           const Eigen::VectorXd& profile) {
  const int n = spec.gamma;
  Eigen::VectorXd fisher(n);
  for (int r = 0; r < n; ++r) fisher[r] = ctx.avg_fisher(profile[r]);
  Eigen::VectorXd inv_var = Eigen::VectorXd::Zero(n);
  const double denom = ctx.rate() * n;
  for (int c = 0; c < n; ++c) {
    double acc = 0.0;
    for (int r = 0; r < n; ++r) {
      const double j = spec.variances(r, c);
      if (j == 0.0) continue;
      if (std::isinf(fisher[r])) {
        acc = kInf;
        break;
      }
      acc += j * fisher[r];
    }
    inv_var[c] = std::isinf(acc) ? kInf : acc / denom;
  }
  return inv_var;
}

Eigen::VectorXd effective_noise_per_block(const CouplingSpec& spec,
                                          const EffectiveNoiseContext& ctx,
                                          const Eigen::VectorXd& profile) {
  check_profile(spec, profile);
  Eigen::VectorXd inv = block_noise_inv_var(spec, ctx, profile);
  Eigen::VectorXd var(inv.size());
  for (int c = 0; c < inv.size(); ++c) {
    if (std::isinf(inv[c])) var[c] = 0.0;
    else if (inv[c] == 0.0) var[c] = kInf;
    else var[c] = 1.0 / inv[c];
  }
  return var;
}

Eigen::VectorXd se_operator_c(const CouplingSpec& spec, const EffectiveNoiseContext& ctx,
                              const SeWorkspace& ws, const Eigen::VectorXd& profile) {
  check_profile(spec, profile);
  const int n = spec.gamma;
  const Eigen::VectorXd inv = block_noise_inv_var(spec, ctx, profile);
  Eigen::VectorXd mse(n);
  for (int c = 0; c < n; ++c) mse[c] = ws.mse(sigma_from_inv_var(inv[c])).value;
  Eigen::VectorXd out(n);
  for (int r = 0; r < n; ++r) {
    if (spec.pinned(r)) {
      out[r] = 0.0;
      continue;
    }
    double acc = 0.0;
    for (int c = 0; c < n; ++c) {
      const double j = spec.variances(r, c);
      if (j != 0.0) acc += j * mse[c];
    }
    out[r] = std::min(1.0, std::max(0.0, acc / n));
  }
  return out;
}

CoupledResult coupled_fixed_point(const CouplingSpec& spec, const EffectiveNoiseContext& ctx,
                                  const SeWorkspace& ws, std::optional<double> stop_below_max,
                                  bool record_trajectory) {
  const SeOptions& opt = ws.options();
  CoupledResult res;
  Eigen::VectorXd e = initial_profile(spec);
  std::vector<Eigen::VectorXd> traj;
  if (record_trajectory) traj.push_back(e);
  for (int t = 0; t < opt.max_iter; ++t) {
    Eigen::VectorXd next = se_operator_c(spec, ctx, ws, e);
    const double delta = (next - e).cwiseAbs().maxCoeff();
    e = std::move(next);
    res.iterations = t + 1;
    if (record_trajectory) traj.push_back(e);
    if (stop_below_max && e.maxCoeff() <= *stop_below_max) {
      res.decoded = true;
      res.converged = true;
      break;
    }
    if (delta < opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.profile = e;
  if (record_trajectory) {
    res.trajectory.resize(static_cast<int>(traj.size()), spec.gamma);
    for (std::size_t i = 0; i < traj.size(); ++i) res.trajectory.row(static_cast<int>(i)) = traj[i];
  }
  return res;
}

Eigen::VectorXd saturate_profile(const Eigen::VectorXd& profile, double e_floor, int pin_width) {
  const int n = static_cast<int>(profile.size());
  if (n == 0) throw std::invalid_argument("saturate_profile: empty profile");
  for (int r = 0; r < n; ++r) {
    if (r < pin_width || r >= n - pin_width) {
      if (profile[r] != 0.0)
        throw std::invalid_argument("saturate_profile: profile not null on pins");
    }
  }
  int r_max = 0;
  for (int r = 1; r < n; ++r)
    if (profile[r] > profile[r_max]) r_max = r;
  for (int r = 1; r <= r_max; ++r)
    if (profile[r] < profile[r - 1] - 1e-15)
      throw std::invalid_argument("saturate_profile: profile not unimodal (left flank)");
  for (int r = r_max + 1; r < n; ++r)
    if (profile[r] > profile[r - 1] + 1e-15)
      throw std::invalid_argument("saturate_profile: profile not unimodal (right flank)");

  Eigen::VectorXd out(n);
  const double e_max = profile[r_max];
  if (e_max <= e_floor) return Eigen::VectorXd::Constant(n, e_floor);
  int cross = 0;  // first index on the rising flank with E above the floor
  while (cross <= r_max && profile[cross] <= e_floor) ++cross;
  for (int r = 0; r < n; ++r) {
    if (r < cross) out[r] = e_floor;
    else if (r <= r_max) out[r] = profile[r];
    else out[r] = e_max;
  }
  return out;
}

Eigen::VectorXd shift_profile(const Eigen::VectorXd& profile, double e_floor) {
  Eigen::VectorXd out(profile.size());
  out[0] = e_floor;
  out.tail(profile.size() - 1) = profile.head(profile.size() - 1);
  return out;
}

double potential_c(const CouplingSpec& spec, const EffectiveNoiseContext& ctx,
                   const SeWorkspace& ws, const Eigen::VectorXd& profile) {
  if (profile.size() != spec.gamma)
    throw std::invalid_argument("potential_c: length must equal Gamma");
  for (int r = 0; r < spec.gamma; ++r)
    if (!(profile[r] >= 0.0 && profile[r] <= 1.0))
      throw std::invalid_argument("potential_c: entries must be in [0,1]");
  double u_sum = 0.0;
  for (int r = 0; r < spec.gamma; ++r) u_sum += u_pot(ctx, profile[r]);
  const Eigen::VectorXd inv = block_noise_inv_var(spec, ctx, profile);
  double s_sum = 0.0;
  for (int c = 0; c < spec.gamma; ++c) s_sum += s_pot(ws, sigma_from_inv_var(inv[c]));
  return u_sum - s_sum;
}

Degradation check_degradation(const Eigen::VectorXd& e, const Eigen::VectorXd& g) {
  if (e.size() != g.size()) throw std::invalid_argument("check_degradation: length mismatch");
  bool some_greater = false, some_less = false;
  for (int r = 0; r < e.size(); ++r) {
    if (e[r] > g[r]) some_greater = true;
    if (e[r] < g[r]) some_less = true;
  }
  if (some_greater && some_less) return Degradation::Incomparable;
  if (some_greater) return Degradation::StrictlyDegraded;
  if (some_less) return Degradation::Incomparable;  // e <= g with a strict dip
  return Degradation::Equal;
}

CoupledThresholdResult threshold_gamp_c(int gamma, int w, const DesignFunction& g,
                                        const std::string& design_name,
                                        const ChannelModel& channel, const QuadratureSpec& quad,
                                        const SectionPrior& prior, const SeOptions& options,
                                        double r_lo, double r_hi, double rate_tol) {
  if (!(r_lo > 0.0 && r_hi > r_lo)) throw std::invalid_argument("threshold_gamp_c: bad bracket");
  SeWorkspace ws(prior, options);
  auto decodes = [&](double rate) {
    const CouplingSpec spec = build_coupling(gamma, w, g, rate, design_name);
    EffectiveNoiseContext ctx(channel, rate, quad);
    const double floor = mse_floor(ctx, ws);
    if (!floor_is_good_phase(prior, floor)) return false;
    const CoupledResult run =
        coupled_fixed_point(spec, ctx, ws, floor + 10.0 * options.tol);
    return run.profile.maxCoeff() <= floor + 10.0 * options.tol;
  };
  for (int grow = 0; grow < 30 && !decodes(r_lo); ++grow) {
    r_hi = r_lo;
    r_lo *= 0.5;
    if (r_lo < 1e-6) throw NumericalError("threshold_gamp_c: no decodable rate found");
  }
  for (int grow = 0; grow < 30 && decodes(r_hi); ++grow) {
    r_lo = r_hi;
    r_hi *= 2.0;
    if (r_hi > 64.0) throw NumericalError("threshold_gamp_c: decodes up to rate 64");
  }
  while (r_hi - r_lo > rate_tol) {
    const double mid = 0.5 * (r_lo + r_hi);
    (decodes(mid) ? r_lo : r_hi) = mid;
  }
  return {0.5 * (r_lo + r_hi), r_lo, r_hi, gamma, w};
}

}  // namespace ssc
