#include "ssc/potential.hpp"

#include <algorithm>
#include <cmath>

namespace ssc {

namespace {

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Gaussian masses of the input cells under N(0,1).
Eigen::VectorXd cell_masses(const InputCells& cells) {
  const int q = static_cast<int>(cells.inputs.size());
  Eigen::VectorXd mass(q);
  double prev = 0.0;
  for (int i = 0; i < q; ++i) {
    const double up = i < q - 1 ? normal_cdf(cells.thresholds[i]) : 1.0;
    mass[i] = up - prev;
    prev = up;
  }
  return mass;
}

double entropy_bits(const Eigen::VectorXd& pmf) {
  double h = 0.0;
  for (int i = 0; i < pmf.size(); ++i) h -= xlog2x(pmf[i]);
  return h;
}

struct GoldenResult {
  double x, fx;
};

template <typename F>
GoldenResult golden_min(F&& f, double a, double b, double tol) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? GoldenResult{c, fc} : GoldenResult{d, fd};
}

}  // namespace

double cond_entropy_bits(const EffectiveNoiseContext& ctx, double E, bool force_generic) {
  if (!(E >= 0.0 && E <= 1.0)) throw std::domain_error("cond_entropy_bits: E must be in [0,1]");
  const ChannelModel& ch = ctx.channel();
  if (ch.discrete()) {
    const Eigen::MatrixXd& w = ch.transition();
    const Eigen::VectorXd mass = cell_masses(ch.input_cells());
    if (E == 0.0) {
      double h = 0.0;
      for (int i = 0; i < mass.size(); ++i) h += mass[i] * entropy_bits(w.row(i).transpose());
      return h;
    }
    if (E == 1.0) return entropy_bits(w.transpose() * mass);
    const Eigen::VectorXd& ys = ch.output_symbols();
    const double scale = std::sqrt(1.0 - E);
    // The integrand steps on a z-scale of sqrt(E)/scale at the map thresholds;
    // integrate adaptively over segments around them.
    const Eigen::VectorXd& taus = ch.input_cells().thresholds;
    const double s = std::sqrt(E) / scale;
    const double reach = 8.0 + (taus.size() > 0 ? taus.array().abs().maxCoeff() : 0.0) / scale +
                         12.0 * s;
    std::vector<double> pts{-reach, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, reach};
    for (int i = 0; i < taus.size(); ++i) {
      const double center = taus[i] / scale;
      for (double off : {-10.0 * s, -2.0 * s, 0.0, 2.0 * s, 10.0 * s}) pts.push_back(center + off);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    pts.erase(std::remove_if(pts.begin(), pts.end(),
                             [&](double x) { return x < -reach || x > reach; }),
              pts.end());
    auto integrand = [&](double z) {
      double h = 0.0;
      for (int k = 0; k < ys.size(); ++k) h -= xlog2x(ctx.f_marginal(ys[k], z * scale, E));
      return normal_pdf(z) * h;
    };
    return integrate_segments(integrand, pts, 1e-12);
  }
  if (ch.kind() == ChannelKind::Awgn && !force_generic) {
    const double var = E + ch.awgn_noise_var();
    return 0.5 * std::log2(2.0 * kPi * std::exp(1.0) * var);
  }
  // Nested quadrature: Gauss-Hermite in z and u, adaptive in y.
  const double scale = std::sqrt(1.0 - E);
  const bool is_awgn = ch.kind() == ChannelKind::Awgn;
  auto smoothed = [&](double y, double p) {
    if (E == 0.0) return ch.continuous_kernel(y, p);
    return gauss_expect(p, E, ctx.quad().gauss_hermite_order,
                        [&](double u) { return ch.continuous_kernel(y, u); });
  };
  return gauss_expect(0.0, 1.0, ctx.quad().gauss_hermite_order, [&](double z) {
    const double p = z * scale;
    double y_lo, y_hi;
    if (is_awgn) {
      const double spread = 8.0 * std::sqrt(E + ch.awgn_noise_var()) + 1.0;
      y_lo = p - spread;
      y_hi = p + spread;
    } else {
      std::tie(y_lo, y_hi) = ch.y_interval_hint();
    }
    return -adaptive_simpson([&](double y) { return xlog2x(smoothed(y, p)); }, y_lo, y_hi,
                             ctx.quad().y_abs_tol);
  });
}

double u_pot(const EffectiveNoiseContext& ctx, double E) {
  if (!(E >= 0.0 && E <= 1.0)) throw std::domain_error("u_pot: E must be in [0,1]");
  double term1 = 0.0;
  if (E > 0.0) {
    const double m = ctx.avg_fisher(E);  // Sigma^{-2} = m / R
    term1 = -E * m / (ctx.rate() * 2.0 * kLn2);
  }
  return term1 + cond_entropy_bits(ctx, E) / ctx.rate();
}

McEstimate s_pot_estimate(const SeWorkspace& ws, double sigma) {
  const SectionPrior& prior = ws.prior();
  const int B = prior.section_size();
  const double ln_b = std::log(double(B));
  if (sigma == 0.0) {
    // theta concentrates on x = s: log_B(p(s) e^{-||z||^2/2}), averaged.
    double mean_logp = -ln_b;
    if (prior.kind() == SectionPrior::Kind::Atoms) {
      mean_logp = 0.0;
      for (int k = 0; k < prior.weights().size(); ++k)
        mean_logp += prior.weights()[k] * std::log(prior.weights()[k]);
    }
    return {(mean_logp - 0.5 * B) / ln_b, 0.0};
  }
  if (std::isinf(sigma)) return {-0.5 * B / ln_b, 0.0};

  const double sb = sigma / std::sqrt(std::log2(double(B)));
  const int n = ws.bank_size();
  if (ws.quadrature()) {
    // In difference variables the ||z||^2 part integrates exactly to B/2:
    // S_u = E[lse(0, (sb d - 1)/sb^2)]/ln B - 1 - B/(2 ln B).
    Eigen::ArrayXXd logw = (sb * ws.diff_bank() - 1.0) / (sb * sb);
    Eigen::ArrayXd rowmax = logw.rowwise().maxCoeff().max(0.0);
    Eigen::ArrayXd lse =
        rowmax + ((-rowmax).exp() + (logw.colwise() - rowmax).exp().rowwise().sum()).log();
    const double mean = (lse * ws.bank_weights()).sum();
    return {mean / ln_b - 1.0 - 0.5 * B / ln_b, 0.0};
  }
  Eigen::ArrayXd vals(n);
  const int chunk = 1 << 16;
  for (int start = 0; start < n; start += chunk) {
    const int count = std::min(chunk, n - start);
    const Eigen::ArrayXXd z = ws.z_samples(start, count);
    if (prior.kind() == SectionPrior::Kind::OneHot) {
      // s = e1 by symmetry; with y = e1 + sb z the integrand reduces to
      // lse_k(y_k/sb^2) - (1 + ||y||^2)/(2 sb^2) - ln B, in nats.
      Eigen::ArrayXXd y = sb * z;
      y.col(0) += 1.0;
      Eigen::ArrayXXd logw = y / (sb * sb);
      Eigen::ArrayXd rowmax = logw.rowwise().maxCoeff();
      logw.colwise() -= rowmax;
      Eigen::ArrayXd lse = rowmax + logw.exp().rowwise().sum().log();
      Eigen::ArrayXd ynorm2 = y.square().rowwise().sum();
      vals.segment(start, count) =
          (lse - (1.0 + ynorm2) / (2.0 * sb * sb) - ln_b) / ln_b;
    } else {
      const Eigen::MatrixXd& atoms = prior.support();
      const int K = static_cast<int>(atoms.rows());
      Eigen::ArrayXd logw(K);
      for (int r = 0; r < count; ++r) {
        const int truth = ws.atom_choice(start + r);
        const Eigen::VectorXd y =
            atoms.row(truth).transpose() + sb * z.row(r).matrix().transpose();
        for (int k = 0; k < K; ++k)
          logw[k] = std::log(prior.weights()[k]) -
                    (atoms.row(k).transpose() - y).squaredNorm() / (2.0 * sb * sb);
        const double mx = logw.maxCoeff();
        vals[start + r] = (mx + std::log((logw - mx).exp().sum())) / ln_b;
      }
    }
  }
  const double mean = (vals * ws.bank_weights()).sum();
  if (ws.options().evaluator == SeEvaluator::TensorQuadrature) return {mean, 0.0};
  const double var = (vals - mean).square().sum() / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

double s_pot(const SeWorkspace& ws, double sigma) { return s_pot_estimate(ws, sigma).value; }

double potential_u(const EffectiveNoiseContext& ctx, const SeWorkspace& ws, double E) {
  return u_pot(ctx, E) - s_pot(ws, ctx.sigma(E));
}

double potential_large_b(const EffectiveNoiseContext& ctx, double E) {
  const double var = ctx.effective_noise_var(E);
  double second;
  if (var == 0.0) second = 0.0;
  else if (std::isinf(var)) second = 1.0;
  else second = std::max(0.0, 1.0 - 1.0 / (2.0 * kLn2 * var));
  return u_pot(ctx, E) - second;
}

double potential_large_b_shifted(const EffectiveNoiseContext& ctx, double E) {
  return potential_large_b(ctx, E) - potential_large_b(ctx, 0.0);
}

PotentialCurve potential_curve(const EffectiveNoiseContext& ctx, const SeWorkspace& ws,
                               const Eigen::VectorXd& e_grid) {
  PotentialCurve curve;
  curve.e_grid = e_grid;
  curve.values.resize(e_grid.size());
  for (int i = 0; i < e_grid.size(); ++i) curve.values[i] = potential_u(ctx, ws, e_grid[i]);
  curve.rate = ctx.rate();
  curve.channel = ctx.channel().config_string();
  return curve;
}

PotentialCurve large_b_curve(const EffectiveNoiseContext& ctx, const Eigen::VectorXd& e_grid,
                             bool shifted) {
  PotentialCurve curve;
  curve.e_grid = e_grid;
  curve.values.resize(e_grid.size());
  const double shift = shifted ? potential_large_b(ctx, 0.0) : 0.0;
  for (int i = 0; i < e_grid.size(); ++i)
    curve.values[i] = potential_large_b(ctx, e_grid[i]) - shift;
  curve.rate = ctx.rate();
  curve.channel = ctx.channel().config_string();
  return curve;
}

GapResult free_energy_gap(const EffectiveNoiseContext& ctx, const SeWorkspace& ws,
                          const GapOptions& opt) {
  GapResult res;
  if (in_basin(ctx, ws, 1.0)) {
    if (floor_is_good_phase(ws.prior(), mse_floor(ctx, ws))) {
      res.infinite = true;  // R < R_u: the infimum runs over an empty set
      res.gap = kInf;
    } else {
      res.gap = -kInf;  // no good phase at all: decoding-impossible regime
      res.arg_e = 1.0;
    }
    return res;
  }
  const double floor = mse_floor(ctx, ws);
  const double boundary = basin_boundary(ctx, ws);
  const double f_floor = potential_u(ctx, ws, floor);
  const int n = std::max(3, opt.grid_points);
  double best_e = 1.0;
  double best_f = kInf;
  for (int i = 0; i < n; ++i) {
    const double e = static_cast<double>(i) / (n - 1);
    if (e <= boundary) continue;
    const double f = potential_u(ctx, ws, e);
    if (f < best_f) {
      best_f = f;
      best_e = e;
    }
  }
  const double spacing = 1.0 / (n - 1);
  const double lo = std::max(boundary, best_e - spacing);
  const double hi = std::min(1.0, best_e + spacing);
  const GoldenResult refined = golden_min(
      [&](double e) { return potential_u(ctx, ws, e); }, lo, hi, opt.refine_tol);
  if (refined.fx < best_f) {
    best_f = refined.fx;
    best_e = refined.x;
  }
  res.gap = best_f - f_floor;
  res.arg_e = best_e;
  return res;
}

ThresholdResult threshold_potential(const ChannelModel& channel, const QuadratureSpec& quad,
                                    const SectionPrior& prior, const SeOptions& options,
                                    double r_lo, double r_hi, double rate_tol,
                                    const GapOptions& gap_opt) {
  if (!(r_lo > 0.0 && r_hi > r_lo))
    throw std::invalid_argument("threshold_potential: bad bracket");
  SeWorkspace ws(prior, options);
  auto positive_gap = [&](double rate) {
    EffectiveNoiseContext ctx(channel, rate, quad);
    const GapResult g = free_energy_gap(ctx, ws, gap_opt);
    return g.infinite || g.gap > 0.0;
  };
  for (int grow = 0; grow < 30 && !positive_gap(r_lo); ++grow) {
    r_hi = r_lo;
    r_lo *= 0.5;
    if (r_lo < 1e-6) throw NumericalError("threshold_potential: no positive-gap rate found");
  }
  for (int grow = 0; grow < 30 && positive_gap(r_hi); ++grow) {
    r_lo = r_hi;
    r_hi *= 2.0;
    if (r_hi > 64.0) throw NumericalError("threshold_potential: gap positive up to rate 64");
  }
  while (r_hi - r_lo > rate_tol) {
    const double mid = 0.5 * (r_lo + r_hi);
    (positive_gap(mid) ? r_lo : r_hi) = mid;
  }
  return {0.5 * (r_lo + r_hi), r_lo, r_hi, 0};
}

double r_u_infinity(const EffectiveNoiseContext& ctx) {
  return ctx.avg_fisher(1.0) / (2.0 * kLn2);
}

double r_pot_infinity(const EffectiveNoiseContext& ctx) {
  return cond_entropy_bits(ctx, 1.0, true) - cond_entropy_bits(ctx, 0.0, true);
}

}  // namespace ssc
