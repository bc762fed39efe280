#include "ssc/effective_noise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ssc {

namespace {

constexpr double kTinyDensity = 1e-300;
constexpr double kEClamp = 1e-12;

// Transition rows all equal means the output carries no information at all.
bool rows_all_equal(const Eigen::MatrixXd& w) {
  for (int i = 1; i < w.rows(); ++i)
    if (((w.row(i) - w.row(0)).array().abs() > 0.0).any()) return false;
  return true;
}

}  // namespace

EffectiveNoiseContext::EffectiveNoiseContext(ChannelModel channel, double rate,
                                             QuadratureSpec quad)
    : channel_(std::move(channel)), rate_(rate), quad_(quad) {
  if (!(rate_ > 0.0)) throw std::invalid_argument("EffectiveNoiseContext: rate must be > 0");
  quad_.validate();
}

EffectiveNoiseContext::CellEval EffectiveNoiseContext::eval_cells(int y_index, double p,
                                                                  double E) const {
  const InputCells& cells = channel_.input_cells();
  const Eigen::MatrixXd& w = channel_.transition();
  const int q = static_cast<int>(cells.inputs.size());
  const double s = std::sqrt(E);
  CellEval out{0.0, 0.0, 0.0};
  for (int i = 0; i < q; ++i) {
    const bool has_lo = i > 0;
    const bool has_hi = i < q - 1;
    const double lo = has_lo ? (cells.thresholds[i - 1] - p) / s : 0.0;
    const double hi = has_hi ? (cells.thresholds[i] - p) / s : 0.0;
    // Tail-safe mass: difference of Q on the positive side, of Phi on the
    // negative one, so deep-tail cells keep their true magnitude instead of
    // cancelling against 1.
    double mass;
    if (!has_lo && !has_hi) mass = 1.0;
    else if (!has_lo) mass = normal_cdf(hi);
    else if (!has_hi) mass = q_function(lo);
    else if (lo >= 0.0) mass = q_function(lo) - q_function(hi);
    else mass = normal_cdf(hi) - normal_cdf(lo);
    mass = std::max(mass, 0.0);
    const double pdf_lo = has_lo ? normal_pdf(lo) : 0.0;
    const double pdf_hi = has_hi ? normal_pdf(hi) : 0.0;
    const double d1 = (pdf_lo - pdf_hi) / s;
    const double d2 = ((has_lo ? lo * pdf_lo : 0.0) - (has_hi ? hi * pdf_hi : 0.0)) / E;
    const double wy = w(i, y_index);
    out.f += wy * mass;
    out.df += wy * d1;
    out.d2f += wy * d2;
  }
  return out;
}

double EffectiveNoiseContext::f_marginal(double y, double p, double E) const {
  if (E < 0.0) throw std::domain_error("f_marginal: E must be >= 0");
  if (E == 0.0) return channel_.kernel_eval(y, p);
  if (channel_.discrete()) return eval_cells(channel_.output_index(y), p, E).f;
  if (channel_.kind() == ChannelKind::Awgn)
    return normal_pdf(y, p, E + channel_.awgn_noise_var());
  return gauss_expect(p, E, quad_.gauss_hermite_order,
                      [&](double u) { return channel_.continuous_kernel(y, u); });
}

double EffectiveNoiseContext::f_marginal_dp(double y, double p, double E) const {
  if (E < 0.0) throw std::domain_error("f_marginal_dp: E must be >= 0");
  const double Ec = std::max(E, kEClamp);
  if (channel_.discrete()) return eval_cells(channel_.output_index(y), p, Ec).df;
  if (channel_.kind() == ChannelKind::Awgn) {
    const double var = Ec + channel_.awgn_noise_var();
    return normal_pdf(y, p, var) * (y - p) / var;
  }
  // d/dp N(u|p,E) = N(u|p,E) (u-p)/E under the integral.
  return gauss_expect(p, Ec, quad_.gauss_hermite_order, [&](double u) {
    return channel_.continuous_kernel(y, u) * (u - p) / Ec;
  });
}

double EffectiveNoiseContext::fisher_info(double p, double E) const {
  if (!(E >= 0.0 && E <= 1.0)) throw std::domain_error("fisher_info: E must be in [0,1]");
  if (channel_.kind() == ChannelKind::Awgn)
    return 1.0 / (E + channel_.awgn_noise_var());
  if (channel_.discrete()) {
    const double Ec = std::max(E, kEClamp);
    const Eigen::VectorXd& ys = channel_.output_symbols();
    double acc = 0.0;
    for (int k = 0; k < ys.size(); ++k) {
      const CellEval e = eval_cells(k, p, Ec);
      if (e.f < kTinyDensity) {
        // Cell kernels obey the Mills bound df <= f (|t|+1)/sqrt(E), so the
        // contribution f (df/f)^2 is negligible once f underflows; anything
        // larger indicates a structurally broken kernel.
        if (std::abs(e.df) > 1e-100)
          throw NumericalError("fisher_info: vanishing f with nonzero derivative at y index " +
                               std::to_string(k));
        continue;
      }
      acc += e.df * e.df / e.f;
    }
    return acc;
  }
  const double Ec = std::max(E, kEClamp);
  const auto [y_lo, y_hi] = channel_.y_interval_hint();
  return adaptive_simpson(
      [&](double y) {
        const double f = f_marginal(y, p, Ec);
        if (f < kTinyDensity) return 0.0;
        const double df = f_marginal_dp(y, p, Ec);
        return df * df / f;
      },
      y_lo, y_hi, quad_.y_abs_tol);
}

double EffectiveNoiseContext::avg_fisher_uncached(double E) const {
  if (E == 1.0) return fisher_info(0.0, 1.0);
  if (E == 0.0) {
    if (channel_.kind() == ChannelKind::Awgn) return 1.0 / channel_.awgn_noise_var();
    if (channel_.discrete())
      return rows_all_equal(channel_.transition()) ? 0.0 : kInf;
    return avg_fisher_uncached(kEClamp);
  }
  const double pe_var = std::max(1.0 - E, kEClamp);
  if (channel_.kind() == ChannelKind::Awgn) return 1.0 / (E + channel_.awgn_noise_var());
  if (!channel_.discrete()) {
    return gauss_expect(0.0, pe_var, quad_.p_expectation_order,
                        [&](double p) { return fisher_info(p, E); });
  }
  if (rows_all_equal(channel_.transition())) return 0.0;
  // The Fisher information has spikes of width sqrt(E) at the map thresholds;
  // integrate over explicit segments around them.
  const double sp = std::sqrt(pe_var);
  const double s = std::sqrt(E);
  const Eigen::VectorXd& taus = channel_.input_cells().thresholds;
  const double max_tau = taus.size() > 0 ? taus.array().abs().maxCoeff() : 0.0;
  const double reach = 8.0 * sp + max_tau + 12.0 * s + 1.0;
  std::vector<double> pts{-reach, -4.0 * sp, -2.0 * sp, -sp, 0.0, sp, 2.0 * sp, 4.0 * sp, reach};
  for (int i = 0; i < taus.size(); ++i) {
    for (double off : {-10.0 * s, -2.0 * s, 0.0, 2.0 * s, 10.0 * s}) pts.push_back(taus[i] + off);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.erase(std::remove_if(pts.begin(), pts.end(),
                           [&](double x) { return x < -reach || x > reach; }),
            pts.end());
  auto integrand = [&](double p) { return normal_pdf(p, 0.0, pe_var) * fisher_info(p, E); };
  double peak = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    peak = std::max(peak, std::abs(integrand(0.5 * (pts[i] + pts[i + 1]))));
  const double tol = std::max(1e-300, peak * 2.0 * reach * 1e-13);
  return integrate_segments(integrand, pts, tol);
}

double EffectiveNoiseContext::avg_fisher(double E) const {
  const std::int64_t key = std::llround(E * 1e12);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = avg_fisher_cache_.find(key);
    if (it != avg_fisher_cache_.end()) return it->second;
  }
  const double value = avg_fisher_uncached(E);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  avg_fisher_cache_.emplace(key, value);
  return value;
}

double EffectiveNoiseContext::effective_noise_var(double E) const {
  const double m = avg_fisher(E);
  if (std::isinf(m)) return 0.0;
  if (m == 0.0) return kInf;
  return rate_ / m;
}

double EffectiveNoiseContext::sigma(double E) const { return std::sqrt(effective_noise_var(E)); }

OutputScore EffectiveNoiseContext::g_out(double y, double p, double v) const {
  if (!(v > 0.0)) throw std::domain_error("g_out: v must be > 0");
  if (channel_.kind() == ChannelKind::Awgn) {
    const double var = v + channel_.awgn_noise_var();
    return {(y - p) / var, -1.0 / var};
  }
  if (channel_.discrete()) {
    const int k = channel_.output_index(y);
    const CellEval e = eval_cells(k, p, v);
    if (e.f >= 1e-280) {
      const double g = e.df / e.f;
      return {g, e.d2f / e.f - g * g};
    }
    // Tail regime: one-threshold channels where the observed symbol has zero
    // probability in one cell admit a Mills-ratio form.
    const InputCells& cells = channel_.input_cells();
    if (cells.inputs.size() == 2) {
      const double s = std::sqrt(v);
      const double t = (p - cells.thresholds[0]) / s;
      const double w_lo = channel_.transition()(0, k);
      const double w_hi = channel_.transition()(1, k);
      if (w_lo == 0.0 && w_hi > 0.0) {
        const double m = pdf_over_q(-t);  // f = w_hi * Phi(t), t << 0
        return {m / s, (-t * m - m * m) / v};
      }
      if (w_hi == 0.0 && w_lo > 0.0) {
        const double m = pdf_over_q(t);  // f = w_lo * Q(t), t >> 0
        return {-m / s, (t * m - m * m) / v};
      }
    }
    throw NumericalError("g_out: vanishing f(y|p,v) at y=" + std::to_string(y) +
                         ", p=" + std::to_string(p) + ", v=" + std::to_string(v));
  }
  const double f = f_marginal(y, p, v);
  if (f < kTinyDensity)
    throw NumericalError("g_out: vanishing smoothed kernel at y=" + std::to_string(y));
  const double df = f_marginal_dp(y, p, v);
  const double d2f = gauss_expect(p, v, quad_.gauss_hermite_order, [&](double u) {
    const double d = u - p;
    return channel_.continuous_kernel(y, u) * (d * d - v) / (v * v);
  });
  const double g = df / f;
  return {g, d2f / f - g * g};
}

double EffectiveNoiseContext::quadrature_self_check(double E) const {
  const double a = avg_fisher(E);
  EffectiveNoiseContext finer(channel_, rate_, quad_.doubled());
  const double b = finer.avg_fisher(E);
  if (std::isinf(a) || std::isinf(b)) return (std::isinf(a) && std::isinf(b)) ? 0.0 : kInf;
  const double inv_a = a / rate_, inv_b = b / rate_;
  return std::abs(inv_a - inv_b) / std::max(1.0, std::abs(inv_a));
}

}  // namespace ssc
