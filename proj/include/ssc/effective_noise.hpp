// Gaussian-smoothed channel kernel f(y|p,E), its Fisher information F(p|E),
// the effective noise variance Sigma(E)^2 and the GAMP output score g_out.
//
// Sigma(E)^{-2} = E_{p ~ N(0,1-E)}[F(p|E)] / R. For discrete channels with a
// threshold input map the p-average of the Fisher information diverges as
// E -> 0, so Sigma(0)^2 = 0 there; conversely a channel with zero Fisher
// information (e.g. a fully erasing one) yields Sigma^2 = +inf. Both extremes
// are returned as documented sentinels, never thrown.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "ssc/channel.hpp"
#include "ssc/quadrature.hpp"

namespace ssc {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureSpec {
  int gauss_hermite_order = 61;   // u- and z-integrals
  double y_abs_tol = 1e-10;       // adaptive tolerance for continuous-y integrals
  int p_expectation_order = 61;   // p-average in Sigma(E)^{-2} (generic path)

  void validate() const {
    if (gauss_hermite_order < 3 || p_expectation_order < 3)
      throw std::invalid_argument("QuadratureSpec: orders must be >= 3");
    if (!(y_abs_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: y_abs_tol must be > 0");
  }

  QuadratureSpec doubled() const {
    QuadratureSpec q = *this;
    q.gauss_hermite_order *= 2;
    q.p_expectation_order *= 2;
    q.y_abs_tol *= 0.5;
    return q;
  }
};

struct OutputScore {
  double value;  // d/dp ln f(y|p,v)
  double dp;     // second derivative of ln f, used by the GAMP variance update
};

class EffectiveNoiseContext {
 public:
  EffectiveNoiseContext(ChannelModel channel, double rate, QuadratureSpec quad = {});

  const ChannelModel& channel() const { return channel_; }
  double rate() const { return rate_; }
  const QuadratureSpec& quad() const { return quad_; }

  // f(y|p,E): the channel kernel smoothed by N(.|p,E); at E=0 this is the
  // kernel itself.
  double f_marginal(double y, double p, double E) const;

  // d/dp f(y|p,E).
  double f_marginal_dp(double y, double p, double E) const;

  // F(p|E) = sum/int over y of (d/dp f)^2 / f.
  double fisher_info(double p, double E) const;

  // E_{p ~ N(0,1-E)}[F(p|E)]; +inf for threshold-map channels at E=0. Cached.
  double avg_fisher(double E) const;

  // Sigma(E)^2 = R / avg_fisher(E); sentinels 0 and +inf at the extremes.
  double effective_noise_var(double E) const;
  double sigma(double E) const;

  // GAMP output score at noise level v > 0.
  OutputScore g_out(double y, double p, double v) const;

  // Relative change of Sigma(E)^{-2} when all quadrature orders are doubled.
  double quadrature_self_check(double E) const;

 private:
  struct CellEval {
    double f, df, d2f;
  };
  CellEval eval_cells(int y_index, double p, double E) const;
  double avg_fisher_uncached(double E) const;

  ChannelModel channel_;
  double rate_;
  QuadratureSpec quad_;

  mutable std::map<std::int64_t, double> avg_fisher_cache_;
  mutable std::mutex cache_mutex_;
};

}  // namespace ssc
