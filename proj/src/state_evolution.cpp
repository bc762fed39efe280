#include "ssc/state_evolution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ssc/rng.hpp"

namespace ssc {

namespace {

constexpr std::int64_t kMaterializeCap = 24'000'000;  // bank entries

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Per-component noise deviation of the section-wise AWGN channel.
double sigma_b(double sigma, int B) { return sigma / std::sqrt(std::log2(double(B))); }

}  // namespace

SectionPrior SectionPrior::one_hot(int B) {
  if (B < 2) throw std::invalid_argument("SectionPrior: B must be >= 2");
  SectionPrior p;
  p.kind_ = Kind::OneHot;
  p.B_ = B;
  return p;
}

SectionPrior SectionPrior::atoms(Eigen::MatrixXd support, Eigen::VectorXd weights) {
  if (support.rows() != weights.size() || support.rows() == 0)
    throw std::invalid_argument("SectionPrior: atoms/weights mismatch");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("SectionPrior: weights must sum to 1");
  double second_moment = 0.0;
  for (int k = 0; k < support.rows(); ++k)
    second_moment += weights[k] * support.row(k).squaredNorm();
  if (std::abs(second_moment - 1.0) > 1e-9)
    throw std::invalid_argument("SectionPrior: prior must have unit second moment");
  SectionPrior p;
  p.kind_ = Kind::Atoms;
  p.B_ = static_cast<int>(support.cols());
  p.support_ = std::move(support);
  p.weights_ = std::move(weights);
  return p;
}

Eigen::VectorXd SectionPrior::mean() const {
  if (kind_ == Kind::OneHot) return Eigen::VectorXd::Constant(B_, 1.0 / B_);
  return support_.transpose() * weights_;
}

double SectionPrior::prior_variance() const {
  if (kind_ == Kind::OneHot) return 1.0 - 1.0 / B_;
  return 1.0 - mean().squaredNorm();
}

Eigen::VectorXd denoise(const SectionPrior& prior, const Eigen::VectorXd& s,
                        const Eigen::VectorXd& z, double sigma) {
  const int B = prior.section_size();
  if (s.size() != B || z.size() != B) throw std::invalid_argument("denoise: bad section size");
  if (sigma < 0.0) throw std::domain_error("denoise: sigma must be >= 0");
  if (std::isinf(sigma)) return prior.mean();
  if (sigma == 0.0) return s;
  const double sb = sigma_b(sigma, B);
  const Eigen::VectorXd y = s + sb * z;
  if (prior.kind() == SectionPrior::Kind::OneHot) {
    // One-hot candidates reduce the posterior to a softmax of y / sb^2.
    Eigen::ArrayXd logw = y.array() / (sb * sb);
    logw -= logw.maxCoeff();
    Eigen::ArrayXd w = logw.exp();
    return (w / w.sum()).matrix();
  }
  const Eigen::MatrixXd& atoms = prior.support();
  Eigen::ArrayXd logw(atoms.rows());
  for (int k = 0; k < atoms.rows(); ++k)
    logw[k] = std::log(prior.weights()[k]) -
              (atoms.row(k).transpose() - y).squaredNorm() / (2.0 * sb * sb);
  logw -= logw.maxCoeff();
  Eigen::ArrayXd w = logw.exp();
  w /= w.sum();
  return atoms.transpose() * w.matrix();
}

SeWorkspace::SeWorkspace(SectionPrior prior, SeOptions options)
    : prior_(std::move(prior)), options_(options) {
  const int B = prior_.section_size();
  if (options_.evaluator == SeEvaluator::TensorQuadrature) {
    if (prior_.kind() != SectionPrior::Kind::OneHot)
      throw std::invalid_argument("SeWorkspace: TensorQuadrature supports the one-hot prior");
    const int D = B - 1;
    int per_dim = options_.quad_points_per_dim;
    if (per_dim <= 0) per_dim = D == 1 ? 192 : (D == 2 ? 96 : (D == 3 ? 64 : 32));
    double total = 1.0;
    for (int i = 0; i < D; ++i) total *= per_dim;
    if (total > 2.5e6)
      throw std::invalid_argument("SeWorkspace: tensor grid too large; use MonteCarlo");
    const int n = static_cast<int>(total);
    const GaussHermiteRule& rule = gauss_hermite(per_dim);
    // d_k = z_{k+1} - z_1 ~ N(0, I + 11^T); d = (I + a 11^T) xi maps a
    // standard normal xi onto that covariance.
    const double a = (std::sqrt(double(B)) - 1.0) / D;
    diff_bank_.resize(n, D);
    bank_weights_.resize(n);
    const double norm = std::pow(kPi, -0.5 * D);
    Eigen::ArrayXd xi(D);
    for (int idx = 0; idx < n; ++idx) {
      int rem = idx;
      double wgt = norm;
      for (int i = 0; i < D; ++i) {
        const int k = rem % per_dim;
        rem /= per_dim;
        xi[i] = std::sqrt(2.0) * rule.nodes[k];
        wgt *= rule.weights[k];
      }
      diff_bank_.row(idx) = (xi + a * xi.sum()).transpose();
      bank_weights_[idx] = wgt;
    }
    bank_size_ = n;
    materialized_ = true;
    quadrature_ = true;
  } else {
    if (options_.n_mc < 2) throw std::invalid_argument("SeWorkspace: n_mc must be >= 2");
    bank_size_ = options_.n_mc;
    bank_weights_ = Eigen::ArrayXd::Constant(bank_size_, 1.0 / bank_size_);
    const std::int64_t entries = static_cast<std::int64_t>(bank_size_) * B;
    materialized_ = entries <= kMaterializeCap;
    if (materialized_) {
      z_bank_.resize(bank_size_, B);
      for (int n = 0; n < bank_size_; ++n) {
        Rng rng = Rng::from_stream(options_.seed, static_cast<std::uint64_t>(n));
        for (int i = 0; i < B; ++i) z_bank_(n, i) = rng.gaussian();
      }
    }
    if (prior_.kind() == SectionPrior::Kind::Atoms) {
      atom_choices_.resize(bank_size_);
      const Eigen::VectorXd& w = prior_.weights();
      for (int n = 0; n < bank_size_; ++n) {
        Rng rng = Rng::from_stream(options_.seed ^ 0xC0FFEEULL, static_cast<std::uint64_t>(n));
        const double u = rng.uniform();
        double acc = 0.0;
        int pick = static_cast<int>(w.size()) - 1;
        for (int k = 0; k < w.size(); ++k) {
          acc += w[k];
          if (u <= acc) { pick = k; break; }
        }
        atom_choices_[n] = pick;
      }
    }
  }
  if (!quadrature_ && materialized_ && prior_.kind() == SectionPrior::Kind::OneHot && B == 2)
    z_diff_ = z_bank_.col(0) - z_bank_.col(1);
}

McEstimate SeWorkspace::reduce(const Eigen::ArrayXd& per_sample) const {
  const double mean = (per_sample * bank_weights_).sum();
  if (quadrature_) return {mean, 0.0};
  const double n = static_cast<double>(per_sample.size());
  const double var = (per_sample - mean).square().sum() / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

McEstimate SeWorkspace::evaluate(double sigma, MseRoute route) const {
  const int B = prior_.section_size();
  if (std::isinf(sigma)) return {prior_.prior_variance(), 0.0};
  if (sigma == 0.0) return {0.0, 0.0};
  const double sb = sigma_b(sigma, B);
  const int n = bank_size_;

  if (quadrature_) {
    // Posterior log-weights relative to the sent vector e1:
    // l_1 = 0, l_k = (sb d_{k-1} - 1)/sb^2.
    Eigen::ArrayXXd logw = (sb * diff_bank_ - 1.0) / (sb * sb);
    Eigen::ArrayXd rowmax = logw.rowwise().maxCoeff().max(0.0);
    Eigen::ArrayXd g1 = (-rowmax).exp();
    Eigen::ArrayXd denom = g1;
    Eigen::ArrayXXd gk = (logw.colwise() - rowmax).exp();
    denom += gk.rowwise().sum();
    g1 /= denom;
    gk.colwise() /= denom;
    const Eigen::ArrayXd sq = g1.square() + gk.square().rowwise().sum();
    Eigen::ArrayXd mse = (route == MseRoute::Direct) ? (1.0 - 2.0 * g1 + sq).eval()
                                                     : (1.0 - sq).eval();
    return reduce(mse);
  }

  if (prior_.kind() == SectionPrior::Kind::OneHot && B == 2 && materialized_) {
    // s = e1 by symmetry; the posterior is a two-term softmax.
    Eigen::ArrayXd g2 = 1.0 / (1.0 + ((1.0 + sb * z_diff_) / (sb * sb)).exp());
    Eigen::ArrayXd mse = (route == MseRoute::Direct) ? (2.0 * g2.square()).eval()
                                                     : (2.0 * g2 * (1.0 - g2)).eval();
    return reduce(mse);
  }

  Eigen::ArrayXd mse(n);
  const int chunk = std::max(1, static_cast<int>(kMaterializeCap / (4 * B)));
  Eigen::ArrayXXd z;
  for (int start = 0; start < n; start += chunk) {
    const int count = std::min(chunk, n - start);
    if (materialized_) {
      z = z_bank_.middleRows(start, count);
    } else {
      z.resize(count, B);
      for (int r = 0; r < count; ++r) {
        Rng rng = Rng::from_stream(options_.seed, static_cast<std::uint64_t>(start + r));
        for (int i = 0; i < B; ++i) z(r, i) = rng.gaussian();
      }
    }
    if (prior_.kind() == SectionPrior::Kind::OneHot) {
      Eigen::ArrayXXd logw = z * (1.0 / sb);
      logw.col(0) += 1.0 / (sb * sb);
      Eigen::ArrayXd rowmax = logw.rowwise().maxCoeff();
      logw.colwise() -= rowmax;
      Eigen::ArrayXXd g = logw.exp();
      g.colwise() /= g.rowwise().sum();
      const Eigen::ArrayXd sq = g.square().rowwise().sum();
      if (route == MseRoute::Direct)
        mse.segment(start, count) = 1.0 - 2.0 * g.col(0) + sq;
      else
        mse.segment(start, count) = 1.0 - sq;
    } else {
      const Eigen::MatrixXd& atoms = prior_.support();
      const int K = static_cast<int>(atoms.rows());
      Eigen::ArrayXd logw(K);
      for (int r = 0; r < count; ++r) {
        const int truth = atom_choices_[start + r];
        const Eigen::VectorXd y =
            atoms.row(truth).transpose() + sb * z.row(r).matrix().transpose();
        for (int k = 0; k < K; ++k)
          logw[k] = std::log(prior_.weights()[k]) -
                    (atoms.row(k).transpose() - y).squaredNorm() / (2.0 * sb * sb);
        logw -= logw.maxCoeff();
        Eigen::ArrayXd w = logw.exp();
        w /= w.sum();
        const Eigen::VectorXd shat = atoms.transpose() * w.matrix();
        if (route == MseRoute::Direct)
          mse[start + r] = (shat - atoms.row(truth).transpose()).squaredNorm();
        else
          mse[start + r] = 1.0 - shat.squaredNorm();
      }
    }
  }
  return reduce(mse);
}

Eigen::ArrayXXd SeWorkspace::z_samples(int start, int count) const {
  if (quadrature_) throw std::logic_error("z_samples: quadrature bank stores differences");
  const int B = prior_.section_size();
  if (start < 0 || start + count > bank_size_)
    throw std::invalid_argument("z_samples: range out of bank");
  if (materialized_) return z_bank_.middleRows(start, count);
  Eigen::ArrayXXd z(count, B);
  for (int r = 0; r < count; ++r) {
    Rng rng = Rng::from_stream(options_.seed, static_cast<std::uint64_t>(start + r));
    for (int i = 0; i < B; ++i) z(r, i) = rng.gaussian();
  }
  return z;
}

int SeWorkspace::atom_choice(int n) const {
  if (prior_.kind() != SectionPrior::Kind::Atoms)
    throw std::logic_error("atom_choice: one-hot prior");
  return atom_choices_[n];
}

McEstimate SeWorkspace::mse(double sigma) const {
  const std::uint64_t key = std::bit_cast<std::uint64_t>(sigma);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const McEstimate est = evaluate(sigma, MseRoute::Direct);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(key, est);
  return est;
}

McEstimate SeWorkspace::mse_route(double sigma, MseRoute route) const {
  return evaluate(sigma, route);
}

McEstimate se_operator_u(const EffectiveNoiseContext& ctx, const SeWorkspace& ws, double E) {
  if (!(E >= 0.0 && E <= 1.0)) throw std::domain_error("se_operator_u: E must be in [0,1]");
  return ws.mse(ctx.sigma(E));
}

SeSolveResult se_fixed_point(const EffectiveNoiseContext& ctx, const SeWorkspace& ws,
                             double E_init, std::optional<double> stop_below) {
  if (!(E_init >= 0.0 && E_init <= 1.0))
    throw std::domain_error("se_fixed_point: E_init must be in [0,1]");
  const SeOptions& opt = ws.options();
  SeSolveResult res;
  double E = E_init;
  res.history.push_back(E);
  for (int t = 0; t < opt.max_iter; ++t) {
    const McEstimate step = se_operator_u(ctx, ws, E);
    const double next = clamp01(step.value);
    res.history.push_back(next);
    res.iterations = t + 1;
    res.mc_std_error = step.std_error;
    if (std::abs(next - E) < opt.tol) {
      E = next;
      res.converged = true;
      break;
    }
    E = next;
    if (stop_below && E <= *stop_below) {
      res.converged = true;
      break;
    }
  }
  res.fixed_point = E;
  return res;
}

std::vector<double> se_trajectory(const EffectiveNoiseContext& ctx, const SeWorkspace& ws,
                                  double E_init, int steps) {
  std::vector<double> traj{E_init};
  double E = E_init;
  for (int t = 0; t < steps; ++t) {
    E = clamp01(se_operator_u(ctx, ws, E).value);
    traj.push_back(E);
  }
  return traj;
}

double mse_floor(const EffectiveNoiseContext& ctx, const SeWorkspace& ws) {
  return se_fixed_point(ctx, ws, 0.0).fixed_point;
}

bool in_basin(const EffectiveNoiseContext& ctx, const SeWorkspace& ws, double E) {
  const double floor = mse_floor(ctx, ws);
  // Everything at or below the floor converges up to it (monotone operator).
  if (E <= floor + 10.0 * ws.options().tol) return true;
  const SeSolveResult run = se_fixed_point(ctx, ws, E, floor + 5.0 * ws.options().tol);
  return std::abs(run.fixed_point - floor) <= 10.0 * ws.options().tol;
}

double basin_boundary(const EffectiveNoiseContext& ctx, const SeWorkspace& ws) {
  if (in_basin(ctx, ws, 1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;  // in_basin(0) holds by definition
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (in_basin(ctx, ws, mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool floor_is_good_phase(const SectionPrior& prior, double floor) {
  return floor <= 0.5 * prior.prior_variance();
}

ThresholdResult threshold_gamp_u(const ChannelModel& channel, const QuadratureSpec& quad,
                                 const SectionPrior& prior, const SeOptions& options,
                                 double r_lo, double r_hi, double rate_tol) {
  if (!(r_lo > 0.0 && r_hi > r_lo)) throw std::invalid_argument("threshold_gamp_u: bad bracket");
  SeWorkspace ws(prior, options);
  int evals = 0;
  auto decodes = [&](double rate) {
    EffectiveNoiseContext ctx(channel, rate, quad);
    ++evals;
    const double floor = mse_floor(ctx, ws);
    // Far above capacity the good fixed point disappears and T^inf(1) = E_0
    // holds again, trivially; the threshold is the sup of the *first* rate
    // interval, where the common fixed point is still the low branch.
    if (!floor_is_good_phase(prior, floor)) return false;
    const SeSolveResult from_one = se_fixed_point(ctx, ws, 1.0, floor + 5.0 * options.tol);
    const double slack = std::max(10.0 * options.tol, 5.0 * from_one.mc_std_error);
    return std::abs(from_one.fixed_point - floor) <= slack;
  };
  for (int grow = 0; grow < 30 && !decodes(r_lo); ++grow) {
    r_hi = r_lo;
    r_lo *= 0.5;
    if (r_lo < 1e-6) throw NumericalError("threshold_gamp_u: no decodable rate found");
  }
  for (int grow = 0; grow < 30 && decodes(r_hi); ++grow) {
    r_lo = r_hi;
    r_hi *= 2.0;
    if (r_hi > 64.0) throw NumericalError("threshold_gamp_u: predicate true up to rate 64");
  }
  while (r_hi - r_lo > rate_tol) {
    const double mid = 0.5 * (r_lo + r_hi);
    (decodes(mid) ? r_lo : r_hi) = mid;
  }
  return {0.5 * (r_lo + r_hi), r_lo, r_hi, evals};
}

}  // namespace ssc
