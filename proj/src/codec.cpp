#include "ssc/codec.hpp"

#include <cmath>

namespace ssc {

CodeParams CodeParams::make(int L, int B, double rate) {
  if (L < 1 || B < 2) throw std::invalid_argument("CodeParams: need L >= 1, B >= 2");
  if (!(rate > 0.0)) throw std::invalid_argument("CodeParams: rate must be > 0");
  CodeParams p;
  p.L = L;
  p.B = B;
  p.rate = rate;
  p.N = L * B;
  p.M = static_cast<int>(std::ceil(L * std::log2(double(B)) / rate));
  p.alpha = static_cast<double>(p.M) / p.N;
  return p;
}

Eigen::VectorXi sample_message(int L, int B, Rng& rng) {
  Eigen::VectorXi msg(L);
  for (int l = 0; l < L; ++l) msg[l] = static_cast<int>(rng.next_u64() % B);
  return msg;
}

Eigen::VectorXd expand_message(const Eigen::VectorXi& message, int B) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(message.size() * B);
  for (int l = 0; l < message.size(); ++l) s[l * B + message[l]] = 1.0;
  return s;
}

Eigen::MatrixXd sample_matrix(const CodeParams& params, Rng& rng) {
  Eigen::MatrixXd F(params.M, params.N);
  const double sd = 1.0 / std::sqrt(double(params.L));
  for (int j = 0; j < params.N; ++j)
    for (int i = 0; i < params.M; ++i) F(i, j) = sd * rng.gaussian();
  return F;
}

Eigen::MatrixXd sample_matrix(const CodeParams& params, const CouplingSpec& coupling, Rng& rng) {
  const int gamma = coupling.gamma;
  if (params.L % gamma != 0 || params.M % gamma != 0)
    throw std::invalid_argument("sample_matrix: Gamma must divide L and M");
  const int rows_per = params.M / gamma;
  const int cols_per = params.N / gamma;
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(params.M, params.N);
  const double inv_sqrt_l = 1.0 / std::sqrt(double(params.L));
  for (int j = 0; j < params.N; ++j) {
    const int c = j / cols_per;
    for (int i = 0; i < params.M; ++i) {
      const int r = i / rows_per;
      const double j_rc = coupling.variances(r, c);
      if (j_rc != 0.0) F(i, j) = std::sqrt(j_rc) * inv_sqrt_l * rng.gaussian();
    }
  }
  return F;
}

Eigen::VectorXd encode(const Eigen::MatrixXd& F, const Eigen::VectorXi& message, int B) {
  if (F.cols() != message.size() * B) throw std::invalid_argument("encode: dimension mismatch");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(F.rows());
  for (int l = 0; l < message.size(); ++l) x += F.col(l * B + message[l]);
  return x;
}

Eigen::VectorXd transmit(const ChannelModel& ch, const Eigen::VectorXd& codeword, Rng& rng) {
  Eigen::VectorXd y(codeword.size());
  for (int i = 0; i < codeword.size(); ++i) y[i] = ch.sample_output(codeword[i], rng);
  return y;
}

Eigen::VectorXi harden(const Eigen::MatrixXd& posterior) {
  Eigen::VectorXi out(posterior.rows());
  for (int l = 0; l < posterior.rows(); ++l) {
    int best = 0;
    for (int i = 1; i < posterior.cols(); ++i)
      if (posterior(l, i) > posterior(l, best)) best = i;  // ties keep lowest index
    out[l] = best;
  }
  return out;
}

double section_error_rate(const Eigen::VectorXi& decoded, const Eigen::VectorXi& truth) {
  if (decoded.size() != truth.size())
    throw std::invalid_argument("section_error_rate: length mismatch");
  int wrong = 0;
  for (int l = 0; l < decoded.size(); ++l) wrong += decoded[l] != truth[l];
  return static_cast<double>(wrong) / decoded.size();
}

GampResult gamp_decode(const Eigen::MatrixXd& F, const Eigen::VectorXd& y,
                       const ChannelModel& ch, const CodeParams& params,
                       const Eigen::VectorXi& true_message, const GampOptions& opt,
                       const CouplingSpec* coupling) {
  const int L = params.L, B = params.B, M = params.M, N = params.N;
  if (F.rows() != M || F.cols() != N || y.size() != M || true_message.size() != L)
    throw std::invalid_argument("gamp_decode: dimension mismatch");
  const int gamma = coupling ? coupling->gamma : 1;
  if (coupling && (L % gamma != 0 || M % gamma != 0))
    throw std::invalid_argument("gamp_decode: Gamma must divide L and M");
  const int sections_per_block = L / gamma;
  const int rows_per_block = M / gamma;

  EffectiveNoiseContext ctx(ch, params.rate, opt.quad);

  // Seed sections of a coupled code are known at the decoder.
  std::vector<bool> section_pinned(L, false);
  if (coupling && !coupling->periodic) {
    const int seed_blocks = 4 * coupling->w;
    for (int l = 0; l < L; ++l) {
      const int c = l / sections_per_block;
      section_pinned[l] = c < seed_blocks || c >= gamma - seed_blocks;
    }
  }

  Eigen::MatrixXd posterior = Eigen::MatrixXd::Constant(L, B, 1.0 / B);
  auto pin_sections = [&]() {
    for (int l = 0; l < L; ++l) {
      if (!section_pinned[l]) continue;
      posterior.row(l).setZero();
      posterior(l, true_message[l]) = 1.0;
    }
  };
  pin_sections();

  Eigen::VectorXd shat(N);
  auto refresh_shat = [&]() {
    for (int l = 0; l < L; ++l)
      shat.segment(l * B, B) = posterior.row(l).transpose();
  };
  refresh_shat();

  // Per message block: average section variance sum (the MSE-like state).
  Eigen::VectorXd block_var(gamma);
  auto refresh_block_var = [&]() {
    for (int c = 0; c < gamma; ++c) {
      double acc = 0.0;
      for (int l = c * sections_per_block; l < (c + 1) * sections_per_block; ++l)
        acc += 1.0 - posterior.row(l).squaredNorm();
      block_var[c] = acc / sections_per_block;
    }
  };
  refresh_block_var();

  Eigen::VectorXd g_prev = Eigen::VectorXd::Zero(M);
  Eigen::VectorXd g_cur(M), dg_cur(M);
  const Eigen::VectorXd s_true = expand_message(true_message, B);

  GampResult res;
  auto record = [&]() {
    double acc = 0.0;
    for (int l = 0; l < L; ++l)
      acc += (posterior.row(l).transpose() - s_true.segment(l * B, B)).squaredNorm();
    res.mse.push_back(acc / L);
    res.ser.push_back(section_error_rate(harden(posterior), true_message));
  };
  record();

  for (int t = 0; t < opt.t_max; ++t) {
    // Output side: residual variance per row block, Onsager-corrected mean.
    Eigen::VectorXd tau_p(gamma);
    for (int r = 0; r < gamma; ++r) {
      if (coupling) {
        double acc = 0.0;
        for (int c = 0; c < gamma; ++c) acc += coupling->variances(r, c) * block_var[c];
        tau_p[r] = std::max(acc / gamma, 1e-12);
      } else {
        tau_p[r] = std::max(block_var[0], 1e-12);
      }
    }
    Eigen::VectorXd p = F * shat;
    if (opt.onsager) {
      for (int i = 0; i < M; ++i) p[i] -= tau_p[i / rows_per_block] * g_prev[i];
    }
    for (int i = 0; i < M; ++i) {
      const OutputScore sc = ctx.g_out(y[i], p[i], tau_p[i / rows_per_block]);
      g_cur[i] = sc.value;
      dg_cur[i] = sc.dp;
    }

    // Input side: per column block pseudo-observation variance.
    Eigen::VectorXd mean_neg_dg(gamma);
    for (int r = 0; r < gamma; ++r)
      mean_neg_dg[r] = -dg_cur.segment(r * rows_per_block, rows_per_block).mean();
    Eigen::VectorXd tau_r(gamma);
    const double rows_per_section = static_cast<double>(M) / L;  // log2(B)/R
    for (int c = 0; c < gamma; ++c) {
      double inv = 0.0;
      if (coupling) {
        for (int r = 0; r < gamma; ++r)
          inv += coupling->variances(r, c) * mean_neg_dg[r];
        inv *= rows_per_section / gamma;
      } else {
        inv = rows_per_section * mean_neg_dg[0];
      }
      tau_r[c] = 1.0 / std::max(inv, 1e-12);
    }

    Eigen::VectorXd corr = F.transpose() * g_cur;
    for (int l = 0; l < L; ++l) {
      if (section_pinned[l]) continue;
      const int c = l / sections_per_block;
      Eigen::ArrayXd logw =
          (shat.segment(l * B, B) + tau_r[c] * corr.segment(l * B, B)).array() / tau_r[c];
      logw -= logw.maxCoeff();
      Eigen::ArrayXd w = logw.exp();
      posterior.row(l) = (w / w.sum()).transpose();
    }
    pin_sections();
    refresh_shat();
    refresh_block_var();
    g_prev = g_cur;
    res.iterations = t + 1;
    record();
    if (!std::isfinite(res.mse.back()))
      throw NumericalError("gamp_decode: non-finite MSE at iteration " + std::to_string(t + 1));
    if (res.mse.back() > opt.divergence_mse) {
      res.diverged = true;
      break;
    }
  }
  res.posterior = posterior;
  res.hardened = harden(posterior);
  return res;
}

}  // namespace ssc
