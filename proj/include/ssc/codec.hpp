// Concrete sparse superposition code instances: message and coding-matrix
// sampling (underlying and spatially coupled), encoding, transmission and the
// vectorial GAMP decoder with Onsager correction and scalar (per-block for
// coupled matrices) variances.
#pragma once

#include "ssc/coupled.hpp"

namespace ssc {

struct CodeParams {
  int L = 0;          // sections
  int B = 0;          // section size
  double rate = 0.0;  // design rate in bits
  int M = 0;          // rows, ceil(L log2(B) / rate)
  int N = 0;          // columns, L*B
  double alpha = 0.0; // measurement rate M/N

  static CodeParams make(int L, int B, double rate);
};

// Message as the selected position per section, each uniform on [0,B).
Eigen::VectorXi sample_message(int L, int B, Rng& rng);

// One-hot expansion to an N-vector.
Eigen::VectorXd expand_message(const Eigen::VectorXi& message, int B);

// Underlying ensemble: i.i.d. N(0, 1/L) entries.
Eigen::MatrixXd sample_matrix(const CodeParams& params, Rng& rng);

// Coupled ensemble: block (r,c) entries i.i.d. N(0, J_rc/L). Gamma must
// divide both L and M.
Eigen::MatrixXd sample_matrix(const CodeParams& params, const CouplingSpec& coupling, Rng& rng);

// F s via column gathering.
Eigen::VectorXd encode(const Eigen::MatrixXd& F, const Eigen::VectorXi& message, int B);

// Componentwise channel sampling.
Eigen::VectorXd transmit(const ChannelModel& ch, const Eigen::VectorXd& codeword, Rng& rng);

struct GampOptions {
  int t_max = 50;
  bool onsager = true;           // test hook: disabling degrades SE agreement
  double divergence_mse = 10.0;  // flagged early stop
  QuadratureSpec quad;
};

struct GampResult {
  Eigen::MatrixXd posterior;  // L x B section posteriors at the last iteration
  Eigen::VectorXi hardened;   // argmax per section, lowest index on ties
  std::vector<double> mse;    // empirical MSE per iteration, entry 0 = init
  std::vector<double> ser;    // section error rate per iteration
  int iterations = 0;
  bool diverged = false;
};

// Decodes y = channel(F s). The true message is used for the per-iteration
// error metrics, and for holding the seed sections (first and last 4w message
// blocks) fixed when a coupling spec is given.
GampResult gamp_decode(const Eigen::MatrixXd& F, const Eigen::VectorXd& y,
                       const ChannelModel& ch, const CodeParams& params,
                       const Eigen::VectorXi& true_message, const GampOptions& opt = {},
                       const CouplingSpec* coupling = nullptr);

Eigen::VectorXi harden(const Eigen::MatrixXd& posterior);

double section_error_rate(const Eigen::VectorXi& decoded, const Eigen::VectorXi& truth);

}  // namespace ssc
