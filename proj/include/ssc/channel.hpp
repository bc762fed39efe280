// Effective memoryless channels: a physical channel W composed with an input
// map pi, evaluated as a single kernel P_out(y|z) for real z.
//
// Discrete-output channels are stored as an exact finite pmf over the output
// symbols together with the input cells of pi (threshold partition of the real
// line), so integrals over y are finite sums. Continuous channels carry a
// density evaluator and an integration-domain hint.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ssc/rng.hpp"

namespace ssc {

enum class ChannelKind { Awgn, Bsc, Bec, ZChannel, Custom };
enum class SupportKind { Discrete, Continuous };

struct UnsupportedChannelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input map as a threshold partition: pi(z) = inputs[i] for
// z in (thresholds[i-1], thresholds[i]], with implicit +-infinity endpoints.
struct InputCells {
  Eigen::VectorXd thresholds;  // size q-1, strictly increasing
  Eigen::VectorXd inputs;      // size q
};

class ChannelModel {
 public:
  static ChannelModel awgn(double snr);
  static ChannelModel bsc(double eps);
  static ChannelModel bec(double eps);
  // p1 is the probability of the +1 input; the map is sign(z - Qinv(p1)).
  static ChannelModel z_channel(double eps, double p1 = 0.5);

  // Custom discrete channel: transition(i, k) = W(outputs[k] | inputs[i]).
  static ChannelModel custom_discrete(InputCells cells, Eigen::MatrixXd transition,
                                      Eigen::VectorXd outputs);

  // Custom continuous channel with identity input map; kernel(y, z) is the
  // output density, integrable over [y_lo, y_hi] up to negligible tails.
  static ChannelModel custom_continuous(std::function<double(double, double)> kernel,
                                        double y_lo, double y_hi);

  // Config strings: "awgn:snr=10", "bsc:eps=0.1", "bec:eps=0.5",
  // "z:eps=0.1,p1=0.5437".
  static ChannelModel parse(std::string_view config);

  ChannelKind kind() const { return kind_; }
  SupportKind support() const { return support_; }
  std::string config_string() const { return config_; }

  // P_out(y|z) = W(y|pi(z)); pmf value for discrete outputs, density otherwise.
  double kernel_eval(double y, double z) const;

  double map_pi(double z) const;

  // Shannon capacity in bits for the reference channels.
  double capacity_closed_form() const;

  // Large-alphabet GAMP threshold in bits for the reference channels.
  double gamp_threshold_closed_form() const;

  double sample_output(double z, Rng& rng) const;

  // Discrete-output accessors.
  bool discrete() const { return support_ == SupportKind::Discrete; }
  const Eigen::VectorXd& output_symbols() const;
  const Eigen::MatrixXd& transition() const;
  const InputCells& input_cells() const;
  int output_index(double y) const;  // throws std::domain_error if not a symbol

  // Continuous-output accessors.
  double awgn_noise_var() const;
  double continuous_kernel(double y, double z) const;
  std::pair<double, double> y_interval_hint() const;

  // Channel parameters where applicable.
  double eps() const { return eps_; }
  double p1() const { return p1_; }
  double snr() const { return snr_; }

 private:
  ChannelModel() = default;

  ChannelKind kind_ = ChannelKind::Custom;
  SupportKind support_ = SupportKind::Continuous;
  std::string config_;
  double snr_ = 0.0, eps_ = 0.0, p1_ = 0.5;

  // Discrete representation.
  InputCells cells_;
  Eigen::MatrixXd transition_;  // q x K
  Eigen::VectorXd outputs_;     // K

  // Continuous representation.
  double noise_var_ = 0.0;  // AWGN
  std::function<double(double, double)> kernel_;
  double y_lo_ = 0.0, y_hi_ = 0.0;
};

// Capacity-achieving bias for the Z channel.
double z_channel_optimal_p1(double eps);

// Mutual information I(A;Y) in bits of the Z channel at input bias p1.
double z_channel_capacity(double eps, double p1);

}  // namespace ssc
