#include "ssc/channel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "ssc/gaussian.hpp"

namespace ssc {

namespace {

int  cell_index(const InputCells& cells, double z) {
  // z in (thresholds[i-1], thresholds[i]] -> i
  int i = 0;
  while (i < cells.thresholds.size() && z > cells.thresholds[i]) ++i;
  return i;
}

std::string format_param(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

ChannelModel ChannelModel::awgn(double snr) {
  if (!(snr > 0.0)) throw std::invalid_argument("awgn: snr must be positive");
  ChannelModel ch;
  ch.kind_ = ChannelKind::Awgn;
  ch.support_ = SupportKind::Continuous;
  ch.snr_ = snr;
  ch.noise_var_ = 1.0 / snr;
  const double half = 1.0 + 8.0 * std::sqrt(1.0 + ch.noise_var_);
  ch.y_lo_ = -half;
  ch.y_hi_ = half;
  ch.config_ = "awgn:snr=" + format_param(snr);
  return ch;
}

ChannelModel ChannelModel::bsc(double eps) {
  if (!(eps >= 0.0 && eps < 0.5)) throw std::invalid_argument("bsc: eps must be in [0,1/2)");
  ChannelModel ch;
  ch.kind_ = ChannelKind::Bsc;
  ch.support_ = SupportKind::Discrete;
  ch.eps_ = eps;
  ch.cells_.thresholds = Eigen::VectorXd::Zero(1);
  ch.cells_.inputs = Eigen::Vector2d(-1.0, 1.0);
  ch.outputs_ = Eigen::Vector2d(-1.0, 1.0);
  ch.transition_.resize(2, 2);
  ch.transition_ << 1.0 - eps, eps,
                    eps,       1.0 - eps;
  ch.config_ = "bsc:eps=" + format_param(eps);
  return ch;
}

ChannelModel ChannelModel::bec(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("bec: eps must be in [0,1]");
  ChannelModel ch;
  ch.kind_ = ChannelKind::Bec;
  ch.support_ = SupportKind::Discrete;
  ch.eps_ = eps;
  ch.cells_.thresholds = Eigen::VectorXd::Zero(1);
  ch.cells_.inputs = Eigen::Vector2d(-1.0, 1.0);
  // Erasure is an explicit third symbol at 0.
  ch.outputs_ = Eigen::Vector3d(-1.0, 0.0, 1.0);
  ch.transition_.resize(2, 3);
  ch.transition_ << 1.0 - eps, eps, 0.0,
                    0.0,       eps, 1.0 - eps;
  ch.config_ = "bec:eps=" + format_param(eps);
  return ch;
}

ChannelModel ChannelModel::z_channel(double eps, double p1) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("z: eps must be in [0,1)");
  if (!(p1 > 0.0 && p1 < 1.0)) throw std::invalid_argument("z: p1 must be in (0,1)");
  ChannelModel ch;
  ch.kind_ = ChannelKind::ZChannel;
  ch.support_ = SupportKind::Discrete;
  ch.eps_ = eps;
  ch.p1_ = p1;
  ch.cells_.thresholds = Eigen::VectorXd::Constant(1, q_inverse(p1));
  ch.cells_.inputs = Eigen::Vector2d(-1.0, 1.0);
  ch.outputs_ = Eigen::Vector2d(-1.0, 1.0);
  // The -1 input flips with probability eps; the +1 input is noiseless.
  ch.transition_.resize(2, 2);
  ch.transition_ << 1.0 - eps, eps,
                    0.0,       1.0;
  ch.config_ = "z:eps=" + format_param(eps) + ",p1=" + format_param(p1);
  return ch;
}

ChannelModel ChannelModel::custom_discrete(InputCells cells, Eigen::MatrixXd transition,
                                           Eigen::VectorXd outputs) {
  const int q = static_cast<int>(cells.inputs.size());
  if (cells.thresholds.size() != q - 1)
    throw std::invalid_argument("custom_discrete: need q-1 thresholds for q inputs");
  for (int i = 1; i < cells.thresholds.size(); ++i)
    if (!(cells.thresholds[i] > cells.thresholds[i - 1]))
      throw std::invalid_argument("custom_discrete: thresholds must be increasing");
  if (transition.rows() != q || transition.cols() != outputs.size())
    throw std::invalid_argument("custom_discrete: transition shape mismatch");
  for (int i = 0; i < q; ++i) {
    if (std::abs(transition.row(i).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("custom_discrete: transition rows must sum to 1");
    if ((transition.row(i).array() < 0.0).any())
      throw std::invalid_argument("custom_discrete: negative transition probability");
  }
  ChannelModel ch;
  ch.kind_ = ChannelKind::Custom;
  ch.support_ = SupportKind::Discrete;
  ch.cells_ = std::move(cells);
  ch.transition_ = std::move(transition);
  ch.outputs_ = std::move(outputs);
  ch.config_ = "custom:discrete";
  return ch;
}

ChannelModel ChannelModel::custom_continuous(std::function<double(double, double)> kernel,
                                             double y_lo, double y_hi) {
  if (!(y_hi > y_lo)) throw std::invalid_argument("custom_continuous: empty y interval");
  ChannelModel ch;
  ch.kind_ = ChannelKind::Custom;
  ch.support_ = SupportKind::Continuous;
  ch.kernel_ = std::move(kernel);
  ch.y_lo_ = y_lo;
  ch.y_hi_ = y_hi;
  ch.config_ = "custom:continuous";
  return ch;
}

ChannelModel ChannelModel::parse(std::string_view config) {
  const auto colon = config.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("channel config: expected '<name>:<params>'");
  const std::string name(config.substr(0, colon));
  std::map<std::string, double> params;
  std::string rest(config.substr(colon + 1));
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("channel config: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    double v = 0.0;
    const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (res.ec != std::errc{} || res.ptr != val.data() + val.size())
      throw std::invalid_argument("channel config: bad number '" + val + "'");
    params[key] = v;
  }
  auto require = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end())
      throw std::invalid_argument(std::string("channel config: missing '") + key + "'");
    return it->second;
  };
  if (name == "awgn") return awgn(require("snr"));
  if (name == "bsc") return bsc(require("eps"));
  if (name == "bec") return bec(require("eps"));
  if (name == "z") {
    const double eps = require("eps");
    const double p1 = params.count("p1") ? params["p1"] : 0.5;
    return z_channel(eps, p1);
  }
  throw std::invalid_argument("channel config: unknown channel '" + name + "'");
}

int ChannelModel::output_index(double y) const {
  if (!discrete()) throw std::logic_error("output_index: continuous channel");
  for (int k = 0; k < outputs_.size(); ++k)
    if (std::abs(outputs_[k] - y) <= 1e-9) return k;
  throw std::domain_error("channel output " + std::to_string(y) + " not in support");
}

double ChannelModel::kernel_eval(double y, double z) const {
  if (discrete()) {
    const int k = output_index(y);
    return transition_(cell_index(cells_, z), k);
  }
  if (kind_ == ChannelKind::Awgn) return normal_pdf(y, z, noise_var_);
  return kernel_(y, z);
}

double ChannelModel::map_pi(double z) const {
  if (!discrete()) return z;
  return cells_.inputs[cell_index(cells_, z)];
}

double ChannelModel::capacity_closed_form() const {
  switch (kind_) {
    case ChannelKind::Awgn:
      return 0.5 * std::log2(1.0 + snr_);
    case ChannelKind::Bsc:
      return 1.0 - binary_entropy(eps_);
    case ChannelKind::Bec:
      return 1.0 - eps_;
    case ChannelKind::ZChannel:
      return z_channel_capacity(eps_, p1_);
    default:
      throw UnsupportedChannelError("capacity_closed_form: custom channel");
  }
}

double ChannelModel::gamp_threshold_closed_form() const {
  switch (kind_) {
    case ChannelKind::Awgn:
      return 1.0 / (2.0 * kLn2 * (1.0 + 1.0 / snr_));
    case ChannelKind::Bsc:
      return (1.0 - 2.0 * eps_) * (1.0 - 2.0 * eps_) / (kPi * kLn2);
    case ChannelKind::Bec:
      return (1.0 - eps_) / (kPi * kLn2);
    case ChannelKind::ZChannel:
      if (std::abs(p1_ - 0.5) > 1e-12)
        throw UnsupportedChannelError("gamp_threshold_closed_form: Z formula needs p1=1/2");
      return (1.0 - eps_) / (kPi * kLn2 * (1.0 + eps_));
    default:
      throw UnsupportedChannelError("gamp_threshold_closed_form: custom channel");
  }
}

double ChannelModel::sample_output(double z, Rng& rng) const {
  if (kind_ == ChannelKind::Awgn) return z + std::sqrt(noise_var_) * rng.gaussian();
  if (!discrete())
    throw UnsupportedChannelError("sample_output: custom continuous channel has no sampler");
  const int i = cell_index(cells_, z);
  const double u = rng.uniform();
  double acc = 0.0;
  for (int k = 0; k < outputs_.size(); ++k) {
    acc += transition_(i, k);
    if (u <= acc) return outputs_[k];
  }
  return outputs_[outputs_.size() - 1];
}

const Eigen::VectorXd& ChannelModel::output_symbols() const {
  if (!discrete()) throw std::logic_error("output_symbols: continuous channel");
  return outputs_;
}

const Eigen::MatrixXd& ChannelModel::transition() const {
  if (!discrete()) throw std::logic_error("transition: continuous channel");
  return transition_;
}

const InputCells& ChannelModel::input_cells() const {
  if (!discrete()) throw std::logic_error("input_cells: continuous channel");
  return cells_;
}

double ChannelModel::awgn_noise_var() const {
  if (kind_ != ChannelKind::Awgn) throw std::logic_error("awgn_noise_var: not an AWGN channel");
  return noise_var_;
}

double ChannelModel::continuous_kernel(double y, double z) const {
  if (kind_ == ChannelKind::Awgn) return normal_pdf(y, z, noise_var_);
  if (!kernel_) throw std::logic_error("continuous_kernel: no kernel");
  return kernel_(y, z);
}

std::pair<double, double> ChannelModel::y_interval_hint() const {
  if (discrete()) throw std::logic_error("y_interval_hint: discrete channel");
  return {y_lo_, y_hi_};
}

double z_channel_capacity(double eps, double p1) {
  // Output marginal P[Y=+1] = p1 + (1-p1) eps; only the -1 input is noisy.
  return binary_entropy(p1 + (1.0 - p1) * eps) - (1.0 - p1) * binary_entropy(eps);
}

double z_channel_optimal_p1(double eps) {
  const double h = binary_entropy(eps);
  return 1.0 - 1.0 / ((1.0 - eps) * (1.0 + std::pow(2.0, h / (1.0 - eps))));
}

}  // namespace ssc
