// Command-line front end: reproducible experiments emitting figure-ready
// CSV/JSON tables with an embedded provenance header.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "ssc/codec.hpp"
#include "ssc/version.hpp"

using json = nlohmann::json;
using namespace ssc;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct GlobalOptions {
  std::uint64_t seed = 1;
  int mc_samples = 200000;
  int gh_order = 61;
  double y_tol = 1e-10;
  double se_tol = 1e-9;
  int max_iter = 10000;
  std::string evaluator = "auto";  // auto | mc | quad
  std::string out;
  std::string config_path;

  QuadratureSpec quad() const { return {gh_order, y_tol, gh_order}; }

  SeOptions se_options(int B) const {
    SeOptions opt;
    opt.n_mc = mc_samples;
    opt.seed = seed;
    opt.tol = se_tol;
    opt.max_iter = max_iter;
    const bool quad_mode = evaluator == "quad" || (evaluator == "auto" && B <= 4);
    opt.evaluator = quad_mode ? SeEvaluator::TensorQuadrature : SeEvaluator::MonteCarlo;
    return opt;
  }

  json to_json() const {
    return {{"seed", seed},          {"mc_samples", mc_samples}, {"gh_order", gh_order},
            {"y_tol", y_tol},        {"se_tol", se_tol},         {"max_iter", max_iter},
            {"evaluator", evaluator}};
  }
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);  // "\n" line endings on all platforms
      if (!file_) throw std::invalid_argument("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_provenance(std::ostream& os, const std::string& command, const json& config) {
  os << "# ssc " << SSC_VERSION << "\n";
  os << "# command " << command << "\n";
  os << "# config " << config.dump() << "\n";
}

// Grabs --config <file> before CLI11 runs so file values become defaults and
// explicit flags still win.
json preload_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) throw std::invalid_argument("cannot read config file: " + path);
      json j;
      in >> j;
      return j;
    }
  }
  return json::object();
}

template <typename T>
void from_config(const json& cfg, const char* key, T& var) {
  if (cfg.contains(key)) var = cfg.at(key).get<T>();
}

Eigen::VectorXd linspace01(int n) {
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = static_cast<double>(i) / (n - 1);
  return g;
}

// ---------------------------------------------------------------------------

int cmd_potential_curve(const GlobalOptions& g, const std::string& channel_cfg,
                        const std::vector<double>& rates, int B, int grid, bool large_b,
                        bool unshifted) {
  if (rates.empty()) throw std::invalid_argument("potential-curve: empty rate list");
  if (grid < 2) throw std::invalid_argument("potential-curve: grid must have >= 2 points");
  const ChannelModel ch = ChannelModel::parse(channel_cfg);
  json cfg = g.to_json();
  cfg["channel"] = channel_cfg;
  cfg["rates"] = rates;
  cfg["b"] = B;
  cfg["grid"] = grid;
  cfg["large_b"] = large_b;
  cfg["shifted"] = !unshifted;

  Output out(g.out);
  std::ostream& os = out.stream();
  write_provenance(os, "potential-curve", cfg);
  const char* value_name = large_b ? "phi_u" : "F_u";
  const bool multi = rates.size() > 1;
  os << (multi ? std::string("rate,E,") + value_name : std::string("E,") + value_name) << "\n";

  std::optional<SeWorkspace> ws;
  if (!large_b) ws.emplace(SectionPrior::one_hot(B), g.se_options(B));
  const Eigen::VectorXd e_grid = linspace01(grid);
  for (double rate : rates) {
    EffectiveNoiseContext ctx(ch, rate, g.quad());
    const PotentialCurve curve = large_b ? large_b_curve(ctx, e_grid, !unshifted)
                                         : potential_curve(ctx, *ws, e_grid);
    for (int i = 0; i < e_grid.size(); ++i) {
      if (multi) os << fmt17(rate) << ",";
      os << fmt17(curve.e_grid[i]) << "," << fmt17(curve.values[i]) << "\n";
    }
  }
  return 0;
}

int cmd_thresholds(const GlobalOptions& g, const std::string& family,
                   const std::vector<double>& params, const std::vector<int>& b_list,
                   double rate_tol) {
  if (params.empty()) throw std::invalid_argument("thresholds: empty parameter list");
  json cfg = g.to_json();
  cfg["family"] = family;
  cfg["params"] = params;
  cfg["b"] = b_list;
  cfg["rate_tol"] = rate_tol;

  json rows = json::array();
  for (double p : params) {
    json row;
    row["param"] = p;
    auto fill_limits = [&](const ChannelModel& ch, const char* suffix) {
      EffectiveNoiseContext ctx(ch, 1.0, g.quad());
      row[std::string("capacity") + suffix] = ch.capacity_closed_form();
      row[std::string("r_u_inf") + suffix] = r_u_infinity(ctx);
      row[std::string("r_pot_inf") + suffix] = r_pot_infinity(ctx);
      return ch;
    };
    ChannelModel ch = [&]() {
      if (family == "awgn") return fill_limits(ChannelModel::awgn(p), "");
      if (family == "bsc") return fill_limits(ChannelModel::bsc(p), "");
      if (family == "bec") return fill_limits(ChannelModel::bec(p), "");
      if (family == "z") {
        ChannelModel half = fill_limits(ChannelModel::z_channel(p, 0.5), "");
        const double p1s = z_channel_optimal_p1(p);
        row["p1_star"] = p1s;
        fill_limits(ChannelModel::z_channel(p, p1s), "_star");
        return half;
      }
      throw std::invalid_argument("thresholds: unknown family '" + family + "'");
    }();
    for (int B : b_list) {
      const SectionPrior prior = SectionPrior::one_hot(B);
      const double cap = ch.capacity_closed_form();
      const ThresholdResult ru = threshold_gamp_u(ch, g.quad(), prior, g.se_options(B),
                                                  0.25 * cap, cap, rate_tol);
      const ThresholdResult rpot = threshold_potential(ch, g.quad(), prior, g.se_options(B),
                                                       0.5 * ru.rate, cap, rate_tol);
      row["r_u_b" + std::to_string(B)] = ru.rate;
      row["r_pot_b" + std::to_string(B)] = rpot.rate;
    }
    rows.push_back(row);
  }
  json report = {{"version", SSC_VERSION}, {"config", cfg}, {"rows", rows}};
  Output out(g.out);
  out.stream() << report.dump(2) << "\n";
  return 0;
}

int cmd_sc_profile(const GlobalOptions& g, const std::string& channel_cfg, int B, double rate,
                   int gamma, int w, int t_max, const std::string& design) {
  const ChannelModel ch = ChannelModel::parse(channel_cfg);
  json cfg = g.to_json();
  cfg["channel"] = channel_cfg;
  cfg["b"] = B;
  cfg["rate"] = rate;
  cfg["gamma"] = gamma;
  cfg["w"] = w;
  cfg["t_max"] = t_max;
  cfg["design"] = design;

  const DesignFunction gw = design == "tapered" ? tapered_design() : rectangular_design();
  const CouplingSpec spec = build_coupling(gamma, w, gw, rate, design);
  cfg["rate_eff"] = spec.rate_eff;
  EffectiveNoiseContext ctx(ch, rate, g.quad());
  SeOptions opt = g.se_options(B);
  opt.max_iter = t_max;
  SeWorkspace ws(SectionPrior::one_hot(B), opt);
  const CoupledResult run = coupled_fixed_point(spec, ctx, ws, std::nullopt, true);

  Output out(g.out);
  std::ostream& os = out.stream();
  write_provenance(os, "sc-profile", cfg);
  os << "t,r,E\n";
  for (int t = 0; t < run.trajectory.rows(); ++t)
    for (int r = 0; r < gamma; ++r)
      os << t << "," << (r + 1) << "," << fmt17(run.trajectory(t, r)) << "\n";
  // Saturated profile of the final state, marked with t = -1.
  const double floor = mse_floor(ctx, ws);
  try {
    const Eigen::VectorXd sat = saturate_profile(run.profile, floor, spec.pin_width());
    for (int r = 0; r < gamma; ++r) os << -1 << "," << (r + 1) << "," << fmt17(sat[r]) << "\n";
  } catch (const std::invalid_argument& err) {
    std::cerr << "sc-profile: saturated profile unavailable: " << err.what() << "\n";
  }
  return 0;
}

int cmd_decode(const GlobalOptions& g, const std::string& channel_cfg, int B, double rate,
               int L, int n_seeds, int t_max, int gamma, int w, bool no_onsager) {
  const ChannelModel ch = ChannelModel::parse(channel_cfg);
  json cfg = g.to_json();
  cfg["channel"] = channel_cfg;
  cfg["b"] = B;
  cfg["rate"] = rate;
  cfg["l"] = L;
  cfg["seeds"] = n_seeds;
  cfg["t_max"] = t_max;
  cfg["onsager"] = !no_onsager;
  const bool coupled = gamma > 0;
  if (coupled) {
    cfg["gamma"] = gamma;
    cfg["w"] = w;
  }

  const CodeParams params = CodeParams::make(L, B, rate);
  std::optional<CouplingSpec> spec;
  if (coupled) {
    spec = build_coupling(gamma, w, rectangular_design(), rate);
    if (params.L % gamma != 0 || params.M % gamma != 0)
      throw std::invalid_argument("decode: Gamma must divide L and M");
  }
  EffectiveNoiseContext ctx(ch, rate, g.quad());
  SeWorkspace ws(SectionPrior::one_hot(B), g.se_options(B));

  // Reference state-evolution MSE, matched to the decoder's prior-mean
  // initialization (E^0 = 1 - 1/B). For the coupled ensemble the reference is
  // the per-sweep message-side MSE with the seed blocks counted as zero.
  std::vector<double> mse_se;
  if (!coupled) {
    mse_se = se_trajectory(ctx, ws, 1.0 - 1.0 / B, t_max);
  } else {
    mse_se.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
    Eigen::VectorXd prof = initial_profile(*spec);
    const int seed_blocks = 4 * w;
    auto message_mse = [&](const Eigen::VectorXd& e) {
      const Eigen::VectorXd var = effective_noise_per_block(*spec, ctx, e);
      double acc = 0.0;
      for (int c = seed_blocks; c < gamma - seed_blocks; ++c)
        acc += ws.mse(std::sqrt(var[c])).value;
      return acc / gamma;
    };
    mse_se[0] = (1.0 - 1.0 / B) * (gamma - 2 * seed_blocks) / gamma;
    for (int t = 1; t <= t_max; ++t) {
      mse_se[t] = message_mse(prof);
      prof = se_operator_c(*spec, ctx, ws, prof);
    }
  }

  Output out(g.out);
  std::ostream& os = out.stream();
  write_provenance(os, "decode", cfg);
  os << "seed,t,mse_empirical,mse_se,ser\n";
  GampOptions gopt;
  gopt.t_max = t_max;
  gopt.onsager = !no_onsager;
  gopt.quad = g.quad();
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng = Rng::from_stream(g.seed, 1000 + static_cast<std::uint64_t>(s));
    const Eigen::VectorXi msg = sample_message(params.L, params.B, rng);
    const Eigen::MatrixXd F =
        coupled ? sample_matrix(params, *spec, rng) : sample_matrix(params, rng);
    const Eigen::VectorXd x = encode(F, msg, params.B);
    const Eigen::VectorXd y = transmit(ch, x, rng);
    const GampResult res =
        gamp_decode(F, y, ch, params, msg, gopt, coupled ? &*spec : nullptr);
    for (std::size_t t = 0; t < res.mse.size(); ++t) {
      const double se_val = t < mse_se.size() ? mse_se[t] : mse_se.back();
      os << s << "," << t << "," << fmt17(res.mse[t]) << "," << fmt17(se_val) << ","
         << fmt17(res.ser[t]) << "\n";
    }
  }
  return 0;
}

int cmd_threshold_sat(const GlobalOptions& g, const std::string& channel_cfg, int B, int gamma,
                      int w, double rate_tol) {
  const ChannelModel ch = ChannelModel::parse(channel_cfg);
  json cfg = g.to_json();
  cfg["channel"] = channel_cfg;
  cfg["b"] = B;
  cfg["gamma"] = gamma;
  cfg["w"] = w;
  cfg["rate_tol"] = rate_tol;

  const SectionPrior prior = SectionPrior::one_hot(B);
  const SeOptions opt = g.se_options(B);
  const double cap = ch.capacity_closed_form();
  const ThresholdResult ru =
      threshold_gamp_u(ch, g.quad(), prior, opt, 0.25 * cap, cap, rate_tol);
  const ThresholdResult rpot =
      threshold_potential(ch, g.quad(), prior, opt, 0.5 * ru.rate, cap, rate_tol);
  const CoupledThresholdResult rc =
      threshold_gamp_c(gamma, w, rectangular_design(), "rectangular", ch, g.quad(), prior, opt,
                       0.5 * ru.rate, rpot.rate + 0.1, rate_tol);

  // Midpoint-rate demonstration: where the thresholds are separated, the
  // uncoupled recursion stalls while the coupled one reaches the floor.
  const double mid = 0.5 * (ru.rate + rpot.rate);
  EffectiveNoiseContext ctx(ch, mid, g.quad());
  SeWorkspace ws(prior, opt);
  const double floor = mse_floor(ctx, ws);
  const SeSolveResult from_one = se_fixed_point(ctx, ws, 1.0, floor + 5.0 * opt.tol);
  const CouplingSpec spec = build_coupling(gamma, w, rectangular_design(), mid);
  const CoupledResult coupled = coupled_fixed_point(spec, ctx, ws, floor + 10.0 * opt.tol);

  json report = {
      {"version", SSC_VERSION},
      {"config", cfg},
      {"r_u", ru.rate},
      {"r_pot", rpot.rate},
      {"r_c", rc.rate},
      {"gamma", gamma},
      {"w", w},
      {"rate_mid", mid},
      {"mid_floor", floor},
      {"mid_uncoupled_fixed_point", from_one.fixed_point},
      {"mid_uncoupled_stalls", from_one.fixed_point > floor + 10.0 * opt.tol},
      {"mid_coupled_max_e", coupled.profile.maxCoeff()},
      {"mid_coupled_reaches_floor", coupled.profile.maxCoeff() <= floor + 10.0 * opt.tol},
      {"ordering_r_u_le_r_c", ru.rate <= rc.rate + rate_tol},
      {"ordering_r_c_le_r_pot", rc.rate <= rpot.rate + 0.05},
  };
  Output out(g.out);
  out.stream() << report.dump(2) << "\n";
  return 0;
}

int cmd_selftest(const GlobalOptions& g) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, double value, double want, double tol) {
    std::printf("[%s] %-44s value=%.8g want=%.8g tol=%.1g\n", ok ? "ok" : "FAIL", name.c_str(),
                value, want, tol);
    if (!ok) ++failures;
  };
  auto close = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

  struct Ref { const char* cfg; double cap_tol; };
  for (const Ref& ref : {Ref{"awgn:snr=10", 1e-4}, Ref{"bsc:eps=0.1", 1e-6},
                         Ref{"bec:eps=0.5", 1e-6}, Ref{"z:eps=0.1,p1=0.5", 1e-6}}) {
    const ChannelModel ch = ChannelModel::parse(ref.cfg);
    EffectiveNoiseContext ctx(ch, 1.0, g.quad());
    const double cap = ch.capacity_closed_form();
    const double rpot = r_pot_infinity(ctx);
    check(std::string("capacity identity ") + ref.cfg, close(rpot, cap, ref.cap_tol), rpot, cap,
          ref.cap_tol);
    const double ru_cf = ch.gamp_threshold_closed_form();
    const double ru = r_u_infinity(ctx);
    check(std::string("gamp threshold identity ") + ref.cfg, close(ru, ru_cf, 1e-6), ru, ru_cf,
          1e-6);
    bool mono = true;
    double prev = -1.0;
    for (int i = 0; i <= 20; ++i) {
      const double v = ctx.effective_noise_var(i / 20.0);
      if (v < prev - 1e-12) mono = false;
      prev = v;
    }
    check(std::string("noise variance monotone ") + ref.cfg, mono, mono ? 1.0 : 0.0, 1.0, 0);
    double worst = 0.0;
    for (double E : {0.1, 0.5, 0.9}) worst = std::max(worst, ctx.quadrature_self_check(E));
    check(std::string("quadrature doubling ") + ref.cfg, worst < 1e-6, worst, 0.0, 1e-6);
  }

  // Generic smoothed-kernel path exercised through a custom Gaussian kernel.
  {
    const double nv = 0.1;
    const ChannelModel gen = ChannelModel::custom_continuous(
        [nv](double y, double u) { return normal_pdf(y, u, nv); }, -12.0, 12.0);
    EffectiveNoiseContext gctx(gen, 1.0, g.quad());
    double worst = 0.0;
    for (double E : {0.1, 0.5}) worst = std::max(worst, gctx.quadrature_self_check(E));
    check("quadrature doubling custom gaussian", worst < 1e-6, worst, 0.0, 1e-6);
    const double f = gctx.f_marginal(0.3, 0.3, 0.4);
    const double want = normal_pdf(0.3, 0.3, 0.5);
    check("custom kernel smoothing vs closed form", close(f, want, 1e-9), f, want, 1e-9);
  }

  // Double-entry check of the capacity-achieving Z-channel bias.
  {
    const double eps = 0.1;
    const double closed = z_channel_optimal_p1(eps);
    double lo = 0.5, hi = 0.999;
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
    double fc = -z_channel_capacity(eps, c), fd = -z_channel_capacity(eps, d);
    while (hi - lo > 1e-10) {
      if (fc < fd) {
        hi = d; d = c; fd = fc;
        c = hi - inv_phi * (hi - lo);
        fc = -z_channel_capacity(eps, c);
      } else {
        lo = c; c = d; fc = fd;
        d = lo + inv_phi * (hi - lo);
        fd = -z_channel_capacity(eps, d);
      }
    }
    const double searched = 0.5 * (lo + hi);
    check("z channel p1* double entry", close(closed, searched, 1e-6), searched, closed, 1e-6);
  }

  std::printf("%s (%d failure%s)\n", failures == 0 ? "selftest passed" : "selftest FAILED",
              failures, failures == 1 ? "" : "s");
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  json cfg;
  try {
    cfg = preload_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"sparse superposition codes: GAMP decoding, state evolution, potentials and "
               "spatial coupling"};
  app.require_subcommand(1);

  GlobalOptions g;
  from_config(cfg, "seed", g.seed);
  from_config(cfg, "mc_samples", g.mc_samples);
  from_config(cfg, "gh_order", g.gh_order);
  from_config(cfg, "y_tol", g.y_tol);
  from_config(cfg, "se_tol", g.se_tol);
  from_config(cfg, "max_iter", g.max_iter);
  from_config(cfg, "evaluator", g.evaluator);
  from_config(cfg, "out", g.out);
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--mc-samples", g.mc_samples, "Monte Carlo samples per expectation");
  app.add_option("--gh-order", g.gh_order, "Gauss-Hermite order");
  app.add_option("--y-tol", g.y_tol, "absolute tolerance of continuous-output integrals");
  app.add_option("--se-tol", g.se_tol, "state-evolution fixed point tolerance");
  app.add_option("--max-iter", g.max_iter, "state-evolution iteration cap");
  app.add_option("--evaluator", g.evaluator, "expectation evaluator: auto|mc|quad")
      ->check(CLI::IsMember({"auto", "mc", "quad"}));
  app.add_option("--out", g.out, "output file (stdout when omitted)");
  app.add_option("--config", g.config_path, "JSON file with option defaults");

  // potential-curve
  std::string pc_channel = cfg.value("channel", "");
  std::vector<double> pc_rates;
  from_config(cfg, "rates", pc_rates);
  int pc_b = cfg.value("b", 2);
  int pc_grid = cfg.value("grid", 401);
  bool pc_large_b = cfg.value("large_b", false);
  bool pc_unshifted = cfg.value("unshifted", false);
  CLI::App* pc = app.add_subcommand("potential-curve", "potential as a function of the MSE");
  pc->add_option("--channel", pc_channel, "channel config, e.g. bsc:eps=0.1");
  pc->add_option("--rates", pc_rates, "comma-separated rate list")->delimiter(',');
  pc->add_option("--b", pc_b, "section size for the finite-B potential");
  pc->add_option("--grid", pc_grid, "number of E grid points");
  pc->add_flag("--large-b", pc_large_b, "emit the large-alphabet potential");
  pc->add_flag("--unshifted", pc_unshifted, "do not shift the large-B potential to 0 at E=0");

  // thresholds
  std::string th_family = cfg.value("family", "");
  std::vector<double> th_params;
  std::vector<int> th_b;
  from_config(cfg, "params", th_params);
  from_config(cfg, "b_list", th_b);
  double th_rate_tol = cfg.value("rate_tol", 1e-4);
  CLI::App* th = app.add_subcommand("thresholds", "capacities and GAMP threshold limits");
  th->add_option("--channel-family", th_family, "awgn|bsc|bec|z");
  th->add_option("--params", th_params, "channel parameter sweep (snr or eps)")->delimiter(',');
  th->add_option("--b", th_b, "section sizes for finite-B thresholds")->delimiter(',');
  th->add_option("--rate-tol", th_rate_tol, "bisection tolerance in bits");

  // sc-profile
  std::string sc_channel = cfg.value("channel", "");
  int sc_b = cfg.value("b", 2);
  double sc_rate = cfg.value("rate", 0.0);
  int sc_gamma = cfg.value("gamma", 32);
  int sc_w = cfg.value("w", 2);
  int sc_tmax = cfg.value("t_max", 400);
  std::string sc_design = cfg.value("design", "rectangular");
  CLI::App* sc = app.add_subcommand("sc-profile", "coupled state-evolution profile trajectory");
  sc->add_option("--channel", sc_channel, "channel config");
  sc->add_option("--b", sc_b, "section size");
  sc->add_option("--rate", sc_rate, "design rate");
  sc->add_option("--gamma", sc_gamma, "number of blocks");
  sc->add_option("--w", sc_w, "coupling window");
  sc->add_option("--t-max", sc_tmax, "maximum sweeps");
  sc->add_option("--design", sc_design, "rectangular|tapered")
      ->check(CLI::IsMember({"rectangular", "tapered"}));

  // decode
  std::string de_channel = cfg.value("channel", "");
  int de_b = cfg.value("b", 2);
  double de_rate = cfg.value("rate", 0.0);
  int de_l = cfg.value("l", 1024);
  int de_seeds = cfg.value("seeds", 10);
  int de_tmax = cfg.value("t_max", 30);
  int de_gamma = cfg.value("gamma", 0);
  int de_w = cfg.value("w", 0);
  bool de_no_onsager = cfg.value("no_onsager", false);
  CLI::App* de = app.add_subcommand("decode", "GAMP decoding vs state evolution");
  de->add_option("--channel", de_channel, "channel config");
  de->add_option("--b", de_b, "section size");
  de->add_option("--rate", de_rate, "design rate");
  de->add_option("--l", de_l, "number of sections");
  de->add_option("--seeds", de_seeds, "number of independent runs");
  de->add_option("--t-max", de_tmax, "GAMP iterations");
  de->add_option("--gamma", de_gamma, "blocks (enables the coupled ensemble)");
  de->add_option("--w", de_w, "coupling window");
  de->add_flag("--no-onsager", de_no_onsager, "drop the Onsager correction (diagnostic)");

  // threshold-sat
  std::string ts_channel = cfg.value("channel", "");
  int ts_b = cfg.value("b", 2);
  int ts_gamma = cfg.value("gamma", 64);
  int ts_w = cfg.value("w", 3);
  double ts_rate_tol = cfg.value("rate_tol", 1e-3);
  CLI::App* ts = app.add_subcommand("threshold-sat", "thresholds of the coupled ensemble");
  ts->add_option("--channel", ts_channel, "channel config");
  ts->add_option("--b", ts_b, "section size");
  ts->add_option("--gamma", ts_gamma, "number of blocks");
  ts->add_option("--w", ts_w, "coupling window");
  ts->add_option("--rate-tol", ts_rate_tol, "bisection tolerance in bits");

  CLI::App* st = app.add_subcommand("selftest", "closed-form golden suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (pc->parsed())
      return cmd_potential_curve(g, pc_channel, pc_rates, pc_b, pc_grid, pc_large_b,
                                 pc_unshifted);
    if (th->parsed()) return cmd_thresholds(g, th_family, th_params, th_b, th_rate_tol);
    if (sc->parsed()) {
      if (!(sc_rate > 0.0)) throw std::invalid_argument("sc-profile: --rate required");
      return cmd_sc_profile(g, sc_channel, sc_b, sc_rate, sc_gamma, sc_w, sc_tmax, sc_design);
    }
    if (de->parsed()) {
      if (!(de_rate > 0.0)) throw std::invalid_argument("decode: --rate required");
      return cmd_decode(g, de_channel, de_b, de_rate, de_l, de_seeds, de_tmax, de_gamma, de_w,
                        de_no_onsager);
    }
    if (ts->parsed()) return cmd_threshold_sat(g, ts_channel, ts_b, ts_gamma, ts_w, ts_rate_tol);
    if (st->parsed()) return cmd_selftest(g);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
