#include "adrx/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "adrx/bpsk.hpp"
#include "adrx/channel.hpp"
#include "adrx/config.hpp"
#include "adrx/errors.hpp"
#include "adrx/experiment.hpp"
#include "adrx/gf256.hpp"
#include "adrx/mlp.hpp"
#include "adrx/reed_solomon.hpp"
#include "adrx/training.hpp"
#include "adrx/viterbinet.hpp"

namespace adrx::hx {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open output file: " + path);
  return os;
}

int do_run(const std::string& config_path, const CliOverrides& ov) {
  const ExperimentConfig cfg = load_config(config_path, ov);
  const double snr = cfg.snr_db.front();
  const std::uint64_t seed = cfg.seeds.front();
  const auto records = run_trial(cfg, cfg.regime, snr, seed);
  auto os = open_out(cfg.out);
  write_trial_csv(os, cfg.regime, snr, seed, records);
  const double final_ber = records.empty() ? 0.0 : records.back().cum_ber;
  std::cout << "wrote " << cfg.out << ": " << records.size() << " blocks, final coded BER "
            << final_ber << " (scenario " << to_string(cfg.scenario) << ", regime "
            << to_string(cfg.regime) << ", snr " << snr << " dB, seed " << seed << ")\n";
  return 0;
}

int do_sweep(const std::string& config_path, const CliOverrides& ov) {
  const ExperimentConfig cfg = load_config(config_path, ov);
  const auto rows = run_sweep(cfg);
  auto os = open_out(cfg.out);
  write_sweep_csv(os, rows);
  std::cout << "wrote " << cfg.out << ": " << rows.size() << " rows over "
            << (cfg.sweep_regimes.empty() ? 1 : cfg.sweep_regimes.size()) << " regime(s), "
            << cfg.snr_db.size() << " SNR point(s), " << cfg.seeds.size() << " seed(s)\n";
  return 0;
}

int do_fsweep(const std::string& config_path, const CliOverrides& ov,
              const std::vector<int>& f_values) {
  const ExperimentConfig cfg = load_config(config_path, ov);
  const auto rows = run_f_sweep(cfg, f_values);
  auto os = open_out(cfg.out);
  write_fsweep_csv(os, rows);
  std::cout << "wrote " << cfg.out << ": " << rows.size() << " rows over " << f_values.size()
            << " F value(s)\n";
  return 0;
}

int do_gen_taps(int L, int J, const std::string& out, bool iid, std::uint64_t seed) {
  if (L < 1 || J < 1) throw ConfigError("gen-taps: --L and --J must be positive");
  chan::TapProfile profile;
  if (iid) {
    Rng rng = Rng(seed).fork("taps");
    profile.taps.resize(L, J);
    for (int j = 0; j < J; ++j)
      for (int l = 0; l < L; ++l)
        profile.taps(l, j) = std::pow(0.8, l) *
                             (0.8 + 0.2 * std::cos(6.283185307179586 * rng.uniform()));
  } else {
    std::vector<chan::TapSpec> spec(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l)
      spec[static_cast<std::size_t>(l)] = {std::pow(0.8, l), std::max(8.0, 44.0 - 6.0 * l),
                                           0.9 * l};
    profile = chan::synth_tap_profile(spec, J);
  }
  chan::save_tap_trace(out, profile);
  std::cout << "wrote " << out << ": " << L << "x" << J << (iid ? " iid" : " structured")
            << " tap trace\n";
  return 0;
}

// --- selftest: quick independent oracles for the numeric cores ---

bool report(const char* name, bool ok) {
  std::cout << "selftest " << name << ": " << (ok ? "ok" : "FAIL") << "\n";
  return ok;
}

bool selftest_gf256() {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto a = static_cast<std::uint8_t>(rng.uniform_int(256));
    const auto b = static_cast<std::uint8_t>(rng.uniform_int(256));
    const auto c = static_cast<std::uint8_t>(rng.uniform_int(256));
    if (fec::gf_mul(a, b) != fec::gf_mul(b, a)) return false;
    if (fec::gf_mul(a, fec::gf_mul(b, c)) != fec::gf_mul(fec::gf_mul(a, b), c)) return false;
    if (fec::gf_mul(a, static_cast<std::uint8_t>(b ^ c)) !=
        (fec::gf_mul(a, b) ^ fec::gf_mul(a, c)))
      return false;
    if (a != 0 && fec::gf_mul(a, fec::gf_inv(a)) != 1) return false;
  }
  return true;
}

bool selftest_rs() {
  Rng rng(11);
  for (const fec::RsParams p : {fec::RsParams{17, 15}, fec::RsParams{19, 15}}) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::uint8_t> msg(static_cast<std::size_t>(p.k));
      for (auto& m : msg) m = static_cast<std::uint8_t>(rng.uniform_int(256));
      auto cw = fec::rs_encode(msg, p);
      const int nerr = static_cast<int>(rng.uniform_int(p.t() + 1));
      for (int e = 0; e < nerr; ++e) {
        const auto pos = static_cast<std::size_t>(rng.uniform_int(p.n));
        cw[pos] ^= static_cast<std::uint8_t>(1 + rng.uniform_int(255));
      }
      const auto dec = fec::rs_decode(cw, p);
      if (!dec || dec->msg != msg) return false;
    }
  }
  return true;
}

bool selftest_gradient() {
  const nn::MlpSpec spec{{2, 5, 3}, {nn::Act::sigmoid}};
  Rng rng(23);
  const nn::ParamVector params = nn::mlp_init(spec, rng);
  nn::LabeledBatch batch;
  batch.inputs.resize(2, 6);
  batch.labels.resize(6);
  for (int i = 0; i < 6; ++i) {
    batch.inputs(0, i) = rng.normal();
    batch.inputs(1, i) = rng.normal();
    batch.labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(3));
  }
  nn::ParamVector grad;
  nn::loss_and_grad(spec, params, batch, grad);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < params.size(); i += 7) {
    nn::ParamVector p = params;
    p[i] += h;
    const double up = nn::loss_value(spec, p, batch);
    p[i] -= 2 * h;
    const double dn = nn::loss_value(spec, p, batch);
    if (std::abs((up - dn) / (2 * h) - grad[i]) > 1e-4) return false;
  }
  return true;
}

bool selftest_viterbi() {
  Rng rng(31);
  const Eigen::VectorXd h = (Eigen::VectorXd(3) << 1.0, 0.5, 0.3).finished();
  const vnet::Trellis trellis{3};
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::RowVectorXd s(40);
    for (int i = 0; i < 40; ++i) s[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
    chan::ChannelConfig ccfg{0.05, chan::Nonlinearity::none, 0.5};
    const Eigen::RowVectorXd y = chan::siso_transmit(s, h, ccfg, rng);
    const Eigen::RowVectorXd det =
        vnet::viterbi_detect(vnet::true_loglik_table(h, ccfg.sigma, y), trellis);
    if ((det - s).cwiseAbs().maxCoeff() > 0.0) return false;
  }
  return true;
}

// Scalar quadratic pair with known adapted-loss gradient: support pulls
// toward 1, query toward 2; from 0 with inner step 0.1 the exact meta
// gradient is -1.71 and the first-order one -1.9.
bool selftest_meta_gradient() {
  const auto scalar_task = [](double target) {
    return [target]() -> nn::GradFn {
      return [target](const nn::ParamVector& p, nn::ParamVector& g) {
        g.resize(1);
        g[0] = p[0] - target;
        return 0.5 * (p[0] - target) * (p[0] - target);
      };
    };
  };
  train::MetaTask task{scalar_task(1.0), scalar_task(2.0)};
  train::TrainConfig cfg;
  cfg.eta = 0.1;
  cfg.kappa = 1.0;
  cfg.i_meta = 1;
  cfg.optimizer = train::Optimizer::sgd;
  nn::ParamVector theta0 = nn::ParamVector::Zero(1);

  cfg.meta_mode = train::MetaMode::exact_hvp;
  cfg.hvp_step = 1e-4;
  const double exact = train::meta_inner_loop(theta0, task, cfg)[0];
  cfg.meta_mode = train::MetaMode::first_order;
  const double first = train::meta_inner_loop(theta0, task, cfg)[0];
  return std::abs(exact - 1.71) < 1e-9 && std::abs(first - 1.9) < 1e-12;
}

int do_selftest() {
  bool ok = true;
  ok &= report("gf256 field axioms", selftest_gf256());
  ok &= report("reed-solomon round trip", selftest_rs());
  ok &= report("classifier gradient", selftest_gradient());
  ok &= report("trellis detection", selftest_viterbi());
  ok &= report("meta gradient oracle", selftest_meta_gradient());
  if (!ok) throw std::runtime_error("selftest failed");
  std::cout << "selftest: all ok\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Link-level simulator for online-adaptive deep receivers"};
  app.require_subcommand(1);

  std::string config_path, out_override, regime_override, trace_override;
  std::uint64_t seed_override = 0;
  double snr_override = 0.0;

  const auto add_common = [&](CLI::App* cmd, bool with_trial_overrides) {
    cmd->add_option("--config", config_path, "configuration file")->required();
    cmd->add_option("--out", out_override, "output CSV path (overrides experiment.out)");
    if (with_trial_overrides) {
      cmd->add_option("--seed", seed_override, "run only this seed");
      cmd->add_option("--snr", snr_override, "run only this SNR (dB)");
      cmd->add_option("--regime", regime_override, "override the training regime");
      cmd->add_option("--trace", trace_override,
                      "tap-trace CSV (switches the scenario to its trace variant)");
    }
  };

  CLI::App* run = app.add_subcommand("run", "run one trial and write the per-block CSV");
  add_common(run, true);

  CLI::App* sweep =
      app.add_subcommand("sweep", "run every (regime, snr, seed) and write final BERs");
  add_common(sweep, false);

  CLI::App* fsweep =
      app.add_subcommand("fsweep", "sweep the meta-update period F at fixed SNR");
  add_common(fsweep, false);
  std::vector<int> f_values{5, 10, 15, 25, 50};
  fsweep->add_option("--F", f_values, "meta-update periods to sweep")
      ->delimiter(',')
      ->expected(-1);

  CLI::App* gen = app.add_subcommand("gen-taps", "emit a synthetic tap-trace CSV");
  int gen_L = 4, gen_J = 300;
  std::string gen_out = "taps.csv";
  bool gen_iid = false;
  std::uint64_t gen_seed = 1;
  gen->add_option("--L", gen_L, "number of taps (rows)");
  gen->add_option("--J", gen_J, "number of blocks (columns)");
  gen->add_option("--out", gen_out, "output CSV path");
  gen->add_flag("--iid", gen_iid, "independent per-block draws instead of oscillations");
  gen->add_option("--seed", gen_seed, "seed for --iid draws");

  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto overrides = [&](CLI::App* cmd) {
    CliOverrides ov;
    const auto given = [&](const char* name) {
      const CLI::Option* opt = cmd->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--out")) ov.out = out_override;
    if (given("--seed")) ov.seed = seed_override;
    if (given("--snr")) ov.snr = snr_override;
    if (given("--regime")) ov.regime = regime_override;
    if (given("--trace")) ov.trace = trace_override;
    return ov;
  };

  try {
    if (run->parsed()) return do_run(config_path, overrides(run));
    if (sweep->parsed()) return do_sweep(config_path, overrides(sweep));
    if (fsweep->parsed()) return do_fsweep(config_path, overrides(fsweep), f_values);
    if (gen->parsed()) return do_gen_taps(gen_L, gen_J, gen_out, gen_iid, gen_seed);
    if (selftest->parsed()) return do_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace adrx::hx
