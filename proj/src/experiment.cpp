#include "adrx/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "adrx/bpsk.hpp"
#include "adrx/deepsic.hpp"
#include "adrx/errors.hpp"
#include "adrx/gate.hpp"
#include "adrx/modular.hpp"
#include "adrx/viterbinet.hpp"

namespace adrx::hx {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::siso_linear: return "siso_linear";
    case Scenario::siso_tanh: return "siso_tanh";
    case Scenario::siso_trace: return "siso_trace";
    case Scenario::mimo_linear: return "mimo_linear";
    case Scenario::mimo_tanh: return "mimo_tanh";
    case Scenario::mimo_trace: return "mimo_trace";
    case Scenario::mimo_modular: return "mimo_modular";
  }
  return "?";
}

const char* to_string(Receiver r) {
  switch (r) {
    case Receiver::viterbinet: return "viterbinet";
    case Receiver::viterbi_csi: return "viterbi_csi";
    case Receiver::deepsic: return "deepsic";
  }
  return "?";
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::joint: return "joint";
    case Regime::online: return "online";
    case Regime::meta: return "meta";
    case Regime::modular_meta: return "modular_meta";
  }
  return "?";
}

bool ExperimentConfig::is_siso() const {
  return scenario == Scenario::siso_linear || scenario == Scenario::siso_tanh ||
         scenario == Scenario::siso_trace;
}

namespace {

InitialHyper resolved_initial_hyper(const ExperimentConfig& cfg) {
  if (cfg.initial_hyper != InitialHyper::auto_pick) return cfg.initial_hyper;
  return cfg.receiver == Receiver::deepsic ? InitialHyper::copy : InitialHyper::meta;
}

bool uses_tanh(Scenario s) {
  return s == Scenario::siso_tanh || s == Scenario::mimo_tanh;
}

void validate_regime_compat(const ExperimentConfig& cfg, Regime regime, const char* field) {
  if (regime == Regime::modular_meta && cfg.receiver != Receiver::deepsic)
    throw ConfigError(std::string(field) +
                      ": modular_meta applies to the deepsic receiver only");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!rs.valid()) throw ConfigError("code.n/code.k: need 0 < k < n <= 255 with n - k even >= 2");
  if (t_pilot < 1) throw ConfigError("experiment.t_pilot: need at least one pilot block");
  if (t_data < 0) throw ConfigError("experiment.t_data: must be non-negative");
  if (snr_db.empty()) throw ConfigError("experiment.snr_db: need at least one value");
  if (seeds.empty()) throw ConfigError("experiment.seeds: need at least one seed");
  const bool siso = is_siso();
  if (siso && receiver == Receiver::deepsic)
    throw ConfigError("experiment.receiver: deepsic requires a mimo_* scenario");
  if (!siso && receiver != Receiver::deepsic)
    throw ConfigError("experiment.receiver: " + std::string(hx::to_string(receiver)) +
                      " requires a siso_* scenario");
  validate_regime_compat(*this, regime, "experiment.regime");
  for (Regime r : sweep_regimes) validate_regime_compat(*this, r, "experiment.regimes");
  if (memory < 1 || memory > 10)
    throw ConfigError("channel.memory: supported range is 1..10");
  if (users < 1 || antennas < 1)
    throw ConfigError("channel.users/channel.antennas: must be positive");
  if (users > 1 && sic_iterations < 1)
    throw ConfigError("receiver.sic_iterations: must be positive");
  if (mobile_user < 1 || mobile_user > users)
    throw ConfigError("channel.mobile_user: must be in 1..users");
  if ((scenario == Scenario::siso_trace || scenario == Scenario::mimo_trace) && trace_path.empty())
    throw ConfigError("channel.trace: trace scenarios need a tap-trace file");
  if (train.eta <= 0.0) throw ConfigError("train.eta: must be positive");
  if (train.kappa < 0.0) throw ConfigError("train.kappa: must be non-negative");
  if (train.i_sgd < 0 || train.i_meta < 0)
    throw ConfigError("train.i_sgd/train.i_meta: must be non-negative");
  if (train.meta_frequency < 1) throw ConfigError("train.meta_frequency: must be >= 1");
  if (train.gate_threshold < 0.0 || train.gate_threshold > 1.0)
    throw ConfigError("train.gate_threshold: must lie in [0, 1]");
  if (train.batch_size < 1) throw ConfigError("train.batch_size: must be positive");
  if (train.buffer_capacity < 2)
    throw ConfigError("train.buffer_capacity: need room for a support/query pair");
  if (train.meta_pair_draws < 1) throw ConfigError("train.meta_pair_draws: must be >= 1");
  if (train.init_sweeps < 1) throw ConfigError("train.init_sweeps: must be >= 1");
  if (train.hvp_step <= 0.0) throw ConfigError("train.hvp_step: must be positive");
  const bool meta_regime =
      regime == Regime::meta || regime == Regime::modular_meta ||
      std::any_of(sweep_regimes.begin(), sweep_regimes.end(),
                  [](Regime r) { return r == Regime::meta || r == Regime::modular_meta; });
  if (meta_regime && resolved_initial_hyper(*this) == InitialHyper::meta && t_pilot < 2)
    throw ConfigError("experiment.t_pilot: meta-training the initialization needs >= 2 pilots");
}

namespace {

namespace fec = adrx::fec;
namespace chan = adrx::chan;
namespace nn = adrx::nn;
namespace vnet = adrx::vnet;
namespace ds = adrx::ds;
namespace train = adrx::train;

struct Payload {
  std::vector<std::uint8_t> info_bits;  // 8k
  std::vector<std::uint8_t> code_bits;  // 8n
};

Payload draw_payload(const fec::RsParams& rs, Rng& rng) {
  std::vector<std::uint8_t> msg(static_cast<std::size_t>(rs.k));
  for (auto& m : msg) m = static_cast<std::uint8_t>(rng.uniform_int(256));
  Payload p;
  p.info_bits = fec::symbols_to_bits(msg);
  p.code_bits = fec::symbols_to_bits(fec::rs_encode(msg, rs));
  return p;
}

Eigen::RowVectorXd modulate(const std::vector<std::uint8_t>& code_bits) {
  const std::vector<double> sym = fec::bits_to_bpsk(code_bits);
  return Eigen::Map<const Eigen::RowVectorXd>(sym.data(),
                                              static_cast<Eigen::Index>(sym.size()));
}

// Default fading layouts: distinct per-tap (per-user) periods with decaying
// amplitudes; the data phase switches to a second period set, phase-shifted so
// the profile stays continuous at the boundary.
double default_train_period(int l) { return std::max(8.0, 52.0 - 6.0 * l); }
double default_test_period(int l) { return std::max(8.0, 44.0 - 6.0 * l); }
double default_user_period(int k) { return std::max(8.0, 40.0 - 7.0 * k); }
constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::MatrixXd siso_tap_schedule(const ExperimentConfig& cfg, int T, Rng& rng_taps) {
  const int L = cfg.memory;
  if (cfg.scenario == Scenario::siso_trace) {
    const chan::TapProfile profile = chan::load_tap_trace(cfg.trace_path);
    if (profile.L() != L)
      throw ConfigError("channel.trace: trace has " + std::to_string(profile.L()) +
                        " taps, channel.memory is " + std::to_string(L));
    if (profile.J() < T)
      throw ConfigError("channel.trace: trace covers " + std::to_string(profile.J()) +
                        " blocks, need t_pilot + t_data = " + std::to_string(T));
    return profile.taps.leftCols(T);
  }
  Eigen::MatrixXd taps(L, T);
  if (cfg.iid_variation) {
    // Unstructured control: per-tap modulation redrawn independently every
    // block, so there is nothing to predict from past blocks. The spread is
    // half the structured depth, keeping per-block fits serviceable for
    // trackers of either kind — the comparison isolates predictive structure
    // rather than raw robustness to violent per-block novelty.
    for (int j = 0; j < T; ++j)
      for (int l = 0; l < L; ++l)
        taps(l, j) =
            std::pow(0.8, l) * (0.8 + 0.1 * std::cos(kTwoPi * rng_taps.uniform()));
    return taps;
  }
  // Pilot phase: stationary oscillations. Data phase: the oscillation speeds
  // up and each tap's center drifts in an alternating direction, so the tap
  // ratios — the intersymbol-interference geometry — leave the range the
  // pilot phase ever produced while the overall gain stays comparable. A
  // receiver frozen after the pilots faces a genuinely novel channel shape;
  // trackers follow the drift. Both phases agree at the boundary block.
  for (int l = 0; l < L; ++l) {
    const double a = std::pow(0.8, l);
    const double pa = default_train_period(l), pb = default_test_period(l);
    const double psi = 0.9 * l;
    const double psi_data = psi + kTwoPi * cfg.t_pilot * (1.0 / pa - 1.0 / pb);
    const double drift = (l % 2 == 0) ? 0.12 : -0.18;
    for (int j = 0; j < T; ++j) {
      if (j < cfg.t_pilot) {
        taps(l, j) = a * (0.8 + 0.2 * std::cos(kTwoPi * j / pa + psi));
      } else {
        const double t = cfg.t_data > 1
                             ? static_cast<double>(j - cfg.t_pilot) / (cfg.t_data - 1)
                             : 0.0;
        taps(l, j) = a * (0.8 + drift * t + 0.2 * std::cos(kTwoPi * j / pb + psi_data));
      }
    }
  }
  return taps;
}

std::vector<Eigen::MatrixXd> mimo_channel_schedule(const ExperimentConfig& cfg, int T,
                                                   Rng& rng_taps) {
  const int N = cfg.antennas, K = cfg.users;
  std::vector<Eigen::MatrixXd> schedule;
  schedule.reserve(static_cast<std::size_t>(T));
  if (cfg.scenario == Scenario::mimo_trace) {
    const chan::TapProfile profile = chan::load_tap_trace(cfg.trace_path);
    if (profile.L() != N * K)
      throw ConfigError("channel.trace: mimo trace needs antennas*users = " +
                        std::to_string(N * K) + " rows, got " + std::to_string(profile.L()));
    if (profile.J() < T)
      throw ConfigError("channel.trace: trace covers " + std::to_string(profile.J()) +
                        " blocks, need t_pilot + t_data = " + std::to_string(T));
    for (int j = 0; j < T; ++j) {
      Eigen::MatrixXd H(N, K);
      for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) H(n, k) = profile.taps(k * N + n, j);
      schedule.push_back(std::move(H));
    }
    return schedule;
  }
  // Per-user gain oscillations; during the data phase each user's center
  // drifts in an alternating direction (continuous at the boundary), so the
  // user-gain ratios leave the pilot-phase range while trackers follow.
  const Eigen::MatrixXd H0 = chan::exp_decay_matrix(N, K).H;
  const int k_mobile = cfg.mobile_user - 1;
  for (int j = 0; j < T; ++j) {
    Eigen::MatrixXd H = H0;
    const double t = (j >= cfg.t_pilot && cfg.t_data > 1)
                         ? static_cast<double>(j - cfg.t_pilot) / (cfg.t_data - 1)
                         : 0.0;
    for (int k = 0; k < K; ++k) {
      if (cfg.scenario == Scenario::mimo_modular && k != k_mobile) continue;
      // The mobile-user study models one user moving within an otherwise
      // stable cell: pure oscillation, no secular drift.
      const double drift =
          cfg.scenario == Scenario::mimo_modular ? 0.0 : (k % 2 == 0) ? 0.12 : -0.18;
      const double c =
          cfg.iid_variation
              ? 0.8 + 0.2 * std::cos(kTwoPi * rng_taps.uniform())
              : 0.8 + drift * t + 0.2 * std::cos(kTwoPi * j / default_user_period(k) + 1.1 * k);
      H.col(k) *= c;
    }
    schedule.push_back(std::move(H));
  }
  return schedule;
}

long hamming(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b,
             std::size_t count) {
  long d = 0;
  for (std::size_t i = 0; i < count; ++i) d += a[i] != b[i];
  return d;
}

// Decode the detected symbols of one user: information-bit errors (decoded
// message when decoding succeeds, hard-demodulated systematic bits otherwise)
// plus the self-supervision gate verdict.
struct UserOutcome {
  long bit_errors = 0;
  fec::GateResult gate;
};

UserOutcome process_user(const Eigen::RowVectorXd& detected, const fec::RsParams& rs,
                         const std::vector<std::uint8_t>& info_bits, double eps) {
  const std::vector<double> det(detected.data(), detected.data() + detected.size());
  const std::vector<std::uint8_t> hard = fec::bpsk_hard(det);
  UserOutcome out;
  const auto dec = fec::rs_decode(fec::bits_to_symbols(hard), rs);
  if (dec) {
    out.bit_errors = hamming(fec::symbols_to_bits(dec->msg), info_bits, info_bits.size());
  } else {
    out.bit_errors = hamming(hard, info_bits, info_bits.size());
  }
  out.gate = fec::self_supervision_gate(det, rs, hard, eps);
  return out;
}

struct TrialRngs {
  Rng payload, noise, taps, init, train, meta;

  explicit TrialRngs(std::uint64_t seed)
      : payload(Rng(seed).fork("payload")),
        noise(Rng(seed).fork("noise")),
        taps(Rng(seed).fork("taps")),
        init(Rng(seed).fork("init")),
        train(Rng(seed).fork("train")),
        meta(Rng(seed).fork("meta")) {}
};

std::vector<BlockRecord> run_siso_trial(const ExperimentConfig& cfg, Regime regime, double snr_db,
                                        std::uint64_t seed, const TrialObserver* obs) {
  TrialRngs rngs(seed);
  const int L = cfg.memory, T_p = cfg.t_pilot, T = cfg.t_pilot + cfg.t_data;
  const fec::RsParams rs = cfg.rs;
  const chan::ChannelConfig ccfg{chan::snr_to_sigma(snr_db),
                                 uses_tanh(cfg.scenario) ? chan::Nonlinearity::tanh_scaled
                                                         : chan::Nonlinearity::none,
                                 0.5};
  const Eigen::MatrixXd taps = siso_tap_schedule(cfg, T, rngs.taps);

  const vnet::Trellis trellis{L};
  const nn::MlpSpec spec = vnet::equalizer_spec(L);
  const bool learned = cfg.receiver == Receiver::viterbinet;
  const bool trains = learned && regime != Regime::joint;
  const bool uses_meta = learned && regime == Regime::meta;

  nn::ParamVector phi;
  if (learned) phi = nn::mlp_init(spec, rngs.init);
  nn::ParamVector theta;  // hyperparameters, born at the pilot/data boundary
  train::PairBuffer buf(cfg.train.buffer_capacity);
  std::vector<Block> pilots;
  const train::BatchBuilder builder = [L](const Block& b) {
    return vnet::training_batch(b.s.row(0), b.y.row(0), L);
  };

  std::vector<BlockRecord> records;
  records.reserve(static_cast<std::size_t>(T));
  long cum_err = 0, cum_bits = 0;
  for (long j = 0; j < T; ++j) {
    const bool pilot = j < T_p;
    const Eigen::VectorXd h = taps.col(j);
    const Payload pl = draw_payload(rs, rngs.payload);
    const Eigen::RowVectorXd s = modulate(pl.code_bits);
    const Eigen::RowVectorXd y = chan::siso_transmit(s, h, ccfg, rngs.noise);

    BlockRecord rec;
    rec.block_index = j;
    rec.is_pilot = pilot;
    if (pilot) {
      rec.gate_valid = true;
      const Block blk{j, s, y};
      if (learned) pilots.push_back(blk);
      if (uses_meta) buf.push(blk);
      if (trains) {
        phi = train::online_train(spec, phi, blk, builder, cfg.train, rngs.train);
        rec.grad_steps += cfg.train.i_sgd;
      }
      if (j == T_p - 1 && learned) {
        if (regime == Regime::joint) {
          const int iters = cfg.train.i_sgd * T_p;
          phi = train::joint_train(spec, phi, pilots, builder, cfg.train, iters, rngs.train);
          rec.grad_steps += iters;
        } else if (uses_meta) {
          if (resolved_initial_hyper(cfg) == InitialHyper::meta) {
            theta = train::meta_train_initial(spec, pilots, builder, cfg.train, rngs.meta);
            rec.grad_steps += static_cast<long>(cfg.train.i_meta) * (T_p - 1) *
                              cfg.train.init_sweeps;
          } else {
            theta = phi;
          }
        }
      }
    } else {
      const vnet::LoglikTable table = learned ? vnet::nn_loglik_table(spec, phi, y)
                                              : vnet::true_loglik_table(h, ccfg.sigma, y);
      const Eigen::RowVectorXd detected = vnet::viterbi_detect(table, trellis);
      const UserOutcome out = process_user(detected, rs, pl.info_bits, cfg.train.gate_threshold);
      rec.bit_errors = out.bit_errors;
      rec.gate_valid = out.gate.valid;
      cum_err += out.bit_errors;
      cum_bits += 8 * rs.k;

      if (trains) {
        std::optional<Block> blk;
        if (out.gate.valid) {
          const Eigen::RowVectorXd labels = Eigen::Map<const Eigen::RowVectorXd>(
              out.gate.reencoded_symbols->data(), s.size());
          blk = Block{j, labels, y};
          if (uses_meta) buf.push(*blk);
        }
        if (uses_meta && j % cfg.train.meta_frequency == 0) {
          int pairs = 0;
          theta = train::meta_update(spec, theta, buf, builder, cfg.train, rngs.meta, &pairs);
          rec.grad_steps += static_cast<long>(cfg.train.i_meta) * pairs;
        }
        if (blk) {
          phi = train::online_train(spec, uses_meta ? theta : phi, *blk, builder, cfg.train,
                                    rngs.train);
          rec.grad_steps += cfg.train.i_sgd;
        }
        if (uses_meta && cfg.theta_fallback == ThetaFallback::chain) theta = phi;
      }
    }
    rec.cum_ber = cum_bits ? static_cast<double>(cum_err) / static_cast<double>(cum_bits) : 0.0;
    records.push_back(rec);
    if (obs && obs->on_siso_block) obs->on_siso_block(j, phi);
  }
  return records;
}

std::vector<BlockRecord> run_mimo_trial(const ExperimentConfig& cfg, Regime regime, double snr_db,
                                        std::uint64_t seed, const TrialObserver* obs) {
  TrialRngs rngs(seed);
  const int K = cfg.users, Q = cfg.sic_iterations, T_p = cfg.t_pilot;
  const int T = cfg.t_pilot + cfg.t_data;
  const fec::RsParams rs = cfg.rs;
  const int B = cfg.B();
  const chan::ChannelConfig ccfg{chan::snr_to_sigma(snr_db),
                                 uses_tanh(cfg.scenario) ? chan::Nonlinearity::tanh_scaled
                                                         : chan::Nonlinearity::none,
                                 0.5};
  const std::vector<Eigen::MatrixXd> schedule = mimo_channel_schedule(cfg, T, rngs.taps);

  ds::DeepSicNet net = ds::make_deepsic(K, Q, cfg.antennas, rngs.init);
  train::ModularHyper hyper;
  const bool uses_meta = regime == Regime::meta || regime == Regime::modular_meta;
  const std::vector<ds::ModuleId> dynamic = regime == Regime::modular_meta
                                                ? ds::dynamic_module_set(cfg.mobile_user - 1, K, Q)
                                                : ds::all_modules(K, Q);
  train::PairBuffer buf(cfg.train.buffer_capacity);
  std::vector<Block> pilots;

  std::vector<BlockRecord> records;
  records.reserve(static_cast<std::size_t>(T));
  long cum_err = 0, cum_bits = 0;
  for (long j = 0; j < T; ++j) {
    const bool pilot = j < T_p;
    std::vector<Payload> pls(static_cast<std::size_t>(K));
    Eigen::MatrixXd S(K, B);
    for (int k = 0; k < K; ++k) {
      pls[static_cast<std::size_t>(k)] = draw_payload(rs, rngs.payload);
      S.row(k) = modulate(pls[static_cast<std::size_t>(k)].code_bits);
    }
    const Eigen::MatrixXd Y =
        chan::mimo_transmit(S, chan::MimoChannelSpec{schedule[static_cast<std::size_t>(j)]},
                            ccfg, rngs.noise);

    BlockRecord rec;
    rec.block_index = j;
    rec.is_pilot = pilot;
    if (pilot) {
      rec.gate_valid = true;
      const Block blk{j, S, Y};
      pilots.push_back(blk);
      if (uses_meta) buf.push(blk);
      if (regime != Regime::joint) {
        train::deepsic_online_train(net, blk, cfg.train, rngs.train);
        rec.grad_steps += cfg.train.i_sgd;
      }
      if (j == T_p - 1) {
        if (regime == Regime::joint) {
          const int iters = cfg.train.i_sgd * T_p;
          train::deepsic_joint_train(net, pilots, iters, cfg.train, rngs.train);
          rec.grad_steps += iters;
        } else if (uses_meta) {
          if (resolved_initial_hyper(cfg) == InitialHyper::meta) {
            hyper = train::modular_meta_train_initial(net, pilots, dynamic, cfg.train, rngs.meta);
            rec.grad_steps += static_cast<long>(cfg.train.i_meta) * (T_p - 1) *
                              cfg.train.init_sweeps;
          } else {
            hyper = train::ModularHyper::from_net(net);
          }
        }
      }
    } else {
      const ds::ForwardResult fr = ds::deepsic_forward(net, Y);
      bool all_valid = true;
      Eigen::MatrixXd labels(K, B);
      for (int k = 0; k < K; ++k) {
        const UserOutcome out = process_user(fr.hard.row(k), rs,
                                             pls[static_cast<std::size_t>(k)].info_bits,
                                             cfg.train.gate_threshold);
        rec.bit_errors += out.bit_errors;
        cum_err += out.bit_errors;
        if (out.gate.valid) {
          labels.row(k) = Eigen::Map<const Eigen::RowVectorXd>(
              out.gate.reencoded_symbols->data(), B);
        } else {
          all_valid = false;
        }
      }
      cum_bits += static_cast<long>(K) * 8 * rs.k;
      rec.gate_valid = all_valid;

      if (regime != Regime::joint) {
        std::optional<Block> blk;
        if (all_valid) {
          blk = Block{j, labels, Y};
          if (uses_meta) buf.push(*blk);
        }
        if (uses_meta && j % cfg.train.meta_frequency == 0) {
          int pairs = 0;
          train::modular_meta_update(hyper, buf, net, dynamic, cfg.train, rngs.meta, &pairs);
          rec.grad_steps += static_cast<long>(cfg.train.i_meta) * pairs;
        }
        if (blk) {
          if (uses_meta) {
            train::modular_online_train(net, hyper, *blk, dynamic, cfg.train, rngs.train);
          } else {
            train::deepsic_online_train(net, *blk, cfg.train, rngs.train);
          }
          rec.grad_steps += cfg.train.i_sgd;
        }
        if (uses_meta && cfg.theta_fallback == ThetaFallback::chain)
          hyper = train::ModularHyper::from_net(net);
      }
    }
    rec.cum_ber = cum_bits ? static_cast<double>(cum_err) / static_cast<double>(cum_bits) : 0.0;
    records.push_back(rec);
    if (obs && obs->on_mimo_block) obs->on_mimo_block(j, net);
  }
  return records;
}

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Runs fn(0..jobs-1) on up to worker_count(jobs) threads; rethrows the first
// worker exception after all threads join.
void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const int workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

int worker_count(std::size_t jobs) {
  int w = 0;
  if (const char* env = std::getenv("ADRX_WORKERS")) w = std::atoi(env);
  if (w < 1) w = static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  if (jobs > 0 && static_cast<std::size_t>(w) > jobs) w = static_cast<int>(jobs);
  return w;
}

std::vector<BlockRecord> run_trial(const ExperimentConfig& cfg, Regime regime, double snr_db,
                                   std::uint64_t seed, const TrialObserver* observer) {
  cfg.validate();
  validate_regime_compat(cfg, regime, "experiment.regime");
  return cfg.is_siso() ? run_siso_trial(cfg, regime, snr_db, seed, observer)
                       : run_mimo_trial(cfg, regime, snr_db, seed, observer);
}

std::vector<BlockRecord> run_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  return run_trial(cfg, cfg.regime, cfg.snr_db.front(), seed);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<Regime> regimes =
      cfg.sweep_regimes.empty() ? std::vector<Regime>{cfg.regime} : cfg.sweep_regimes;
  struct Job {
    Regime regime;
    double snr;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (Regime r : regimes)
    for (double snr : cfg.snr_db)
      for (std::uint64_t seed : cfg.seeds) jobs.push_back({r, snr, seed});
  std::vector<double> finals(jobs.size(), 0.0);
  parallel_for(jobs.size(), [&](std::size_t i) {
    const auto records = run_trial(cfg, jobs[i].regime, jobs[i].snr, jobs[i].seed);
    finals[i] = records.empty() ? 0.0 : records.back().cum_ber;
  });
  std::vector<SweepRow> rows;
  std::size_t i = 0;
  for (Regime r : regimes) {
    for (double snr : cfg.snr_db) {
      double mean = 0.0;
      for (std::uint64_t seed : cfg.seeds) {
        rows.push_back({r, snr, static_cast<long>(seed), finals[i]});
        mean += finals[i];
        ++i;
      }
      mean /= static_cast<double>(cfg.seeds.size());
      rows.push_back({r, snr, -1, mean});
    }
  }
  return rows;
}

std::vector<FsweepRow> run_f_sweep(const ExperimentConfig& cfg, std::vector<int> f_values) {
  cfg.validate();
  if (cfg.regime != Regime::meta && cfg.regime != Regime::modular_meta)
    throw ConfigError("experiment.regime: the F sweep requires a meta regime");
  if (f_values.empty()) throw ConfigError("fsweep: need at least one F value");
  for (int f : f_values)
    if (f < 1) throw ConfigError("fsweep: F values must be >= 1");
  std::sort(f_values.begin(), f_values.end());
  f_values.erase(std::unique(f_values.begin(), f_values.end()), f_values.end());
  const double snr = cfg.snr_db.front();
  struct Job {
    int F;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int f : f_values)
    for (std::uint64_t seed : cfg.seeds) jobs.push_back({f, seed});
  std::vector<double> finals(jobs.size(), 0.0);
  parallel_for(jobs.size(), [&](std::size_t i) {
    ExperimentConfig sub = cfg;
    sub.train.meta_frequency = jobs[i].F;
    const auto records = run_trial(sub, sub.regime, snr, jobs[i].seed);
    finals[i] = records.empty() ? 0.0 : records.back().cum_ber;
  });
  std::vector<FsweepRow> rows;
  std::size_t i = 0;
  for (int f : f_values) {
    double mean = 0.0;
    for (std::uint64_t seed : cfg.seeds) {
      rows.push_back({f, static_cast<long>(seed), finals[i]});
      mean += finals[i];
      ++i;
    }
    mean /= static_cast<double>(cfg.seeds.size());
    rows.push_back({f, -1, mean});
  }
  return rows;
}

void write_trial_csv(std::ostream& os, Regime regime, double snr_db, std::uint64_t seed,
                     const std::vector<BlockRecord>& records) {
  os << "block_index,regime,snr_db,seed,gate_valid,bit_errors,cum_ber,grad_steps\n";
  for (const BlockRecord& r : records) {
    os << r.block_index << ',' << to_string(regime) << ',' << fmt_double(snr_db) << ',' << seed
       << ',' << (r.gate_valid ? 1 : 0) << ',' << r.bit_errors << ',' << fmt_double(r.cum_ber)
       << ',' << r.grad_steps << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "regime,snr_db,seed,final_ber\n";
  for (const SweepRow& r : rows) {
    os << to_string(r.regime) << ',' << fmt_double(r.snr_db) << ','
       << (r.seed < 0 ? std::string("mean") : std::to_string(r.seed)) << ','
       << fmt_double(r.final_ber) << '\n';
  }
}

void write_fsweep_csv(std::ostream& os, const std::vector<FsweepRow>& rows) {
  os << "F,seed,final_ber\n";
  for (const FsweepRow& r : rows) {
    os << r.F << ',' << (r.seed < 0 ? std::string("mean") : std::to_string(r.seed)) << ','
       << fmt_double(r.final_ber) << '\n';
  }
}

}  // namespace adrx::hx
