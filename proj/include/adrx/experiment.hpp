#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "adrx/channel.hpp"
#include "adrx/deepsic.hpp"
#include "adrx/reed_solomon.hpp"
#include "adrx/training.hpp"

namespace adrx::hx {

enum class Scenario {
  siso_linear,
  siso_tanh,
  siso_trace,
  mimo_linear,
  mimo_tanh,
  mimo_trace,
  mimo_modular
};
enum class Receiver { viterbinet, viterbi_csi, deepsic };
enum class Regime { joint, online, meta, modular_meta };

// Initialization handed to online training between meta events: `hold` keeps
// the last meta-updated hyperparameters (stream-protocol behavior); `chain`
// tracks the latest trained weights, which makes a meta run with no meta
// events reproduce plain online training exactly.
enum class ThetaFallback { hold, chain };

// Hyperparameter birth at the pilot/data boundary: meta-train over pilot
// pairs, or copy the pilot-trained weights.  auto_pick = meta for the
// sequence equalizer, copy for the interference canceller.
enum class InitialHyper { auto_pick, meta, copy };

const char* to_string(Scenario s);
const char* to_string(Receiver r);
const char* to_string(Regime r);

struct ExperimentConfig {
  Scenario scenario = Scenario::siso_linear;
  Receiver receiver = Receiver::viterbinet;
  Regime regime = Regime::online;
  std::vector<Regime> sweep_regimes;  // regimes covered by `sweep`; defaults to {regime}

  int t_pilot = 100;
  int t_data = 100;
  std::vector<double> snr_db{12.0};
  std::vector<std::uint64_t> seeds{1};

  fec::RsParams rs{17, 15};
  int memory = 4;          // L, SISO channel taps
  int users = 4;           // K
  int antennas = 4;        // N
  int sic_iterations = 5;  // Q
  int mobile_user = 2;     // 1-based k', mimo_modular scenario
  bool iid_variation = false;
  std::string trace_path;

  train::TrainConfig train;
  ThetaFallback theta_fallback = ThetaFallback::hold;
  InitialHyper initial_hyper = InitialHyper::auto_pick;

  std::string out = "results.csv";

  int B() const { return rs.n * 8; }  // one codeword per block per user
  bool is_siso() const;
  void validate() const;  // throws ConfigError with the offending field
};

struct BlockRecord {
  long block_index = 0;
  bool is_pilot = false;
  bool gate_valid = false;
  long bit_errors = 0;      // information-bit errors after decoding (data blocks)
  double cum_ber = 0.0;     // over data blocks only
  long grad_steps = 0;      // per-module gradient steps spent while processing this block
};

// Optional probe into the receiver's state after each block is fully
// processed (detection plus any training), for diagnostics and audits.
struct TrialObserver {
  std::function<void(long block_index, const nn::ParamVector& phi)> on_siso_block;
  std::function<void(long block_index, const ds::DeepSicNet& net)> on_mimo_block;
};

std::vector<BlockRecord> run_trial(const ExperimentConfig& cfg, Regime regime, double snr_db,
                                   std::uint64_t seed, const TrialObserver* observer = nullptr);
// Uses cfg.regime and the first configured SNR.
std::vector<BlockRecord> run_trial(const ExperimentConfig& cfg, std::uint64_t seed);

struct SweepRow {
  Regime regime;
  double snr_db = 0.0;
  long seed = -1;  // -1 marks the across-seed mean
  double final_ber = 0.0;
};
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);

struct FsweepRow {
  int F = 0;
  long seed = -1;
  double final_ber = 0.0;
};
std::vector<FsweepRow> run_f_sweep(const ExperimentConfig& cfg, std::vector<int> f_values);

// Fixed-order CSV emitters ('.' decimals, header row).
void write_trial_csv(std::ostream& os, Regime regime, double snr_db, std::uint64_t seed,
                     const std::vector<BlockRecord>& records);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_fsweep_csv(std::ostream& os, const std::vector<FsweepRow>& rows);

// Worker cap for parallel (snr, seed) trials; reads the ADRX_WORKERS
// environment variable, falling back to the hardware concurrency.
int worker_count(std::size_t jobs);

}  // namespace adrx::hx
