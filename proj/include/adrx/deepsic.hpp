#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "adrx/mlp.hpp"
#include "adrx/rng.hpp"

namespace adrx::ds {

struct ModuleId {
  int k = 0;  // user, 0-based
  int q = 0;  // iteration, 0-based
  bool operator==(const ModuleId&) const = default;
};

// K users x Q soft-interference-cancellation iterations; module (k, q) is a
// small classifier mapping [y_i ; interfering +1-probabilities] -> PMF of
// user k's symbol.  All modules share one spec: (N + K - 1) -> 100 -> 50 -> 2.
struct DeepSicNet {
  int K = 0, Q = 0, N = 0;
  nn::MlpSpec spec;
  std::vector<nn::ParamVector> params;  // K*Q entries

  int module_index(ModuleId m) const { return m.q * K + m.k; }
  nn::ParamVector& at(ModuleId m) { return params[module_index(m)]; }
  const nn::ParamVector& at(ModuleId m) const { return params[module_index(m)]; }
};

nn::MlpSpec sic_module_spec(int N, int K);
DeepSicNet make_deepsic(int K, int Q, int N, Rng& rng);

// p(+1) per user per time; rows are users.
using SoftEstimates = Eigen::MatrixXd;

struct ForwardResult {
  std::vector<SoftEstimates> per_iteration;  // Q entries
  Eigen::MatrixXd hard;                      // K x B symbols, ties to +1
};

ForwardResult deepsic_forward(const DeepSicNet& net, const Eigen::MatrixXd& Y);

// Module evaluator form used by oracle tests: maps (k, q, input column) to
// p(+1).  The net-based overload above is the batched special case.
using ModuleFn = std::function<double(int k, int q, const Eigen::VectorXd& input)>;
ForwardResult deepsic_forward(int K, int Q, int N, const ModuleFn& fn, const Eigen::MatrixXd& Y);

// Training examples for module (k, q): inputs stack y_i over the q-1 iteration
// estimates of the interfering users; labels are user k's symbol classes
// (class 0 = +1).
nn::LabeledBatch module_batch(const DeepSicNet& net, ModuleId m, const Eigen::MatrixXd& Y,
                              const SoftEstimates& prev, const Eigen::RowVectorXd& labels);

struct SicTrainConfig {
  int iters = 200;
  int batch_size = 64;
  double eta = 1e-3;
  bool use_adam = true;
};

// Sequential schedule: train all users of iteration q (from their current
// parameters) on estimates produced by the already-trained iterations 1..q-1,
// then advance the estimates.  Only modules listed in `which` are updated;
// pass all modules for full training.
void deepsic_train_sequential(DeepSicNet& net, const Eigen::MatrixXd& S, const Eigen::MatrixXd& Y,
                              const SicTrainConfig& cfg, const std::vector<ModuleId>& which,
                              Rng& rng);

std::vector<ModuleId> all_modules(int K, int Q);
std::vector<ModuleId> dynamic_module_set(int k_prime, int K, int Q);  // {(k', q)}_q

}  // namespace adrx::ds
