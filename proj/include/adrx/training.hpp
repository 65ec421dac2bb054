#pragma once

#include <functional>
#include <vector>

#include "adrx/block.hpp"
#include "adrx/mlp.hpp"
#include "adrx/pair_buffer.hpp"

namespace adrx::train {

enum class MetaMode { first_order, exact_hvp };
enum class Optimizer { adam, sgd };

struct TrainConfig {
  double eta = 1e-3;    // inner / online learning rate
  double kappa = 0.1;   // meta learning rate
  int i_sgd = 200;      // online steps per block
  int i_meta = 200;     // outer steps per meta pair
  int meta_frequency = 5;
  double gate_threshold = 0.02;
  int batch_size = 64;
  std::size_t buffer_capacity = 20;
  MetaMode meta_mode = MetaMode::first_order;
  Optimizer optimizer = Optimizer::adam;
  int meta_pair_draws = 1;  // consecutive pairs consumed per meta event
  int init_sweeps = 1;      // passes over pilot pairs in initial meta-training
  double hvp_step = 1e-4;   // finite-difference step for exact_hvp
};

// Maps a labeled block to the receiver's training examples.
using BatchBuilder = std::function<nn::LabeledBatch(const Block&)>;

// i_sgd optimizer steps on the block's examples starting from `init`.
nn::ParamVector online_train(const nn::MlpSpec& spec, const nn::ParamVector& init,
                             const Block& block, const BatchBuilder& builder,
                             const TrainConfig& cfg, Rng& rng);

// One support/query task pair.  Each draw_* call returns a gradient oracle
// bound to a freshly sampled mini-batch, so the support step and its
// Hessian-vector product see identical data within an iteration.
struct MetaTask {
  std::function<nn::GradFn()> draw_support;
  std::function<nn::GradFn()> draw_query;
};

// Algorithm core shared by every meta variant: i_meta iterations of
//   phi_hat   = theta - eta * grad support(theta)          (plain gradient)
//   theta    <- theta - kappa * g                          (plain gradient)
// with g = grad query(phi_hat) in first_order mode and
// g = (I - eta H_support(theta)) grad query(phi_hat) in exact_hvp mode.
// The cfg optimizer choice applies to per-block weight fitting only.
nn::ParamVector meta_inner_loop(nn::ParamVector theta, const MetaTask& task,
                                const TrainConfig& cfg);

// Draws meta_pair_draws consecutive pairs from the buffer and runs the inner
// loop on each.  Returns theta unchanged when no consecutive pair exists;
// *pairs_used reports how many pairs were consumed.
nn::ParamVector meta_update(const nn::MlpSpec& spec, nn::ParamVector theta, const PairBuffer& buf,
                            const BatchBuilder& builder, const TrainConfig& cfg, Rng& rng,
                            int* pairs_used = nullptr);

// Initial hyperparameters from pilot blocks: start at a fresh init and sweep
// the inner loop over every consecutive pilot pair, init_sweeps times.
nn::ParamVector meta_train_initial(const nn::MlpSpec& spec, const std::vector<Block>& pilots,
                                   const BatchBuilder& builder, const TrainConfig& cfg, Rng& rng);

// Train once on the pooled pilot examples starting from `init`; never adapts
// afterwards.
nn::ParamVector joint_train(const nn::MlpSpec& spec, const nn::ParamVector& init,
                            const std::vector<Block>& pilots, const BatchBuilder& builder,
                            const TrainConfig& cfg, int iters, Rng& rng);

// Uniform-with-replacement mini-batch used by the meta closures.
nn::LabeledBatch sample_minibatch(const nn::LabeledBatch& full, int batch_size, Rng& rng);

}  // namespace adrx::train
