#pragma once

#include "adrx/deepsic.hpp"
#include "adrx/training.hpp"

namespace adrx::train {

// Per-module hyperparameters for soft-interference-cancellation nets.
struct ModularHyper {
  std::vector<nn::ParamVector> theta;  // indexed like DeepSicNet::params

  static ModularHyper from_net(const ds::DeepSicNet& net) { return {net.params}; }
};

// Meta-adapts the dynamic modules on buffered pairs using the module-wise
// cross-entropy loss; every static module's hyperparameters are overwritten by
// a copy of its current weights.  Interference estimates feeding each module's
// batch are computed once per buffered block from the current weights phi_net.
// *pairs_used reports consecutive pairs consumed by the first dynamic module
// (all dynamic modules consume the same count).
void modular_meta_update(ModularHyper& hyper, const PairBuffer& buf,
                         const ds::DeepSicNet& phi_net, const std::vector<ds::ModuleId>& dynamic,
                         const TrainConfig& cfg, Rng& rng, int* pairs_used = nullptr);

// Online adaptation: dynamic modules are re-initialized from their
// hyperparameters and trained on the block via the sequential schedule;
// static modules keep their weights bit-for-bit.
void modular_online_train(ds::DeepSicNet& net, const ModularHyper& hyper, const Block& block,
                          const std::vector<ds::ModuleId>& dynamic, const TrainConfig& cfg,
                          Rng& rng);

// Plain (non-meta) online training driven by the same TrainConfig knobs.
void deepsic_online_train(ds::DeepSicNet& net, const Block& block, const TrainConfig& cfg,
                          Rng& rng);

// One-shot training on the pooled pilot blocks with the sequential schedule:
// each module receives iters_per_module optimizer steps on examples pooled
// across every pilot block, with interference estimates advanced per block as
// stages complete.
void deepsic_joint_train(ds::DeepSicNet& net, const std::vector<Block>& pilots,
                         int iters_per_module, const TrainConfig& cfg, Rng& rng);

// Initial per-module hyperparameters from pilot blocks: dynamic modules are
// meta-trained over consecutive pilot pairs (fresh init each, like the
// single-classifier variant); static modules copy their current weights.
ModularHyper modular_meta_train_initial(const ds::DeepSicNet& phi_net,
                                        const std::vector<Block>& pilots,
                                        const std::vector<ds::ModuleId>& dynamic,
                                        const TrainConfig& cfg, Rng& rng);

}  // namespace adrx::train
