#include "adrx/modular.hpp"

#include <map>
#include <utility>

namespace adrx::train {
namespace {

ds::SicTrainConfig sic_cfg(const TrainConfig& cfg) {
  return {cfg.i_sgd, cfg.batch_size, cfg.eta, cfg.optimizer == Optimizer::adam};
}

// Iteration-(q-1) estimates for every buffered block, computed with the
// current weights; q = 0 rows fall back to the uniform 0.5 initialization.
struct EstimateCache {
  std::map<long, ds::ForwardResult> by_index;

  const ds::SoftEstimates& prev_for(const ds::DeepSicNet& net, const Block& block, int q) {
    auto it = by_index.find(block.index);
    if (it == by_index.end())
      it = by_index.emplace(block.index, ds::deepsic_forward(net, block.y)).first;
    if (q == 0) {
      uniform.resize(net.K, block.y.cols());
      uniform.setConstant(0.5);
      return uniform;
    }
    return it->second.per_iteration[q - 1];
  }

  ds::SoftEstimates uniform;
};

}  // namespace

void modular_meta_update(ModularHyper& hyper, const PairBuffer& buf,
                         const ds::DeepSicNet& phi_net, const std::vector<ds::ModuleId>& dynamic,
                         const TrainConfig& cfg, Rng& rng, int* pairs_used) {
  if (pairs_used) *pairs_used = 0;
  EstimateCache cache;
  bool first_dynamic = true;
  for (int q = 0; q < phi_net.Q; ++q) {
    for (int k = 0; k < phi_net.K; ++k) {
      const ds::ModuleId m{k, q};
      bool is_dynamic = false;
      for (const ds::ModuleId& d : dynamic) is_dynamic = is_dynamic || d == m;
      if (!is_dynamic) {
        hyper.theta[phi_net.module_index(m)] = phi_net.at(m);  // copy rule for static modules
        continue;
      }
      const BatchBuilder builder = [&](const Block& block) {
        return ds::module_batch(phi_net, m, block.y, cache.prev_for(phi_net, block, q),
                                block.s.row(k));
      };
      int used = 0;
      nn::ParamVector& theta = hyper.theta[phi_net.module_index(m)];
      theta = meta_update(phi_net.spec, theta, buf, builder, cfg, rng, &used);
      if (pairs_used && first_dynamic) *pairs_used = used;
      first_dynamic = false;
    }
  }
}

void modular_online_train(ds::DeepSicNet& net, const ModularHyper& hyper, const Block& block,
                          const std::vector<ds::ModuleId>& dynamic, const TrainConfig& cfg,
                          Rng& rng) {
  for (const ds::ModuleId& m : dynamic) net.at(m) = hyper.theta[net.module_index(m)];
  ds::deepsic_train_sequential(net, block.s, block.y, sic_cfg(cfg), dynamic, rng);
}

void deepsic_online_train(ds::DeepSicNet& net, const Block& block, const TrainConfig& cfg,
                          Rng& rng) {
  ds::deepsic_train_sequential(net, block.s, block.y, sic_cfg(cfg),
                               ds::all_modules(net.K, net.Q), rng);
}

void deepsic_joint_train(ds::DeepSicNet& net, const std::vector<Block>& pilots,
                         int iters_per_module, const TrainConfig& cfg, Rng& rng) {
  if (pilots.empty() || iters_per_module <= 0) return;
  const int K = net.K, Q = net.Q;
  std::vector<ds::SoftEstimates> est(pilots.size());
  for (std::size_t b = 0; b < pilots.size(); ++b) {
    est[b].resize(K, pilots[b].y.cols());
    est[b].setConstant(0.5);
  }
  for (int q = 0; q < Q; ++q) {
    for (int k = 0; k < K; ++k) {
      const ds::ModuleId m{k, q};
      nn::LabeledBatch pooled;
      for (std::size_t b = 0; b < pilots.size(); ++b) {
        nn::LabeledBatch part =
            ds::module_batch(net, m, pilots[b].y, est[b], pilots[b].s.row(k));
        if (pooled.size() == 0) {
          pooled = std::move(part);
        } else {
          const Eigen::Index old = pooled.inputs.cols();
          pooled.inputs.conservativeResize(Eigen::NoChange, old + part.inputs.cols());
          pooled.inputs.rightCols(part.inputs.cols()) = part.inputs;
          pooled.labels.insert(pooled.labels.end(), part.labels.begin(), part.labels.end());
        }
      }
      nn::fit_minibatch(net.spec, net.at(m), pooled, iters_per_module, cfg.batch_size, cfg.eta,
                        cfg.optimizer == Optimizer::adam, rng);
    }
    for (std::size_t b = 0; b < pilots.size(); ++b) {
      ds::SoftEstimates next(K, pilots[b].y.cols());
      for (int k = 0; k < K; ++k) {
        const ds::ModuleId m{k, q};
        nn::LabeledBatch batch = ds::module_batch(net, m, pilots[b].y, est[b], pilots[b].s.row(k));
        next.row(k) = nn::forward(net.spec, net.at(m), batch.inputs).row(0);
      }
      est[b] = next;
    }
  }
}

ModularHyper modular_meta_train_initial(const ds::DeepSicNet& phi_net,
                                        const std::vector<Block>& pilots,
                                        const std::vector<ds::ModuleId>& dynamic,
                                        const TrainConfig& cfg, Rng& rng) {
  ModularHyper hyper = ModularHyper::from_net(phi_net);  // static modules copy their weights
  EstimateCache cache;
  for (int q = 0; q < phi_net.Q; ++q) {
    for (int k = 0; k < phi_net.K; ++k) {
      const ds::ModuleId m{k, q};
      bool is_dynamic = false;
      for (const ds::ModuleId& d : dynamic) is_dynamic = is_dynamic || d == m;
      if (!is_dynamic) continue;
      const BatchBuilder builder = [&](const Block& block) {
        return ds::module_batch(phi_net, m, block.y, cache.prev_for(phi_net, block, q),
                                block.s.row(k));
      };
      hyper.theta[phi_net.module_index(m)] =
          meta_train_initial(phi_net.spec, pilots, builder, cfg, rng);
    }
  }
  return hyper;
}

}  // namespace adrx::train
