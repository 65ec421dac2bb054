#include "adrx/training.hpp"

#include <algorithm>

namespace adrx::train {

nn::LabeledBatch sample_minibatch(const nn::LabeledBatch& full, int batch_size, Rng& rng) {
  const int M = full.size();
  const int bs = std::min(batch_size < 1 ? M : batch_size, M);
  nn::LabeledBatch mini;
  mini.inputs.resize(full.inputs.rows(), bs);
  mini.labels.resize(bs);
  for (int i = 0; i < bs; ++i) {
    const int idx = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(M)));
    mini.inputs.col(i) = full.inputs.col(idx);
    mini.labels[i] = full.labels[idx];
  }
  return mini;
}

nn::ParamVector online_train(const nn::MlpSpec& spec, const nn::ParamVector& init,
                             const Block& block, const BatchBuilder& builder,
                             const TrainConfig& cfg, Rng& rng) {
  nn::ParamVector params = init;
  if (cfg.i_sgd < 1) return params;
  const nn::LabeledBatch full = builder(block);
  nn::fit_minibatch(spec, params, full, cfg.i_sgd, cfg.batch_size, cfg.eta,
                    cfg.optimizer == Optimizer::adam, rng);
  return params;
}

nn::ParamVector meta_inner_loop(nn::ParamVector theta, const MetaTask& task,
                                const TrainConfig& cfg) {
  nn::ParamVector gs(theta.size()), gq(theta.size());
  for (int t = 0; t < cfg.i_meta; ++t) {
    const nn::GradFn support = task.draw_support();
    const nn::GradFn query = task.draw_query();
    support(theta, gs);
    const nn::ParamVector phi_hat = theta - cfg.eta * gs;
    query(phi_hat, gq);
    nn::ParamVector g;
    if (cfg.meta_mode == MetaMode::first_order)
      g = gq;
    else
      g = gq - cfg.eta * nn::hvp_finite_diff(support, theta, gq, cfg.hvp_step);
    // The hyperparameter update is a plain kappa-sized gradient step; the
    // configured optimizer only governs per-block weight fitting.
    nn::sgd_step(theta, g, cfg.kappa);
  }
  return theta;
}

namespace {

MetaTask make_pair_task(const nn::MlpSpec& spec, const nn::LabeledBatch& support_full,
                        const nn::LabeledBatch& query_full, const TrainConfig& cfg, Rng& rng) {
  const nn::MlpSpec* sp = &spec;
  const nn::LabeledBatch* sf = &support_full;
  const nn::LabeledBatch* qf = &query_full;
  const int bs = cfg.batch_size;
  Rng* r = &rng;
  const auto bound_grad = [sp](nn::LabeledBatch mini) -> nn::GradFn {
    return [sp, mini = std::move(mini)](const nn::ParamVector& p, nn::ParamVector& g) {
      return nn::loss_and_grad(*sp, p, mini, g);
    };
  };
  MetaTask task;
  task.draw_support = [=] { return bound_grad(sample_minibatch(*sf, bs, *r)); };
  task.draw_query = [=] { return bound_grad(sample_minibatch(*qf, bs, *r)); };
  return task;
}

}  // namespace

nn::ParamVector meta_update(const nn::MlpSpec& spec, nn::ParamVector theta, const PairBuffer& buf,
                            const BatchBuilder& builder, const TrainConfig& cfg, Rng& rng,
                            int* pairs_used) {
  if (pairs_used) *pairs_used = 0;
  for (int draw = 0; draw < cfg.meta_pair_draws; ++draw) {
    const auto pair = buf.sample_consecutive_pair(rng);
    if (!pair) return theta;  // no valid data for meta-learning
    const nn::LabeledBatch support_full = builder(*pair->first);
    const nn::LabeledBatch query_full = builder(*pair->second);
    theta = meta_inner_loop(std::move(theta),
                            make_pair_task(spec, support_full, query_full, cfg, rng), cfg);
    if (pairs_used) ++*pairs_used;
  }
  return theta;
}

nn::ParamVector meta_train_initial(const nn::MlpSpec& spec, const std::vector<Block>& pilots,
                                   const BatchBuilder& builder, const TrainConfig& cfg, Rng& rng) {
  std::vector<std::size_t> query_pos;
  for (std::size_t i = 1; i < pilots.size(); ++i)
    if (pilots[i].index == pilots[i - 1].index + 1) query_pos.push_back(i);
  if (query_pos.empty())
    throw InsufficientPilots("meta_train_initial: need at least one consecutive pilot pair");

  nn::ParamVector theta = nn::mlp_init(spec, rng);
  for (int sweep = 0; sweep < cfg.init_sweeps; ++sweep) {
    for (const std::size_t qi : query_pos) {
      const nn::LabeledBatch support_full = builder(pilots[qi - 1]);
      const nn::LabeledBatch query_full = builder(pilots[qi]);
      theta = meta_inner_loop(std::move(theta),
                              make_pair_task(spec, support_full, query_full, cfg, rng), cfg);
    }
  }
  return theta;
}

nn::ParamVector joint_train(const nn::MlpSpec& spec, const nn::ParamVector& init,
                            const std::vector<Block>& pilots, const BatchBuilder& builder,
                            const TrainConfig& cfg, int iters, Rng& rng) {
  nn::ParamVector params = init;
  if (pilots.empty() || iters < 1) return params;

  nn::LabeledBatch pool = builder(pilots.front());
  for (std::size_t i = 1; i < pilots.size(); ++i) {
    const nn::LabeledBatch b = builder(pilots[i]);
    const Eigen::Index old_cols = pool.inputs.cols();
    pool.inputs.conservativeResize(Eigen::NoChange, old_cols + b.inputs.cols());
    pool.inputs.rightCols(b.inputs.cols()) = b.inputs;
    pool.labels.insert(pool.labels.end(), b.labels.begin(), b.labels.end());
  }
  nn::fit_minibatch(spec, params, pool, iters, cfg.batch_size, cfg.eta,
                    cfg.optimizer == Optimizer::adam, rng);
  return params;
}

}  // namespace adrx::train
