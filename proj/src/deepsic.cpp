#include "adrx/deepsic.hpp"

namespace adrx::ds {
namespace {

// Stack [Y ; interfering-user estimates] for user k.
Eigen::MatrixXd module_inputs(int k, int N, int K, const Eigen::MatrixXd& Y,
                              const SoftEstimates& prev) {
  const int B = static_cast<int>(Y.cols());
  Eigen::MatrixXd X(N + K - 1, B);
  X.topRows(N) = Y;
  int row = N;
  for (int other = 0; other < K; ++other) {
    if (other == k) continue;
    X.row(row++) = prev.row(other);
  }
  return X;
}

}  // namespace

nn::MlpSpec sic_module_spec(int N, int K) {
  return {{N + K - 1, 100, 50, 2}, {nn::Act::sigmoid, nn::Act::relu}};
}

DeepSicNet make_deepsic(int K, int Q, int N, Rng& rng) {
  DeepSicNet net{K, Q, N, sic_module_spec(N, K), {}};
  net.params.reserve(static_cast<std::size_t>(K) * Q);
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < K; ++k) net.params.push_back(nn::mlp_init(net.spec, rng));
  return net;
}

ForwardResult deepsic_forward(const DeepSicNet& net, const Eigen::MatrixXd& Y) {
  if (Y.rows() != net.N) throw DimensionMismatch("deepsic_forward: Y rows != N");
  const int B = static_cast<int>(Y.cols());
  ForwardResult out;
  SoftEstimates prev = SoftEstimates::Constant(net.K, B, 0.5);
  for (int q = 0; q < net.Q; ++q) {
    SoftEstimates cur(net.K, B);
    for (int k = 0; k < net.K; ++k) {
      const Eigen::MatrixXd X = module_inputs(k, net.N, net.K, Y, prev);
      const Eigen::MatrixXd P = nn::forward(net.spec, net.at({k, q}), X);
      cur.row(k) = P.row(0);  // class 0 = +1
    }
    out.per_iteration.push_back(cur);
    prev = cur;
  }
  out.hard.resize(net.K, B);
  for (int k = 0; k < net.K; ++k)
    for (int i = 0; i < B; ++i) out.hard(k, i) = prev(k, i) >= 0.5 ? 1.0 : -1.0;
  return out;
}

ForwardResult deepsic_forward(int K, int Q, int N, const ModuleFn& fn, const Eigen::MatrixXd& Y) {
  if (Y.rows() != N) throw DimensionMismatch("deepsic_forward: Y rows != N");
  const int B = static_cast<int>(Y.cols());
  ForwardResult out;
  SoftEstimates prev = SoftEstimates::Constant(K, B, 0.5);
  for (int q = 0; q < Q; ++q) {
    SoftEstimates cur(K, B);
    for (int k = 0; k < K; ++k) {
      const Eigen::MatrixXd X = module_inputs(k, N, K, Y, prev);
      for (int i = 0; i < B; ++i) cur(k, i) = fn(k, q, X.col(i));
    }
    out.per_iteration.push_back(cur);
    prev = cur;
  }
  out.hard.resize(K, B);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < B; ++i) out.hard(k, i) = prev(k, i) >= 0.5 ? 1.0 : -1.0;
  return out;
}

nn::LabeledBatch module_batch(const DeepSicNet& net, ModuleId m, const Eigen::MatrixXd& Y,
                              const SoftEstimates& prev, const Eigen::RowVectorXd& labels) {
  if (labels.size() != Y.cols()) throw DimensionMismatch("module_batch: label length");
  nn::LabeledBatch batch;
  batch.inputs = module_inputs(m.k, net.N, net.K, Y, prev);
  batch.labels.resize(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) batch.labels[i] = labels[i] < 0.0 ? 1 : 0;
  return batch;
}

void deepsic_train_sequential(DeepSicNet& net, const Eigen::MatrixXd& S, const Eigen::MatrixXd& Y,
                              const SicTrainConfig& cfg, const std::vector<ModuleId>& which,
                              Rng& rng) {
  if (S.rows() != net.K) throw DimensionMismatch("deepsic_train_sequential: S rows != K");
  const int B = static_cast<int>(Y.cols());
  SoftEstimates prev = SoftEstimates::Constant(net.K, B, 0.5);
  for (int q = 0; q < net.Q; ++q) {
    for (int k = 0; k < net.K; ++k) {
      const ModuleId m{k, q};
      bool selected = false;
      for (const ModuleId& w : which) selected = selected || w == m;
      if (!selected) continue;
      const nn::LabeledBatch batch = module_batch(net, m, Y, prev, S.row(k));
      nn::fit_minibatch(net.spec, net.at(m), batch, cfg.iters, cfg.batch_size, cfg.eta,
                        cfg.use_adam, rng);
    }
    if (q + 1 == net.Q) break;
    SoftEstimates cur(net.K, B);
    for (int k = 0; k < net.K; ++k) {
      const Eigen::MatrixXd X = module_inputs(k, net.N, net.K, Y, prev);
      cur.row(k) = nn::forward(net.spec, net.at({k, q}), X).row(0);
    }
    prev = cur;
  }
}

std::vector<ModuleId> all_modules(int K, int Q) {
  std::vector<ModuleId> v;
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < K; ++k) v.push_back({k, q});
  return v;
}

std::vector<ModuleId> dynamic_module_set(int k_prime, int K, int Q) {
  if (k_prime < 0 || k_prime >= K) throw IndexOutOfRange("dynamic_module_set: bad user index");
  std::vector<ModuleId> v;
  for (int q = 0; q < Q; ++q) v.push_back({k_prime, q});
  return v;
}

}  // namespace adrx::ds
