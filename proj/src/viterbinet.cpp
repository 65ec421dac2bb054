#include "adrx/viterbinet.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace adrx::vnet {

Eigen::RowVectorXd viterbi_detect(const LoglikTable& table, const Trellis& trellis) {
  const int B = static_cast<int>(table.rows());
  const int S = trellis.num_states();
  if (static_cast<int>(table.cols()) != S)
    throw DimensionMismatch("viterbi_detect: table width != 2^L");

  // beta(i, u) = best score over suffixes i..B-1 given state u entering time i.
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(B + 1, S);
  for (int i = B - 1; i >= 0; --i) {
    for (int u = 0; u < S; ++u) {
      double best = -std::numeric_limits<double>::infinity();
      for (int d = 0; d < 2; ++d) {
        const int v = trellis.next_state(u, d);
        best = std::max(best, table(i, v) + beta(i + 1, v));
      }
      beta(i, u) = best;
    }
  }

  // Greedy forward pass from the guard state; preferring digit 0 (+1) on ties
  // yields the lexicographically smallest optimal sequence.
  Eigen::RowVectorXd out(B);
  int u = 0;
  for (int i = 0; i < B; ++i) {
    const int v0 = trellis.next_state(u, 0);
    const int v1 = trellis.next_state(u, 1);
    const double s0 = table(i, v0) + beta(i + 1, v0);
    const double s1 = table(i, v1) + beta(i + 1, v1);
    const int d = s0 >= s1 ? 0 : 1;
    out[i] = Trellis::symbol_of(d);
    u = trellis.next_state(u, d);
  }
  return out;
}

LoglikTable nn_loglik_table(const nn::MlpSpec& spec, const nn::ParamVector& params,
                            const Eigen::RowVectorXd& y) {
  const Eigen::MatrixXd P = nn::forward(spec, params, y);  // 2^L x B
  return P.array().max(1e-300).log().transpose().matrix();
}

LoglikTable true_loglik_table(const Eigen::VectorXd& h, double sigma,
                              const Eigen::RowVectorXd& y) {
  const int L = static_cast<int>(h.size());
  const int B = static_cast<int>(y.size());
  const int S = 1 << L;
  LoglikTable table(B, S);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int i = 0; i < B; ++i) {
    for (int u = 0; u < S; ++u) {
      double mean = 0.0;
      for (int l = 0; l < L && l <= i; ++l)
        mean += h[l] * Trellis::symbol_of(Trellis::digit_at_lag(u, l));
      const double d = y[i] - mean;
      table(i, u) = -d * d * inv;
    }
  }
  return table;
}

nn::LabeledBatch training_batch(const Eigen::RowVectorXd& s, const Eigen::RowVectorXd& y, int L) {
  if (s.size() != y.size()) throw DimensionMismatch("training_batch: s/y length mismatch");
  const int B = static_cast<int>(s.size());
  const Trellis trellis{L};
  nn::LabeledBatch batch;
  batch.inputs.resize(1, B);
  batch.labels.resize(B);
  int state = 0;
  for (int i = 0; i < B; ++i) {
    state = trellis.next_state(state, Trellis::digit_of(s[i]));
    batch.inputs(0, i) = y[i];
    batch.labels[i] = state;
  }
  return batch;
}

nn::MlpSpec equalizer_spec(int L) {
  return {{1, 100, 50, 1 << L}, {nn::Act::sigmoid, nn::Act::relu}};
}

}  // namespace adrx::vnet
