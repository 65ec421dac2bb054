#pragma once

#include <Eigen/Dense>

#include "adrx/mlp.hpp"

namespace adrx::vnet {

// BPSK trellis over channel memory L.  State encodes the last L symbols
// (s_{i-L+1}..s_i) as base-2 digits with digit(+1) = 0, digit(-1) = 1; the
// most recent symbol sits in the least significant bit.  The all-+1 history
// (state 0) is the guard/boundary state.
struct Trellis {
  int L = 1;

  int num_states() const { return 1 << L; }
  static int digit_of(double symbol) { return symbol < 0.0 ? 1 : 0; }
  static double symbol_of(int digit) { return digit ? -1.0 : 1.0; }
  int next_state(int state, int digit) const {
    return ((state & ((1 << (L - 1)) - 1)) << 1) | digit;
  }
  // Symbol transmitted l steps before the newest one in this state.
  static int digit_at_lag(int state, int lag) { return (state >> lag) & 1; }
};

// table(i, state) = per-time log metric; rows are time indices.
using LoglikTable = Eigen::MatrixXd;

// Max-sum over state paths starting from state 0; ties resolved toward the
// lexicographically smallest symbol sequence (+1 sorts before -1).
Eigen::RowVectorXd viterbi_detect(const LoglikTable& table, const Trellis& trellis);

// Branch metrics log p(state | y_i) from the learned classifier; valid up to
// the per-time constant a uniform state prior contributes.
LoglikTable nn_loglik_table(const nn::MlpSpec& spec, const nn::ParamVector& params,
                            const Eigen::RowVectorXd& y);

// Perfect-CSI Gaussian metric; taps falling before the block start are dropped,
// matching the transmit-side guard interval.
LoglikTable true_loglik_table(const Eigen::VectorXd& h, double sigma,
                              const Eigen::RowVectorXd& y);

// One example per time index: scalar input y_i, label = state of the last L
// transmitted symbols with +1 padding before the block start.
nn::LabeledBatch training_batch(const Eigen::RowVectorXd& s, const Eigen::RowVectorXd& y, int L);

nn::MlpSpec equalizer_spec(int L);  // 1 -> 100 -> 50 -> 2^L, sigmoid then relu

}  // namespace adrx::vnet
