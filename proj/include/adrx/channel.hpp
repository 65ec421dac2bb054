#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "adrx/errors.hpp"
#include "adrx/rng.hpp"

namespace adrx::chan {

// Per-block SISO taps: row l, column j holds h_{l,j}.
struct TapProfile {
  Eigen::MatrixXd taps;
  int L() const { return static_cast<int>(taps.rows()); }
  int J() const { return static_cast<int>(taps.cols()); }
};

struct MimoChannelSpec {
  Eigen::MatrixXd H;
  int N() const { return static_cast<int>(H.rows()); }
  int K() const { return static_cast<int>(H.cols()); }
};

enum class Nonlinearity { none, tanh_scaled };

struct ChannelConfig {
  double sigma = 1.0;
  Nonlinearity nonlinearity = Nonlinearity::none;
  double tanh_scale = 0.5;
};

// SNR = 1/sigma^2, so sigma = 10^(-snr_db/20).
double snr_to_sigma(double snr_db);

// y_i = sum_l h_l s_{i-l} + w_i with zero guard before the block start;
// tanh(C * (.)) applied afterwards when enabled.
Eigen::RowVectorXd siso_transmit(const Eigen::RowVectorXd& s, const Eigen::VectorXd& h,
                                 const ChannelConfig& cfg, Rng& rng);

Eigen::MatrixXd mimo_transmit(const Eigen::MatrixXd& S, const MimoChannelSpec& spec,
                              const ChannelConfig& cfg, Rng& rng);

// (H)_{n,k} = e^{-|n-k|} with 1-based indices.
MimoChannelSpec exp_decay_matrix(int N, int K);

struct TapSpec {
  double amplitude = 1.0;
  double period = 1.0;  // blocks per oscillation
  double phase = 0.0;
};

// h_{l,j} = a_l * (0.8 + 0.2 cos(2 pi j / P_l + psi_l)), j = 0..J-1.
TapProfile synth_tap_profile(const std::vector<TapSpec>& spec, int J);

TapProfile load_tap_trace(const std::filesystem::path& path);
void save_tap_trace(const std::filesystem::path& path, const TapProfile& profile);

}  // namespace adrx::chan
