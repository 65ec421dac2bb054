#include "adrx/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace adrx::chan {

double snr_to_sigma(double snr_db) { return std::pow(10.0, -snr_db / 20.0); }

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

template <typename Derived>
void apply_nonlinearity(Eigen::MatrixBase<Derived>& y, const ChannelConfig& cfg) {
  if (cfg.nonlinearity == Nonlinearity::tanh_scaled)
    y = (cfg.tanh_scale * y.array()).tanh().matrix();
}

}  // namespace

Eigen::RowVectorXd siso_transmit(const Eigen::RowVectorXd& s, const Eigen::VectorXd& h,
                                 const ChannelConfig& cfg, Rng& rng) {
  const int B = static_cast<int>(s.size());
  const int L = static_cast<int>(h.size());
  Eigen::RowVectorXd y(B);
  for (int i = 0; i < B; ++i) {
    double acc = 0.0;
    for (int l = 0; l < L && l <= i; ++l) acc += h[l] * s[i - l];
    y[i] = acc + cfg.sigma * rng.normal();
  }
  apply_nonlinearity(y, cfg);
  return y;
}

Eigen::MatrixXd mimo_transmit(const Eigen::MatrixXd& S, const MimoChannelSpec& spec,
                              const ChannelConfig& cfg, Rng& rng) {
  if (S.rows() != spec.K())
    throw DimensionMismatch("mimo_transmit: symbol rows != channel columns");
  Eigen::MatrixXd Y = spec.H * S;
  for (int j = 0; j < Y.cols(); ++j)
    for (int i = 0; i < Y.rows(); ++i) Y(i, j) += cfg.sigma * rng.normal();
  apply_nonlinearity(Y, cfg);
  return Y;
}

MimoChannelSpec exp_decay_matrix(int N, int K) {
  MimoChannelSpec spec;
  spec.H.resize(N, K);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) spec.H(n, k) = std::exp(-std::abs(n - k));
  return spec;
}

TapProfile synth_tap_profile(const std::vector<TapSpec>& spec, int J) {
  TapProfile p;
  p.taps.resize(static_cast<int>(spec.size()), J);
  for (std::size_t l = 0; l < spec.size(); ++l) {
    const TapSpec& ts = spec[l];
    for (int j = 0; j < J; ++j) {
      const double arg = kTwoPi * j / ts.period + ts.phase;
      p.taps(static_cast<int>(l), j) = ts.amplitude * (0.8 + 0.2 * std::cos(arg));
    }
  }
  return p;
}

TapProfile load_tap_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tap trace: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing junk");
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("tap trace " + path.string() + ": bad number at row " +
                         std::to_string(lineno) + ", column " + std::to_string(col));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("tap trace " + path.string() + ": ragged row " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty())
    throw ParseError("tap trace " + path.string() + ": no data");

  TapProfile p;
  const int J = static_cast<int>(rows.size());
  const int L = static_cast<int>(rows.front().size());
  p.taps.resize(L, J);
  for (int j = 0; j < J; ++j)
    for (int l = 0; l < L; ++l) p.taps(l, j) = rows[j][l];
  return p;
}

void save_tap_trace(const std::filesystem::path& path, const TapProfile& profile) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write tap trace: " + path.string());
  out.precision(17);
  for (int j = 0; j < profile.J(); ++j) {
    for (int l = 0; l < profile.L(); ++l) {
      if (l) out << ',';
      out << profile.taps(l, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace adrx::chan
