#include "adrx/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adrx::nn {
namespace {

struct Layout {
  std::vector<int> w_off, b_off;
};

Layout layout(const MlpSpec& spec) {
  Layout lo;
  int off = 0;
  for (int l = 0; l < spec.num_layers(); ++l) {
    lo.w_off.push_back(off);
    off += spec.dims[l] * spec.dims[l + 1];
    lo.b_off.push_back(off);
    off += spec.dims[l + 1];
  }
  return lo;
}

void check_spec(const MlpSpec& spec) {
  if (!spec.valid()) throw DimensionMismatch("invalid MLP spec");
}

Eigen::MatrixXd activate(const MlpSpec& spec, int hidden_idx, const Eigen::MatrixXd& z) {
  if (spec.acts[hidden_idx] == Act::sigmoid)
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  return z.cwiseMax(0.0);
}

// Forward pass keeping post-activation values per layer (index 0 = input).
std::vector<Eigen::MatrixXd> forward_cached(const MlpSpec& spec, const ParamVector& params,
                                            const Eigen::MatrixXd& X) {
  const Layout lo = layout(spec);
  std::vector<Eigen::MatrixXd> a;
  a.reserve(spec.dims.size());
  a.push_back(X);
  for (int l = 0; l < spec.num_layers(); ++l) {
    const Eigen::Map<const Eigen::MatrixXd> W(params.data() + lo.w_off[l], spec.dims[l + 1],
                                              spec.dims[l]);
    const Eigen::Map<const Eigen::VectorXd> b(params.data() + lo.b_off[l], spec.dims[l + 1]);
    Eigen::MatrixXd z = (W * a.back()).colwise() + b;
    if (l + 1 < spec.num_layers()) {
      a.push_back(activate(spec, l, z));
    } else {
      // Stable softmax per column.
      Eigen::RowVectorXd mx = z.colwise().maxCoeff();
      Eigen::MatrixXd e = (z.rowwise() - mx).array().exp().matrix();
      Eigen::RowVectorXd sums = e.colwise().sum();
      a.push_back(e.array().rowwise() / sums.array());
    }
  }
  return a;
}

}  // namespace

int MlpSpec::param_count() const {
  int n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
  return n;
}

bool MlpSpec::valid() const {
  if (dims.size() < 2 || dims.back() < 2) return false;
  if (acts.size() != dims.size() - 2) return false;
  for (int d : dims)
    if (d < 1) return false;
  return true;
}

ParamVector mlp_init(const MlpSpec& spec, Rng& rng) {
  check_spec(spec);
  ParamVector p = ParamVector::Zero(spec.param_count());
  const Layout lo = layout(spec);
  for (int l = 0; l < spec.num_layers(); ++l) {
    const double bound = std::sqrt(6.0 / (spec.dims[l] + spec.dims[l + 1]));
    const int count = spec.dims[l] * spec.dims[l + 1];
    for (int i = 0; i < count; ++i) p[lo.w_off[l] + i] = rng.uniform_range(-bound, bound);
  }
  return p;
}

Eigen::MatrixXd forward(const MlpSpec& spec, const ParamVector& params, const Eigen::MatrixXd& X) {
  check_spec(spec);
  if (X.rows() != spec.input_dim()) throw DimensionMismatch("forward: input rows != d_in");
  if (params.size() != spec.param_count()) throw DimensionMismatch("forward: params length");
  return forward_cached(spec, params, X).back();
}

Eigen::VectorXd forward_one(const MlpSpec& spec, const ParamVector& params,
                            const Eigen::VectorXd& x) {
  return forward(spec, params, x);
}

double loss_value(const MlpSpec& spec, const ParamVector& params, const LabeledBatch& batch) {
  const Eigen::MatrixXd P = forward(spec, params, batch.inputs);
  double loss = 0.0;
  for (int i = 0; i < batch.size(); ++i) {
    const int y = batch.labels[i];
    if (y < 0 || y >= spec.output_dim()) throw DimensionMismatch("loss: label out of range");
    loss -= std::log(std::max(P(y, i), 1e-30));
  }
  return loss / batch.size();
}

double loss_and_grad(const MlpSpec& spec, const ParamVector& params, const LabeledBatch& batch,
                     ParamVector& grad, bool* underflow) {
  check_spec(spec);
  const int M = batch.size();
  if (M < 1) throw DimensionMismatch("loss_and_grad: empty batch");
  if (batch.inputs.cols() != M) throw DimensionMismatch("loss_and_grad: inputs/labels mismatch");
  if (params.size() != spec.param_count()) throw DimensionMismatch("loss_and_grad: params length");

  const Layout lo = layout(spec);
  const std::vector<Eigen::MatrixXd> a = forward_cached(spec, params, batch.inputs);
  const Eigen::MatrixXd& P = a.back();

  bool clamped = false;
  double loss = 0.0;
  for (int i = 0; i < M; ++i) {
    const int y = batch.labels[i];
    if (y < 0 || y >= spec.output_dim()) throw DimensionMismatch("loss_and_grad: label range");
    const double p = P(y, i);
    if (p < 1e-30) clamped = true;
    loss -= std::log(std::max(p, 1e-30));
  }
  loss /= M;
  if (underflow) *underflow = clamped;

  grad.resize(spec.param_count());
  Eigen::MatrixXd dz = P;
  for (int i = 0; i < M; ++i) dz(batch.labels[i], i) -= 1.0;
  dz /= static_cast<double>(M);

  for (int l = spec.num_layers() - 1; l >= 0; --l) {
    Eigen::Map<Eigen::MatrixXd> gW(grad.data() + lo.w_off[l], spec.dims[l + 1], spec.dims[l]);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + lo.b_off[l], spec.dims[l + 1]);
    gW.noalias() = dz * a[l].transpose();
    gb = dz.rowwise().sum();
    if (l > 0) {
      const Eigen::Map<const Eigen::MatrixXd> W(params.data() + lo.w_off[l], spec.dims[l + 1],
                                                spec.dims[l]);
      Eigen::MatrixXd da = W.transpose() * dz;
      if (spec.acts[l - 1] == Act::sigmoid)
        dz = (da.array() * a[l].array() * (1.0 - a[l].array())).matrix();
      else
        dz = (da.array() * (a[l].array() > 0.0).cast<double>()).matrix();
    }
  }
  return loss;
}

void sgd_step(ParamVector& params, const ParamVector& grad, double eta) {
  if (params.size() != grad.size()) throw DimensionMismatch("sgd_step: length mismatch");
  params -= eta * grad;
}

AdamState AdamState::init(Eigen::Index n) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(n);
  s.v = Eigen::VectorXd::Zero(n);
  return s;
}

void adam_step(ParamVector& params, const ParamVector& grad, AdamState& state, double eta) {
  if (params.size() != grad.size() || params.size() != state.m.size())
    throw DimensionMismatch("adam_step: length mismatch");
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -=
      eta * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + state.eps);
}

void fit_minibatch(const MlpSpec& spec, ParamVector& params, const LabeledBatch& full, int iters,
                   int batch_size, double eta, bool use_adam, Rng& rng) {
  const int M = full.size();
  if (M < 1 || iters < 1) return;
  const int bs = std::min(batch_size < 1 ? M : batch_size, M);
  AdamState st = AdamState::init(params.size());
  LabeledBatch mini;
  mini.inputs.resize(spec.input_dim(), bs);
  mini.labels.resize(bs);
  ParamVector g;
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < bs; ++i) {
      const int idx = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(M)));
      mini.inputs.col(i) = full.inputs.col(idx);
      mini.labels[i] = full.labels[idx];
    }
    loss_and_grad(spec, params, mini, g);
    if (use_adam)
      adam_step(params, g, st, eta);
    else
      sgd_step(params, g, eta);
  }
}

ParamVector hvp_finite_diff(const GradFn& grad_fn, const ParamVector& at, const ParamVector& v,
                            double step) {
  ParamVector gp(at.size()), gm(at.size());
  grad_fn(at + step * v, gp);
  grad_fn(at - step * v, gm);
  return (gp - gm) / (2.0 * step);
}

ParamVector hvp_finite_diff(const MlpSpec& spec, const ParamVector& params,
                            const LabeledBatch& batch, const ParamVector& v, double step) {
  const GradFn fn = [&](const ParamVector& p, ParamVector& g) {
    return loss_and_grad(spec, p, batch, g);
  };
  return hvp_finite_diff(fn, params, v, step);
}

void save_params(const std::filesystem::path& path, const MlpSpec& spec,
                 const ParamVector& params) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  for (std::size_t i = 0; i < spec.dims.size(); ++i) out << (i ? " " : "") << spec.dims[i];
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", params[i]);
    out << buf << '\n';
  }
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

std::pair<std::vector<int>, ParamVector> load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint: " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw ParseError("checkpoint missing header: " + path.string());
  std::vector<int> dims;
  std::stringstream hs(header);
  int d = 0;
  while (hs >> d) dims.push_back(d);
  if (dims.size() < 2) throw ParseError("checkpoint header too short: " + path.string());
  std::vector<double> vals;
  double x = 0.0;
  while (in >> x) vals.push_back(x);
  ParamVector p(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) p[static_cast<Eigen::Index>(i)] = vals[i];
  return {dims, p};
}

}  // namespace adrx::nn
