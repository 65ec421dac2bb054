#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <vector>

#include "adrx/errors.hpp"
#include "adrx/rng.hpp"

namespace adrx::nn {

enum class Act { sigmoid, relu };

// Fully-connected softmax classifier.  acts[i] follows layer i+1's affine map;
// the final layer is always softmax.
struct MlpSpec {
  std::vector<int> dims;
  std::vector<Act> acts;

  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }
  int num_layers() const { return static_cast<int>(dims.size()) - 1; }
  int param_count() const;
  bool valid() const;
};

// Flat parameter storage: for each layer, the weight matrix (column-major,
// shape d_out x d_in) followed by the bias vector.
using ParamVector = Eigen::VectorXd;

ParamVector mlp_init(const MlpSpec& spec, Rng& rng);  // Glorot-uniform weights, zero biases

struct LabeledBatch {
  Eigen::MatrixXd inputs;   // d_in x M
  std::vector<int> labels;  // M class indices
  int size() const { return static_cast<int>(labels.size()); }
};

// Softmax outputs for a batch of columns; entries positive, columns sum to 1.
Eigen::MatrixXd forward(const MlpSpec& spec, const ParamVector& params, const Eigen::MatrixXd& X);
Eigen::VectorXd forward_one(const MlpSpec& spec, const ParamVector& params,
                            const Eigen::VectorXd& x);

double loss_value(const MlpSpec& spec, const ParamVector& params, const LabeledBatch& batch);

// Mean cross-entropy and its exact gradient.  Predicted probabilities are
// clamped at 1e-30 before the log; *underflow reports whether that triggered.
double loss_and_grad(const MlpSpec& spec, const ParamVector& params, const LabeledBatch& batch,
                     ParamVector& grad, bool* underflow = nullptr);

void sgd_step(ParamVector& params, const ParamVector& grad, double eta);

struct AdamState {
  Eigen::VectorXd m, v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState init(Eigen::Index n);
};

void adam_step(ParamVector& params, const ParamVector& grad, AdamState& state, double eta);

// iters optimizer steps on mean cross-entropy, each over batch_size examples
// sampled uniformly with replacement from `full`; fresh Adam state when
// use_adam is set, plain SGD otherwise.
void fit_minibatch(const MlpSpec& spec, ParamVector& params, const LabeledBatch& full, int iters,
                   int batch_size, double eta, bool use_adam, Rng& rng);

// Gradient oracle: writes the gradient at p into g, returns the loss.
using GradFn = std::function<double(const ParamVector& p, ParamVector& g)>;

// Central-difference Hessian-vector product of any gradient oracle.
ParamVector hvp_finite_diff(const GradFn& grad_fn, const ParamVector& at, const ParamVector& v,
                            double step);
ParamVector hvp_finite_diff(const MlpSpec& spec, const ParamVector& params,
                            const LabeledBatch& batch, const ParamVector& v, double step);

// Text checkpoint: layer dims header, then one %.17g value per line.
void save_params(const std::filesystem::path& path, const MlpSpec& spec,
                 const ParamVector& params);
std::pair<std::vector<int>, ParamVector> load_params(const std::filesystem::path& path);

}  // namespace adrx::nn
