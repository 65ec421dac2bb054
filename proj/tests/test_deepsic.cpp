#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "adrx/deepsic.hpp"
#include "adrx/errors.hpp"
#include "adrx/rng.hpp"

using namespace adrx;
using namespace adrx::ds;

namespace {

Eigen::MatrixXd random_symbols(int K, int B, Rng& rng) {
  Eigen::MatrixXd S(K, B);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < B; ++i) S(k, i) = rng.uniform() < 0.5 ? 1.0 : -1.0;
  return S;
}

double symbol_error_rate(const Eigen::MatrixXd& estimates_p1, const Eigen::MatrixXd& S) {
  long errors = 0;
  for (Eigen::Index k = 0; k < S.rows(); ++k)
    for (Eigen::Index i = 0; i < S.cols(); ++i) {
      const double hard = estimates_p1(k, i) >= 0.5 ? 1.0 : -1.0;
      errors += hard != S(k, i);
    }
  return static_cast<double>(errors) / static_cast<double>(S.size());
}

}  // namespace

TEST_CASE("module spec stacks the observation with the interfering estimates") {
  const nn::MlpSpec spec = sic_module_spec(4, 4);
  CHECK(spec.dims == std::vector<int>{7, 100, 50, 2});
  CHECK(sic_module_spec(2, 2).dims == std::vector<int>{3, 100, 50, 2});
}

TEST_CASE("network construction is deterministic and per-module independent") {
  Rng a(9), b(9);
  const DeepSicNet na = make_deepsic(3, 2, 2, a);
  const DeepSicNet nb = make_deepsic(3, 2, 2, b);
  REQUIRE(na.params.size() == 6);
  for (std::size_t m = 0; m < na.params.size(); ++m)
    CHECK(na.params[m] == nb.params[m]);
  CHECK(na.params[0] != na.params[1]);
  CHECK(na.module_index({2, 1}) == 5);
}

TEST_CASE("zero-parameter modules output one-half everywhere and ties go to plus one") {
  Rng rng(11);
  DeepSicNet net = make_deepsic(4, 5, 4, rng);
  for (auto& p : net.params) p.setZero();
  const Eigen::MatrixXd Y = Eigen::MatrixXd::Random(4, 19);
  const ForwardResult fr = deepsic_forward(net, Y);
  REQUIRE(fr.per_iteration.size() == 5);
  for (const auto& est : fr.per_iteration) {
    REQUIRE(est.rows() == 4);
    REQUIRE(est.cols() == 19);
    CHECK((est.array() == 0.5).all());
  }
  CHECK((fr.hard.array() == 1.0).all());
}

TEST_CASE("forward pass produces valid per-iteration probabilities") {
  Rng rng(13);
  const DeepSicNet net = make_deepsic(4, 5, 4, rng);
  const Eigen::MatrixXd Y = Eigen::MatrixXd::Random(4, 152);
  const ForwardResult fr = deepsic_forward(net, Y);
  REQUIRE(fr.per_iteration.size() == 5);
  for (const auto& est : fr.per_iteration) {
    CHECK((est.array() >= 0.0).all());
    CHECK((est.array() <= 1.0).all());
  }
  REQUIRE(fr.hard.rows() == 4);
  REQUIRE(fr.hard.cols() == 152);
  CHECK((fr.hard.array().abs() == 1.0).all());
}

TEST_CASE("module batch layout: observation rows then ascending interferers, class 0 is +1") {
  Rng rng(17);
  const DeepSicNet net = make_deepsic(3, 2, 2, rng);
  const int B = 4;
  Eigen::MatrixXd Y(2, B);
  Y << 1, 2, 3, 4, 5, 6, 7, 8;
  Eigen::MatrixXd prev(3, B);
  prev << .1, .2, .3, .4, .5, .6, .7, .8, .91, .92, .93, .94;
  Eigen::RowVectorXd labels(B);
  labels << 1, -1, 1, -1;
  const nn::LabeledBatch batch = module_batch(net, {1, 1}, Y, prev, labels);
  REQUIRE(batch.size() == B);
  REQUIRE(batch.inputs.rows() == 4);  // N + K - 1
  CHECK(batch.inputs.row(0) == Y.row(0));
  CHECK(batch.inputs.row(1) == Y.row(1));
  CHECK(batch.inputs.row(2) == prev.row(0));  // user 0, then user 2 (user 1 excluded)
  CHECK(batch.inputs.row(3) == prev.row(2));
  CHECK(batch.labels == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("zero training iterations leave every module bit-identical") {
  Rng rng(19), trainer(23);
  DeepSicNet net = make_deepsic(2, 3, 2, rng);
  const std::vector<nn::ParamVector> before = net.params;
  const Eigen::MatrixXd S = random_symbols(2, 32, rng);
  const Eigen::MatrixXd Y = Eigen::MatrixXd::Random(2, 32);
  deepsic_train_sequential(net, S, Y, {0, 16, 1e-3, true}, all_modules(2, 3), trainer);
  for (std::size_t m = 0; m < before.size(); ++m) CHECK(net.params[m] == before[m]);
}

TEST_CASE("selective training touches only the listed modules") {
  Rng rng(29), trainer(31);
  DeepSicNet net = make_deepsic(3, 2, 2, rng);
  const std::vector<nn::ParamVector> before = net.params;
  const Eigen::MatrixXd S = random_symbols(3, 48, rng);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Random(2, 48);
  const std::vector<ModuleId> which = dynamic_module_set(1, 3, 2);
  REQUIRE(which.size() == 2);
  deepsic_train_sequential(net, S, Y, {5, 16, 1e-3, true}, which, trainer);
  for (int q = 0; q < 2; ++q)
    for (int k = 0; k < 3; ++k) {
      const int idx = net.module_index({k, q});
      if (k == 1)
        CHECK(net.params[static_cast<std::size_t>(idx)] !=
              before[static_cast<std::size_t>(idx)]);
      else
        CHECK(net.params[static_cast<std::size_t>(idx)] ==
              before[static_cast<std::size_t>(idx)]);
    }
}

TEST_CASE("dynamic module set covers one user across iterations and range-checks") {
  const std::vector<ModuleId> set = dynamic_module_set(2, 4, 5);
  REQUIRE(set.size() == 5);
  for (int q = 0; q < 5; ++q) {
    CHECK(set[static_cast<std::size_t>(q)].k == 2);
    CHECK(set[static_cast<std::size_t>(q)].q == q);
  }
  CHECK_THROWS_AS(dynamic_module_set(4, 4, 5), IndexOutOfRange);
  CHECK_THROWS_AS(dynamic_module_set(-1, 4, 5), IndexOutOfRange);
}

TEST_CASE("sequential training overfits one noiseless block to zero errors") {
  Rng rng(37), trainer(41);
  DeepSicNet net = make_deepsic(2, 3, 2, rng);
  const Eigen::MatrixXd S = random_symbols(2, 64, rng);
  const Eigen::MatrixXd Y = S;  // identity channel, no noise
  deepsic_train_sequential(net, S, Y, {300, 32, 1e-2, true}, all_modules(2, 3), trainer);
  const ForwardResult fr = deepsic_forward(net, Y);
  CHECK((fr.hard - S).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact-posterior modules never degrade with more cancellation iterations") {
  // Interference canceller wired to the true per-user posterior given the
  // interferer's soft estimate; with correct modules, later iterations must
  // not detect worse than the first (Monte-Carlo check).
  const int K = 2, N = 2, Q = 3, B = 64;
  Eigen::MatrixXd H(N, K);
  H << 1.0, 0.45, 0.45, 1.0;
  const double sigma = 0.45;
  const ModuleFn fn = [&](int k, int, const Eigen::VectorXd& input) {
    const int other = 1 - k;
    const double p_other = input[N];
    const Eigen::Vector2d y(input[0], input[1]);
    double num = 0.0, den = 0.0;
    for (const double sk : {1.0, -1.0})
      for (const double so : {1.0, -1.0}) {
        const Eigen::Vector2d mean = H.col(k) * sk + H.col(other) * so;
        const double w = (so > 0 ? p_other : 1.0 - p_other) *
                         std::exp(-(y - mean).squaredNorm() / (2.0 * sigma * sigma));
        den += w;
        if (sk > 0) num += w;
      }
    return den > 0.0 ? num / den : 0.5;
  };

  Rng rng(43);
  double ser_first = 0.0, ser_last = 0.0;
  const int blocks = 200;
  for (int b = 0; b < blocks; ++b) {
    const Eigen::MatrixXd S = random_symbols(K, B, rng);
    Eigen::MatrixXd Y = H * S;
    for (int n = 0; n < N; ++n)
      for (int i = 0; i < B; ++i) Y(n, i) += sigma * rng.normal();
    const ForwardResult fr = deepsic_forward(K, Q, N, fn, Y);
    ser_first += symbol_error_rate(fr.per_iteration.front(), S);
    ser_last += symbol_error_rate(fr.per_iteration.back(), S);
  }
  ser_first /= blocks;
  ser_last /= blocks;
  CHECK(ser_last < 0.5);
  CHECK(ser_last <= ser_first + 0.005);
}
