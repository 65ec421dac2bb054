#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "adrx/mlp.hpp"
#include "adrx/rng.hpp"

using namespace adrx;
using namespace adrx::nn;

namespace {

MlpSpec tiny_spec() { return {{3, 5, 4, 2}, {Act::sigmoid, Act::relu}}; }
MlpSpec equalizer_spec() { return {{1, 100, 50, 16}, {Act::sigmoid, Act::relu}}; }
MlpSpec sic_spec() { return {{7, 100, 50, 2}, {Act::sigmoid, Act::relu}}; }

LabeledBatch random_batch(const MlpSpec& spec, int M, Rng& rng) {
  LabeledBatch b;
  b.inputs.resize(spec.input_dim(), M);
  for (int i = 0; i < b.inputs.size(); ++i) b.inputs.data()[i] = rng.normal();
  b.labels.resize(M);
  for (auto& y : b.labels) y = static_cast<int>(rng.uniform_int(spec.output_dim()));
  return b;
}

// max_i |g_i - fd_i| / max(1, |g_i|, |fd_i|)
double grad_vs_central_diff(const MlpSpec& spec, const ParamVector& p, const LabeledBatch& b) {
  ParamVector g;
  loss_and_grad(spec, p, b, g);
  double worst = 0.0;
  ParamVector pp = p;
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    pp[i] = p[i] + h;
    const double lp = loss_value(spec, pp, b);
    pp[i] = p[i] - h;
    const double lm = loss_value(spec, pp, b);
    pp[i] = p[i];
    const double fd = (lp - lm) / (2.0 * h);
    const double denom = std::max({1.0, std::abs(g[i]), std::abs(fd)});
    worst = std::max(worst, std::abs(g[i] - fd) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("spec bookkeeping") {
  const auto s = equalizer_spec();
  CHECK(s.valid());
  CHECK(s.param_count() == 1 * 100 + 100 + 100 * 50 + 50 + 50 * 16 + 16);
  MlpSpec bad{{4}, {}};
  CHECK_FALSE(bad.valid());
}

TEST_CASE("glorot init") {
  Rng a(5), b(5), c(6);
  const auto spec = tiny_spec();
  const ParamVector p1 = mlp_init(spec, a);
  const ParamVector p2 = mlp_init(spec, b);
  const ParamVector p3 = mlp_init(spec, c);
  CHECK(p1 == p2);
  CHECK(p1 != p3);

  // Biases zero, weights within the Glorot bound.
  int off = 0;
  for (int l = 0; l < spec.num_layers(); ++l) {
    const double bound = std::sqrt(6.0 / (spec.dims[l] + spec.dims[l + 1]));
    for (int i = 0; i < spec.dims[l] * spec.dims[l + 1]; ++i)
      CHECK(std::abs(p1[off + i]) <= bound);
    off += spec.dims[l] * spec.dims[l + 1];
    for (int i = 0; i < spec.dims[l + 1]; ++i) CHECK(p1[off + i] == 0.0);
    off += spec.dims[l + 1];
  }
}

TEST_CASE("forward basics") {
  Rng rng(7);
  const auto spec = equalizer_spec();

  SUBCASE("zero params give the uniform distribution") {
    const ParamVector zeros = ParamVector::Zero(spec.param_count());
    Eigen::VectorXd x(1);
    x << 0.42;
    const auto p = forward_one(spec, zeros, x);
    REQUIRE(p.size() == 16);
    for (int i = 0; i < 16; ++i) CHECK(p[i] == doctest::Approx(1.0 / 16).epsilon(1e-12));
  }

  SUBCASE("softmax columns sum to one") {
    const ParamVector p = mlp_init(spec, rng);
    Eigen::MatrixXd X(1, 9);
    for (int i = 0; i < 9; ++i) X(0, i) = rng.normal();
    const auto P = forward(spec, p, X);
    for (int i = 0; i < 9; ++i) {
      CHECK(P.col(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(P.col(i).minCoeff() > 0.0);
    }
  }

  SUBCASE("dimension mismatch throws") {
    const ParamVector p = mlp_init(spec, rng);
    Eigen::MatrixXd X(2, 3);
    X.setZero();
    CHECK_THROWS_AS(forward(spec, p, X), DimensionMismatch);
  }
}

TEST_CASE("cross-entropy loss") {
  Rng rng(8);
  MlpSpec two{{3, 4, 2}, {Act::sigmoid}};

  SUBCASE("uniform output gives ln 2") {
    const ParamVector zeros = ParamVector::Zero(two.param_count());
    const auto b = random_batch(two, 6, rng);
    CHECK(loss_value(two, zeros, b) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("duplicating rows leaves loss and grad unchanged") {
    const ParamVector p = mlp_init(two, rng);
    const auto b = random_batch(two, 5, rng);
    LabeledBatch dup;
    dup.inputs.resize(two.input_dim(), 10);
    dup.inputs << b.inputs, b.inputs;
    dup.labels = b.labels;
    dup.labels.insert(dup.labels.end(), b.labels.begin(), b.labels.end());
    ParamVector g1, g2;
    const double l1 = loss_and_grad(two, p, b, g1);
    const double l2 = loss_and_grad(two, p, dup, g2);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
    CHECK((g1 - g2).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(9);
  SUBCASE("random tiny nets") {
    for (int trial = 0; trial < 8; ++trial) {
      const auto spec = tiny_spec();
      const ParamVector p = mlp_init(spec, rng);
      const auto b = random_batch(spec, 6, rng);
      CHECK(grad_vs_central_diff(spec, p, b) < 1e-4);
    }
  }
  SUBCASE("both receiver architectures") {
    for (const auto& spec : {equalizer_spec(), sic_spec()}) {
      const ParamVector p = mlp_init(spec, rng);
      const auto b = random_batch(spec, 4, rng);
      CHECK(grad_vs_central_diff(spec, p, b) < 1e-4);
    }
  }
}

TEST_CASE("optimizer steps") {
  Rng rng(10);
  const auto spec = tiny_spec();
  ParamVector p = mlp_init(spec, rng);
  const ParamVector orig = p;

  SUBCASE("sgd identities") {
    ParamVector g = ParamVector::Constant(p.size(), 0.5);
    sgd_step(p, g, 0.0);
    CHECK(p == orig);
    sgd_step(p, ParamVector::Zero(p.size()), 0.3);
    CHECK(p == orig);
    ParamVector twice = orig;
    sgd_step(twice, g, 0.1);
    sgd_step(twice, g, 0.1);
    ParamVector once = orig;
    sgd_step(once, g, 0.2);
    CHECK((twice - once).lpNorm<Eigen::Infinity>() < 1e-15);
  }

  SUBCASE("adam zero grad leaves params fixed") {
    AdamState st = AdamState::init(p.size());
    adam_step(p, ParamVector::Zero(p.size()), st, 1e-3);
    CHECK(p == orig);
    CHECK(st.step == 1);
  }

  SUBCASE("first adam step moves by about eta against the gradient sign") {
    AdamState st = AdamState::init(p.size());
    ParamVector g(p.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = (i % 2 ? 1.0 : -2.0);
    const double eta = 1e-3;
    adam_step(p, g, st, eta);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double delta = p[i] - orig[i];
      // First-step closed form: -eta * g / (|g| + eps_hat) with bias correction.
      CHECK(delta * g[i] < 0.0);
      CHECK(std::abs(delta) == doctest::Approx(eta).epsilon(1e-3));
    }
  }

  SUBCASE("200 adam steps crush a separable toy problem") {
    MlpSpec toy{{2, 8, 2}, {Act::relu}};
    Rng trng(11);
    ParamVector w = mlp_init(toy, trng);
    LabeledBatch b;
    b.inputs.resize(2, 40);
    b.labels.resize(40);
    for (int i = 0; i < 40; ++i) {
      const int cls = i % 2;
      b.inputs(0, i) = (cls ? 2.0 : -2.0) + 0.1 * trng.normal();
      b.inputs(1, i) = (cls ? -1.5 : 1.5) + 0.1 * trng.normal();
      b.labels[i] = cls;
    }
    ParamVector g;
    const double before = loss_and_grad(toy, w, b, g);
    AdamState st = AdamState::init(w.size());
    for (int it = 0; it < 200; ++it) {
      loss_and_grad(toy, w, b, g);
      adam_step(w, g, st, 1e-3);
    }
    const double after = loss_value(toy, w, b);
    CHECK(after < 0.1 * before);
  }
}

TEST_CASE("hessian-vector products") {
  SUBCASE("identity hessian of a pure quadratic") {
    const GradFn quad = [](const ParamVector& p, ParamVector& g) {
      g = p;
      return 0.5 * p.squaredNorm();
    };
    ParamVector at = ParamVector::Random(6);
    ParamVector v = ParamVector::Random(6);
    const ParamVector hv = hvp_finite_diff(quad, at, v, 1e-4);
    CHECK((hv - v).lpNorm<Eigen::Infinity>() < 1e-8);
  }

  SUBCASE("linear loss has zero hessian") {
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
    const GradFn lin = [&](const ParamVector& p, ParamVector& g) {
      g = c;
      return c.dot(p);
    };
    ParamVector at = ParamVector::Random(5);
    ParamVector v = ParamVector::Random(5);
    CHECK(hvp_finite_diff(lin, at, v, 1e-4).lpNorm<Eigen::Infinity>() < 1e-10);
  }

  SUBCASE("symmetry on a tiny net") {
    Rng rng(12);
    const auto spec = tiny_spec();
    const ParamVector p = mlp_init(spec, rng);
    const auto b = random_batch(spec, 5, rng);
    ParamVector u(p.size()), v(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      u[i] = rng.normal();
      v[i] = rng.normal();
    }
    const double uhv = u.dot(hvp_finite_diff(spec, p, b, v, 1e-5));
    const double vhu = v.dot(hvp_finite_diff(spec, p, b, u, 1e-5));
    const double denom = std::max(1.0, std::max(std::abs(uhv), std::abs(vhu)));
    CHECK(std::abs(uhv - vhu) / denom < 1e-3);
  }
}

TEST_CASE("checkpoint round trip") {
  namespace fs = std::filesystem;
  Rng rng(13);
  const auto spec = tiny_spec();
  const ParamVector p = mlp_init(spec, rng);
  const fs::path f = fs::temp_directory_path() / "adrx_nn_ckpt.txt";
  save_params(f, spec, p);
  const auto [dims, q] = load_params(f);
  CHECK(dims == spec.dims);
  REQUIRE(q.size() == p.size());
  CHECK((q - p).lpNorm<Eigen::Infinity>() == 0.0);
}
