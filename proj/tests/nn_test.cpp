#include <doctest.h>

#include <cmath>
#include <string>

#include "lowalt/errors.hpp"
#include "lowalt/nn.hpp"
#include "lowalt/rng.hpp"

using namespace lowalt;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng,
                              double lo = -1.0, double hi = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

// Zero-initialized biases park relu units exactly on their kink whenever a
// batch row dies in the previous layer, and central differences straddle the
// kink while the analytic subgradient picks one side. Checking at a generic
// point (random biases, as after any training step) keeps the comparison
// meaningful.
void randomize_biases(MlpParams& p, Rng& rng) {
  for (auto& b : p.b)
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-0.5, 0.5);
}

}  // namespace

TEST_CASE("analytic gradients match central differences on 20 seeded nets") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 101);
    MlpSpec spec;
    spec.input_dim = 1 + static_cast<int>(seed % 8);  // 1..8
    spec.hidden = {4, 4};
    spec.output_dim = 2;
    spec.head = Head::kLinear;
    MlpParams p = glorot_init(spec, seed);
    randomize_biases(p, rng);
    const Eigen::MatrixXd x = random_matrix(3, spec.input_dim, rng);
    const Eigen::MatrixXd dy = random_matrix(3, spec.output_dim, rng);

    ForwardCache cache;
    mlp_forward(spec, p, x, &cache);
    MlpGrads grads = zero_grads(p);
    mlp_backward(spec, p, cache, dy, grads);

    const auto f = [&](const MlpParams& q) {
      return (mlp_forward(spec, q, x).array() * dy.array()).sum();
    };
    const GradCheckReport rep = gradient_check(f, p, grads);
    CAPTURE(seed);
    CHECK(rep.max_rel_err <= 1e-4);
  }
}

TEST_CASE("squashed-gaussian head gradients match central differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 977);
    MlpSpec spec;
    spec.input_dim = 1 + static_cast<int>(seed % 8);
    spec.hidden = {4, 4};
    spec.output_dim = 2;
    spec.head = Head::kGaussianPolicy;
    MlpParams p = glorot_init(spec, seed + 400);
    randomize_biases(p, rng);
    const Eigen::MatrixXd x = random_matrix(3, spec.input_dim, rng);
    const Eigen::MatrixXd noise = random_matrix(3, spec.output_dim, rng);
    const Eigen::MatrixXd d_action = random_matrix(3, spec.output_dim, rng);
    Eigen::VectorXd d_log_prob(3);
    for (int r = 0; r < 3; ++r) d_log_prob[r] = rng.uniform(-1.0, 1.0);

    ForwardCache cache;
    const Eigen::MatrixXd raw = mlp_forward(spec, p, x, &cache);
    const GaussianOut g = split_gaussian(raw);
    const SquashedSample s = sample_squashed(g, noise);
    const Eigen::MatrixXd d_raw =
        squashed_backward(raw, g, s, noise, d_action, d_log_prob);
    MlpGrads grads = zero_grads(p);
    mlp_backward(spec, p, cache, d_raw, grads);

    const auto f = [&](const MlpParams& q) {
      const GaussianOut gq = split_gaussian(mlp_forward(spec, q, x));
      const SquashedSample sq = sample_squashed(gq, noise);
      double v = (sq.action.array() * d_action.array()).sum();
      for (int r = 0; r < 3; ++r) v += d_log_prob[r] * sq.log_prob[r];
      return v;
    };
    const GradCheckReport rep = gradient_check(f, p, grads);
    CAPTURE(seed);
    CHECK(rep.max_rel_err <= 1e-4);
  }
}

TEST_CASE("forward pass hand cases") {
  MlpSpec spec;
  spec.input_dim = 1;
  spec.hidden = {1};
  spec.output_dim = 1;

  MlpParams p;
  p.w = {Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 3.0)};
  p.b = {Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 0.5)};

  Eigen::MatrixXd x(2, 1);
  x << 2.0, 0.0;  // pre-activations 3 and -1
  const Eigen::MatrixXd y = mlp_forward(spec, p, x);
  CHECK(y(0, 0) == doctest::Approx(9.5).epsilon(1e-12));   // relu passes 3
  CHECK(y(1, 0) == doctest::Approx(0.5).epsilon(1e-12));   // relu clips -1

  spec.activation = Activation::kTanh;
  const Eigen::MatrixXd yt = mlp_forward(spec, p, x);
  CHECK(yt(0, 0) == doctest::Approx(3.0 * std::tanh(3.0) + 0.5).epsilon(1e-12));
  CHECK(yt(1, 0) == doctest::Approx(3.0 * std::tanh(-1.0) + 0.5).epsilon(1e-12));
}

TEST_CASE("no hidden layers means a single linear map") {
  MlpSpec spec;
  spec.input_dim = 3;
  spec.hidden = {};
  spec.output_dim = 3;
  MlpParams p;
  p.w = {Eigen::MatrixXd::Identity(3, 3)};
  p.b = {Eigen::VectorXd::Zero(3)};
  Rng rng(2);
  const Eigen::MatrixXd x = random_matrix(4, 3, rng);
  CHECK(mlp_forward(spec, p, x) == x);
}

TEST_CASE("zero weights give zero output regardless of input") {
  MlpSpec spec;
  spec.input_dim = 4;
  spec.hidden = {4, 4};
  spec.output_dim = 2;
  MlpParams p = glorot_init(spec, 1);
  for (auto& w : p.w) w.setZero();
  Rng rng(3);
  const Eigen::MatrixXd y = mlp_forward(spec, p, random_matrix(5, 4, rng));
  CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("glorot draws respect the layer bound and the seed") {
  MlpSpec spec;
  spec.input_dim = 6;
  spec.hidden = {4, 4};
  spec.output_dim = 2;
  const MlpParams a = glorot_init(spec, 9);
  const MlpParams b = glorot_init(spec, 9);
  const MlpParams c = glorot_init(spec, 10);
  REQUIRE(a.w.size() == 3);
  for (std::size_t l = 0; l < a.w.size(); ++l) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(a.w[l].rows() + a.w[l].cols()));
    CHECK(a.w[l].cwiseAbs().maxCoeff() <= bound);
    CHECK(a.b[l].cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.w[l] == b.w[l]);
  }
  CHECK(a.w[0] != c.w[0]);
}

TEST_CASE("gaussian head split clamps the log-std half") {
  Eigen::MatrixXd raw(1, 4);
  raw << 0.3, -0.7, 5.0, -50.0;
  const GaussianOut g = split_gaussian(raw);
  CHECK(g.mean(0, 0) == 0.3);
  CHECK(g.mean(0, 1) == -0.7);
  CHECK(g.log_std(0, 0) == kLogStdMax);
  CHECK(g.log_std(0, 1) == kLogStdMin);
}

TEST_CASE("squashed sample matches a by-hand density at unit std") {
  GaussianOut g;
  g.mean = Eigen::MatrixXd::Constant(1, 1, 1.0);
  g.log_std = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(1, 1);
  const SquashedSample s = sample_squashed(g, noise);
  CHECK(s.action(0, 0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
  const double t = std::tanh(1.0);
  const double expect = -0.5 * std::log(2.0 * M_PI) - std::log(1.0 - t * t + kSquashEps);
  CHECK(s.log_prob[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("squashed actions stay inside the box even when tanh saturates") {
  // Moderate pre-tanh values stay strictly interior.
  GaussianOut g;
  g.mean = Eigen::MatrixXd::Constant(1, 2, 3.0);
  g.log_std = Eigen::MatrixXd::Zero(1, 2);
  Eigen::MatrixXd noise(1, 2);
  noise << 2.0, -8.0;
  const SquashedSample mid = sample_squashed(g, noise);
  CHECK(mid.action(0, 0) < 1.0);
  CHECK(mid.action(0, 1) > -1.0);

  // Huge ones round to the box corners in floating point; the density guard
  // still keeps the log-probability finite.
  g.mean = Eigen::MatrixXd::Constant(2, 2, 30.0);
  g.log_std = Eigen::MatrixXd::Constant(2, 2, kLogStdMax);
  Eigen::MatrixXd big(2, 2);
  big << 100.0, -100.0, 0.0, 50.0;
  const SquashedSample s = sample_squashed(g, big);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) CHECK(std::abs(s.action(r, c)) <= 1.0);
  CHECK(std::isfinite(s.log_prob[0]));
  CHECK(std::isfinite(s.log_prob[1]));
}

TEST_CASE("log density of a stored action matches the sampling path") {
  Rng rng(44);
  GaussianOut g;
  g.mean = random_matrix(3, 2, rng);
  g.log_std = random_matrix(3, 2, rng, -1.0, 0.5);
  const Eigen::MatrixXd noise = random_matrix(3, 2, rng);
  const SquashedSample s = sample_squashed(g, noise);
  for (int r = 0; r < 3; ++r) {
    const Eigen::VectorXd a = s.action.row(r).transpose();
    CHECK(squashed_log_prob(g, r, a) == doctest::Approx(s.log_prob[r]).epsilon(1e-6));
  }
}

TEST_CASE("adam first step moves by roughly lr times the gradient sign") {
  MlpSpec spec;
  spec.input_dim = 1;
  spec.hidden = {};
  spec.output_dim = 1;
  MlpParams p;
  p.w = {Eigen::MatrixXd::Zero(1, 1)};
  p.b = {Eigen::VectorXd::Zero(1)};
  AdamState st = AdamState::zeros_like(p);
  MlpGrads g = zero_grads(p);
  g.w[0](0, 0) = 3.7;
  g.b[0](0) = -0.2;
  AdamConfig cfg;
  cfg.lr = 1e-2;
  adam_update(p, g, st, cfg);
  CHECK(p.w[0](0, 0) == doctest::Approx(-1e-2).epsilon(1e-6));
  CHECK(p.b[0](0) == doctest::Approx(1e-2).epsilon(1e-6));
  CHECK(st.step == 1);

  // A zero gradient leaves a fresh optimizer's parameter in place.
  MlpParams q;
  q.w = {Eigen::MatrixXd::Constant(1, 1, 0.25)};
  q.b = {Eigen::VectorXd::Zero(1)};
  AdamState st2 = AdamState::zeros_like(q);
  MlpGrads zg = zero_grads(q);
  adam_update(q, zg, st2, cfg);
  CHECK(q.w[0](0, 0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("checkpoints round-trip weights and optimizer state exactly") {
  MlpSpec spec;
  spec.input_dim = 5;
  spec.hidden = {4, 4};
  spec.output_dim = 2;
  spec.head = Head::kGaussianPolicy;
  MlpParams p = glorot_init(spec, 31);
  AdamState st = AdamState::zeros_like(p);
  MlpGrads g = zero_grads(p);
  Rng rng(8);
  for (auto& w : g.w) w = random_matrix(w.rows(), w.cols(), rng);
  adam_update(p, g, st, {});

  const std::string text = save_weights(spec, p, &st);
  const LoadedNet net = load_weights(text);
  CHECK(net.spec.input_dim == spec.input_dim);
  CHECK(net.spec.hidden == spec.hidden);
  CHECK(net.spec.head == spec.head);
  REQUIRE(net.opt.has_value());
  CHECK(net.opt->step == st.step);
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    CHECK(net.params.w[l] == p.w[l]);
    CHECK(net.params.b[l] == p.b[l]);
    CHECK(net.opt->mw[l] == st.mw[l]);
    CHECK(net.opt->vw[l] == st.vw[l]);
  }
  CHECK(save_weights(net.spec, net.params, &*net.opt) == text);

  const std::string no_opt = save_weights(spec, p);
  CHECK_FALSE(load_weights(no_opt).opt.has_value());
}

TEST_CASE("checkpoint loading rejects bad input") {
  MlpSpec spec;
  spec.input_dim = 2;
  spec.hidden = {3};
  spec.output_dim = 1;
  const MlpParams p = glorot_init(spec, 5);
  std::string text = save_weights(spec, p);
  const auto at = text.find("\"format_version\":");
  REQUIRE(at != std::string::npos);
  std::string bumped = text;
  bumped.replace(at, 18, "\"format_version\":9");
  CHECK_THROWS_AS(load_weights(bumped), VersionMismatch);
  CHECK_THROWS_AS(load_weights("{broken"), ParseError);
}

TEST_CASE("forward rejects mismatched input width") {
  MlpSpec spec;
  spec.input_dim = 4;
  spec.hidden = {4};
  spec.output_dim = 1;
  const MlpParams p = glorot_init(spec, 3);
  CHECK_THROWS_AS(mlp_forward(spec, p, Eigen::MatrixXd::Zero(2, 5)), ShapeMismatch);
}
