#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "sagin/neural.hpp"

using namespace sagin;
using namespace sagin::neural;

namespace {

MlpParams single_affine(std::size_t in, std::size_t out) {
  MlpParams p;
  p.input_dim = static_cast<int>(in);
  AffineParams a;
  a.w = RealMatrix(in, out);
  a.b.assign(out, 0.0);
  p.layers.emplace_back(std::move(a));
  return p;
}

bool params_equal(const MlpParams& a, const MlpParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].index() != b.layers[i].index()) return false;
    if (const auto* aa = std::get_if<AffineParams>(&a.layers[i])) {
      const auto& bb = std::get<AffineParams>(b.layers[i]);
      if (aa->w.data != bb.w.data || aa->b != bb.b) return false;
    } else if (const auto* an = std::get_if<BatchNormParams>(&a.layers[i])) {
      const auto& bn = std::get<BatchNormParams>(b.layers[i]);
      if (an->gamma != bn.gamma || an->beta != bn.beta ||
          an->running_mean != bn.running_mean || an->running_var != bn.running_var ||
          an->momentum != bn.momentum || an->eps != bn.eps)
        return false;
    } else {
      if (std::get<PreluParams>(a.layers[i]).slope != std::get<PreluParams>(b.layers[i]).slope)
        return false;
    }
  }
  return a.tanh_output == b.tanh_output && a.output_scale == b.output_scale &&
         a.action_concat_before == b.action_concat_before && a.input_dim == b.input_dim &&
         a.action_dim == b.action_dim;
}

}  // namespace

TEST_CASE("actor with zero parameters emits zero actions") {
  Rng rng(1, 0);
  MlpParams actor = make_actor(4, 3, {8, 6}, 2.5, rng);
  for (auto& layer : actor.layers) {
    if (auto* aff = std::get_if<AffineParams>(&layer)) {
      for (double& v : aff->w.data) v = 0.0;
      for (double& v : aff->b) v = 0.0;
    }
  }
  RealMatrix x(3, 4);
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = std::sin(double(i));
  const RealMatrix y = infer(actor, x);
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("batch norm over [0, 2] yields +-1 up to epsilon") {
  MlpParams p;
  p.input_dim = 1;
  BatchNormParams bn;
  bn.gamma = {1.0};
  bn.beta = {0.0};
  bn.running_mean = {0.0};
  bn.running_var = {1.0};
  p.layers.emplace_back(bn);

  RealMatrix x(2, 1);
  x(0, 0) = 0.0;
  x(1, 0) = 2.0;
  auto res = forward(p, x, nullptr, Mode::kTraining);
  const double expected = 1.0 / std::sqrt(1.0 + 1.0e-5);  // mean 1, population var 1
  CHECK(res.output(0, 0) == doctest::Approx(-expected).epsilon(1e-12));
  CHECK(res.output(1, 0) == doctest::Approx(expected).epsilon(1e-12));

  // Running statistics moved toward the batch statistics with momentum 0.1.
  const auto& updated = std::get<BatchNormParams>(p.layers[0]);
  CHECK(updated.running_mean[0] == doctest::Approx(0.1 * 1.0).epsilon(1e-12));
  CHECK(updated.running_var[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 1.0).epsilon(1e-12));
}

TEST_CASE("prelu definition") {
  MlpParams p;
  p.input_dim = 1;
  PreluParams pr;
  pr.slope = {0.25};
  p.layers.emplace_back(pr);
  RealMatrix x(2, 1);
  x(0, 0) = -4.0;
  x(1, 0) = 4.0;
  const RealMatrix y = infer(p, x);
  CHECK(y(0, 0) == doctest::Approx(-1.0));
  CHECK(y(1, 0) == doctest::Approx(4.0));
}

TEST_CASE("training-mode batch norm requires batch size >= 2") {
  Rng rng(2, 0);
  MlpParams actor = make_actor(3, 2, {4}, 1.0, rng);
  RealMatrix x(1, 3);
  CHECK_THROWS_AS(forward(actor, x, nullptr, Mode::kTraining), std::invalid_argument);
  CHECK_NOTHROW(forward(actor, x, nullptr, Mode::kInference));
}

TEST_CASE("affine backward: weight grad = input, bias grad = 1") {
  MlpParams p = single_affine(3, 1);
  RealMatrix x(1, 3);
  x(0, 0) = 0.5;
  x(0, 1) = -1.25;
  x(0, 2) = 2.0;
  auto fwd = forward(p, x, nullptr, Mode::kTraining);
  RealMatrix g(1, 1);
  g(0, 0) = 1.0;
  auto back = backward(p, fwd.cache, g);
  const auto& ga = std::get<AffineParams>(back.grads.layers[0]);
  CHECK(ga.w(0, 0) == doctest::Approx(0.5));
  CHECK(ga.w(1, 0) == doctest::Approx(-1.25));
  CHECK(ga.w(2, 0) == doctest::Approx(2.0));
  CHECK(ga.b[0] == doctest::Approx(1.0));
}

TEST_CASE("grad_input of the tanh-scaled head at zero is a_max times the weight row") {
  MlpParams p = single_affine(2, 1);
  p.tanh_output = true;
  p.output_scale = 3.0;
  auto& aff = std::get<AffineParams>(p.layers[0]);
  aff.w(0, 0) = 0.7;
  aff.w(1, 0) = -0.2;
  RealMatrix x(1, 2);  // zero input -> tanh'(0) = 1
  auto fwd = forward(p, x, nullptr, Mode::kTraining);
  RealMatrix g(1, 1);
  g(0, 0) = 1.0;
  auto back = backward(p, fwd.cache, g);
  CHECK(back.grad_input(0, 0) == doctest::Approx(3.0 * 0.7).epsilon(1e-12));
  CHECK(back.grad_input(0, 1) == doctest::Approx(3.0 * -0.2).epsilon(1e-12));
}

TEST_CASE("finite differences confirm the analytic gradients") {
  const auto report = gradient_check(12, 42);
  CHECK(report.parameters_checked > 500);
  CHECK(report.max_rel_error <= 1.0e-4);
}

TEST_CASE("optimizer_step update rule and decay exemptions") {
  MlpParams p = single_affine(1, 1);
  auto& aff = std::get<AffineParams>(p.layers[0]);
  aff.w(0, 0) = 1.0;
  aff.b[0] = 1.0;

  MlpGrads zero;
  AffineParams g0;
  g0.w = RealMatrix(1, 1);
  g0.b.assign(1, 0.0);
  zero.layers.emplace_back(g0);

  MlpParams no_decay = p;
  optimizer_step(no_decay, zero, 0.01, 0.0);
  CHECK(std::get<AffineParams>(no_decay.layers[0]).w(0, 0) == 1.0);

  optimizer_step(p, zero, 0.01, 1.0e-5);
  CHECK(std::get<AffineParams>(p.layers[0]).w(0, 0) == doctest::Approx(0.9999999).epsilon(1e-15));
  // Bias is exempt from weight decay.
  CHECK(std::get<AffineParams>(p.layers[0]).b[0] == 1.0);

  MlpGrads bad = zero;
  std::get<AffineParams>(bad.layers[0]).w(0, 0) = std::nan("");
  CHECK_THROWS_WITH_AS(optimizer_step(p, bad, 0.01, 0.0), doctest::Contains("layer 0"),
                       std::runtime_error);
}

TEST_CASE("blend_params convex combination including running stats") {
  Rng rng(3, 0);
  MlpParams target = make_critic(3, 2, {4}, rng);
  MlpParams source = make_critic(3, 2, {4}, rng);

  MlpParams hard = target;
  blend_params(hard, source, 1.0);
  CHECK(params_equal(hard, source));

  MlpParams keep = target;
  blend_params(keep, source, 0.0);
  CHECK(params_equal(keep, target));

  // Scalar probe: 0 blended with 1 at 0.005, and the gap contracts by 1-rho.
  MlpParams t0 = single_affine(1, 1);
  MlpParams s1 = single_affine(1, 1);
  std::get<AffineParams>(s1.layers[0]).w(0, 0) = 1.0;
  blend_params(t0, s1, 0.005);
  CHECK(std::get<AffineParams>(t0.layers[0]).w(0, 0) == doctest::Approx(0.005).epsilon(1e-15));
  const double gap = 1.0 - std::get<AffineParams>(t0.layers[0]).w(0, 0);
  CHECK(gap == doctest::Approx(0.995).epsilon(1e-12));

  MlpParams mismatched = make_critic(3, 2, {5}, rng);
  CHECK_THROWS_AS(blend_params(mismatched, source, 0.5), std::invalid_argument);
}

TEST_CASE("actor outputs are bounded by a_max") {
  Rng rng(4, 0);
  const double a_max = 0.37;
  MlpParams actor = make_actor(6, 5, {16, 8}, a_max, rng);
  RealMatrix x(8, 6);
  for (double& v : x.data) v = 10.0 * rng.gaussian();
  auto out = forward(actor, x, nullptr, Mode::kTraining).output;
  for (double v : out.data) {
    CHECK(v <= a_max);
    CHECK(v >= -a_max);
  }
}

TEST_CASE("batch-norm training output is standardized per feature") {
  MlpParams p;
  p.input_dim = 3;
  BatchNormParams bn;
  bn.gamma.assign(3, 1.0);
  bn.beta.assign(3, 0.0);
  bn.running_mean.assign(3, 0.0);
  bn.running_var.assign(3, 1.0);
  p.layers.emplace_back(bn);

  Rng rng(5, 0);
  RealMatrix x(64, 3);
  for (double& v : x.data) v = 3.0 + 2.0 * rng.gaussian();
  auto out = forward(p, x, nullptr, Mode::kTraining).output;
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (std::size_t r = 0; r < 64; ++r) mean += out(r, c);
    mean /= 64.0;
    for (std::size_t r = 0; r < 64; ++r) var += (out(r, c) - mean) * (out(r, c) - mean);
    var /= 64.0;
    CHECK(std::abs(mean) <= 1.0e-9);
    CHECK(std::abs(var - 1.0) <= 1.0e-4);  // eps shifts the variance by ~1e-5
  }
}

TEST_CASE("initialization is deterministic per (seed, stream)") {
  Rng a(42, 3), b(42, 3);
  const MlpParams pa = make_actor(10, 4, {16, 8}, 1.0, a);
  const MlpParams pb = make_actor(10, 4, {16, 8}, 1.0, b);
  CHECK(params_equal(pa, pb));
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  Rng rng(6, 0);
  MlpParams critic = make_critic(5, 3, {8, 4}, rng);
  // Dirty the running statistics so the round trip covers them.
  RealMatrix s(4, 5), a(4, 3);
  for (double& v : s.data) v = rng.gaussian();
  for (double& v : a.data) v = rng.gaussian();
  forward(critic, s, &a, Mode::kTraining);

  const std::string path = "checkpoint_roundtrip_test.json";
  save_checkpoint(critic, path);
  const MlpParams loaded = load_checkpoint(path);
  CHECK(params_equal(critic, loaded));
  std::remove(path.c_str());

  const MlpParams reloaded = checkpoint_from_json(checkpoint_to_json(loaded));
  CHECK(params_equal(loaded, reloaded));
}

TEST_CASE("training caches are single-use and owner-checked") {
  Rng rng(7, 0);
  MlpParams actor = make_actor(3, 2, {4}, 1.0, rng);
  RealMatrix x(2, 3);
  for (double& v : x.data) v = rng.gaussian();
  auto fwd = forward(actor, x, nullptr, Mode::kTraining);
  RealMatrix g(2, 2);
  for (double& v : g.data) v = 1.0;
  CHECK_NOTHROW(backward(actor, fwd.cache, g));
  CHECK_THROWS_AS(backward(actor, fwd.cache, g), std::invalid_argument);

  auto fwd2 = forward(actor, x, nullptr, Mode::kTraining);
  MlpParams other = actor;
  CHECK_THROWS_AS(backward(other, fwd2.cache, g), std::invalid_argument);

  auto inf = forward(actor, x, nullptr, Mode::kInference);
  CHECK_THROWS_AS(backward(actor, inf.cache, g), std::invalid_argument);
}
