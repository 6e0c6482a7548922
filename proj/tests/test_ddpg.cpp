#include <doctest.h>

#include <cmath>

#include "sagin/ddpg.hpp"

using namespace sagin;

namespace {

neural::MlpParams toy_actor(double a_max) {
  // mu(s) = a_max * tanh(w s + b), 1-D state and action.
  neural::MlpParams p;
  p.input_dim = 1;
  p.tanh_output = true;
  p.output_scale = a_max;
  neural::AffineParams a;
  a.w = RealMatrix(1, 1);
  a.b.assign(1, 0.0);
  p.layers.emplace_back(std::move(a));
  return p;
}

// Exact critic Q(s, a) = -|a - 1| built from affine + PReLU(slope -1) layers.
neural::MlpParams toy_abs_critic() {
  neural::MlpParams p;
  p.input_dim = 1;
  p.action_dim = 1;
  p.action_concat_before = 0;
  neural::AffineParams a0;  // [s, a] -> a - 1
  a0.w = RealMatrix(2, 1);
  a0.w(0, 0) = 0.0;
  a0.w(1, 0) = 1.0;
  a0.b.assign(1, -1.0);
  p.layers.emplace_back(std::move(a0));
  neural::PreluParams abs_layer;  // slope -1: |x|
  abs_layer.slope = {-1.0};
  p.layers.emplace_back(std::move(abs_layer));
  neural::AffineParams a1;  // negate
  a1.w = RealMatrix(1, 1);
  a1.w(0, 0) = -1.0;
  a1.b.assign(1, 0.0);
  p.layers.emplace_back(std::move(a1));
  return p;
}

std::vector<Experience> constant_batch(std::size_t n, std::size_t state_dim,
                                       std::size_t action_dim) {
  std::vector<Experience> xs(n);
  for (auto& e : xs) {
    e.state.assign(state_dim, 0.0);
    e.action.assign(action_dim, 0.0);
    e.next_state.assign(state_dim, 0.0);
    e.reward = 0.0;
  }
  return xs;
}

std::vector<const Experience*> pointers(const std::vector<Experience>& xs) {
  std::vector<const Experience*> out;
  for (const auto& e : xs) out.push_back(&e);
  return out;
}

GeometryConfig tiny_geometry() {
  GeometryConfig geo;
  geo.n_antennas = 4;
  geo.ris_side = 2;
  geo.k_sat = 1;
  geo.k_ue = 1;
  return geo;
}

}  // namespace

TEST_CASE("encode_state layout and bijection") {
  ComplexMatrix h(2, 3);
  for (std::size_t i = 0; i < h.data().size(); ++i)
    h.data()[i] = cplx(double(i), -double(i) - 0.5);
  const auto v = encode_state(h);
  REQUIRE(v.size() == 12);
  CHECK(v[0] == 0.0);
  CHECK(v[5] == 5.0);
  CHECK(v[6] == -0.5);

  const ComplexMatrix back = decode_matrix(v, 2, 3);
  for (std::size_t i = 0; i < h.data().size(); ++i) CHECK(back.data()[i] == h.data()[i]);

  ComplexMatrix real_h(2, 2);
  real_h(0, 0) = 3.0;
  real_h(1, 1) = -2.0;
  const auto rv = encode_state(real_h);
  for (std::size_t i = 4; i < 8; ++i) CHECK(rv[i] == 0.0);
}

TEST_CASE("decode_action packs and projects onto the budget") {
  GeometryConfig geo = tiny_geometry();  // N=4, streams=2, P_t=1
  const std::size_t dim = 2 * 4 * 2;

  std::vector<double> zero(dim, 0.0);
  const BeamformingMatrix wz = decode_action(zero, geo);
  CHECK(total_power(wz) == 0.0);

  // Within budget: exact bijection with the packing convention.
  std::vector<double> small(dim, 0.01);
  const BeamformingMatrix ws = decode_action(small, geo);
  CHECK(ws.w(0, 0) == cplx(0.01, 0.01));
  CHECK(total_power(ws) == doctest::Approx(dim * 1e-4).epsilon(1e-12));

  // Overpowered: projected to exactly P_t.
  std::vector<double> big(dim, 10.0);
  const BeamformingMatrix wb = decode_action(big, geo);
  CHECK(total_power(wb) == doctest::Approx(geo.p_t_watts).epsilon(1e-9));

  std::vector<double> short_vec(dim - 1, 0.0);
  CHECK_THROWS_AS(decode_action(short_vec, geo), std::invalid_argument);
}

TEST_CASE("compute_reward plug-in cases") {
  GeometryConfig geo = tiny_geometry();
  geo.k_ue = 2;  // 3 streams, N=4

  UserDistSpec dist;
  dist.fixed_count = 2;
  Rng rng(31, 0);
  const UserLayout layout = place_users(geo, dist, rng);
  const RisGeometry geom = ris_geometry(geo, layout);
  const auto profile = ris_phase_profile(geom.incidence_rad, geom.user_bearing_rad[0], geo);
  Rng crng(31, 1);
  const ChannelSet cs = build_channels(geo, layout, profile, crng);
  const double sigma2 = 7.98e-12;

  // Zero beams: pure violation at the 1e-12 floor, log10(1/1e-12) = 12 per user.
  BeamformingMatrix zero{ComplexMatrix(4, 3)};
  CHECK(compute_reward(cs.h_composite, zero, sigma2, geo, 0.1, 1.0) ==
        doctest::Approx(-24.0).epsilon(1e-12));

  // Minimum-power ZF meets gamma_min = 1 exactly: r = K_UE - lp * P_zf / P_t.
  const BeamformingMatrix wzf =
      min_power_scaling(zf_directions(cs.h_composite), cs.h_composite, 1.0, sigma2);
  const double p_zf = total_power(wzf);
  const double r = compute_reward(cs.h_composite, wzf, sigma2, geo, 0.1, 1.0);
  CHECK(r == doctest::Approx(2.0 - 0.1 * p_zf / geo.p_t_watts).epsilon(1e-9));

  // Raising every SINR raises the sum-rate term.
  const BeamformingMatrix w4 =
      min_power_scaling(zf_directions(cs.h_composite), cs.h_composite, 4.0, sigma2);
  CHECK(compute_reward(cs.h_composite, w4, sigma2, geo, 0.0, 0.0) >
        compute_reward(cs.h_composite, wzf, sigma2, geo, 0.0, 0.0));
}

TEST_CASE("replay buffer FIFO eviction") {
  ReplayBuffer buf(1000);
  for (int i = 0; i < 1001; ++i) {
    Experience e;
    e.reward = i;
    e.state = {0.0};
    e.action = {0.0};
    e.next_state = {0.0};
    buf.push(std::move(e));
  }
  CHECK(buf.size() == 1000);
  CHECK(buf.oldest(0).reward == 1.0);  // entry 0 was evicted
  CHECK(buf.oldest(999).reward == 1000.0);

  Rng rng(1, 0);
  CHECK_NOTHROW(buf.sample(16, rng));
  ReplayBuffer small(8);
  Experience e;
  e.reward = 1;
  small.push(e);
  CHECK_THROWS_AS(small.sample(2, rng), std::runtime_error);
}

TEST_CASE("replay sampling is uniform within 5%") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 10; ++i) {
    Experience e;
    e.reward = i;
    buf.push(std::move(e));
  }
  Rng rng(42, 0);
  std::vector<int> freq(10, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto batch = buf.sample(1, rng);
    freq[static_cast<int>(batch[0]->reward)]++;
  }
  for (int f : freq) {
    CHECK(f > 10000 * 0.95);
    CHECK(f < 10000 * 1.05);
  }
}

TEST_CASE("critic_target arithmetic") {
  // Constant critic Q = 2 and a zero actor.
  neural::MlpParams actor = toy_actor(1.0);
  neural::MlpParams critic;
  critic.input_dim = 1;
  critic.action_dim = 1;
  critic.action_concat_before = 0;
  neural::AffineParams a;
  a.w = RealMatrix(2, 1);
  a.b.assign(1, 2.0);
  critic.layers.emplace_back(std::move(a));

  auto xs = constant_batch(3, 1, 1);
  xs[0].reward = 1.0;
  xs[1].reward = -2.0;
  xs[2].reward = 0.5;
  const auto batch = pointers(xs);

  const auto myopic = critic_target_values(batch, actor, critic, 0.0);
  CHECK(myopic[0] == doctest::Approx(1.0));
  CHECK(myopic[1] == doctest::Approx(-2.0));

  const auto y = critic_target_values(batch, actor, critic, 0.99);
  CHECK(y[0] == doctest::Approx(1.0 + 0.99 * 2.0).epsilon(1e-12));  // 2.98
}

TEST_CASE("critic_update: zero TD error moves parameters only by decay") {
  DdpgNets nets;
  nets.actor = toy_actor(1.0);
  nets.target_actor = nets.actor;
  nets.critic = toy_abs_critic();
  nets.target_critic = nets.critic;

  AgentConfig cfg;
  cfg.discount = 0.0;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 1.0e-5;

  auto xs = constant_batch(4, 1, 1);
  // With Q(s, a=0) = -|0-1| = -1 and discount 0, reward -1 gives y == Q.
  for (auto& e : xs) e.reward = -1.0;
  const auto batch = pointers(xs);

  const auto before = std::get<neural::AffineParams>(nets.critic.layers[0]);
  const double loss = critic_update(batch, nets, cfg);
  CHECK(loss == doctest::Approx(0.0));
  const auto& after = std::get<neural::AffineParams>(nets.critic.layers[0]);
  const double expected_shrink = 1.0 - cfg.learning_rate * cfg.weight_decay;
  CHECK(after.w(1, 0) == doctest::Approx(before.w(1, 0) * expected_shrink).epsilon(1e-12));
  CHECK(after.b[0] == before.b[0]);  // bias exempt from decay

  // Single squared error: y = 1, Q = 0 -> loss 1.
  DdpgNets nets2;
  nets2.actor = toy_actor(1.0);
  nets2.target_actor = nets2.actor;
  nets2.critic = toy_abs_critic();
  std::get<neural::AffineParams>(nets2.critic.layers[0]).b[0] = 0.0;
  std::get<neural::AffineParams>(nets2.critic.layers[0]).w(1, 0) = 0.0;
  nets2.target_critic = nets2.critic;
  AgentConfig cfg2 = cfg;
  cfg2.batch_size = 1;
  auto one = constant_batch(1, 1, 1);
  one[0].reward = 1.0;
  CHECK(critic_update(pointers(one), nets2, cfg2) == doctest::Approx(1.0));
}

TEST_CASE("critic loss gradient matches finite differences on a frozen batch") {
  Rng rng(33, 0);
  neural::MlpParams critic = neural::make_critic(3, 2, {5, 4}, rng);
  neural::MlpParams target_critic = critic;
  neural::MlpParams target_actor = neural::make_actor(3, 2, {5}, 1.0, rng);

  std::vector<Experience> xs(6);
  for (auto& e : xs) {
    e.state.resize(3);
    e.action.resize(2);
    e.next_state.resize(3);
    for (double& v : e.state) v = rng.gaussian();
    for (double& v : e.action) v = rng.gaussian();
    for (double& v : e.next_state) v = rng.gaussian();
    e.reward = rng.gaussian();
  }
  const auto batch = pointers(xs);
  const auto y = critic_target_values(batch, target_actor, target_critic, 0.99);

  RealMatrix states(6, 3), actions(6, 2);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 3; ++c) states(r, c) = xs[r].state[c];
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 2; ++c) actions(r, c) = xs[r].action[c];

  auto loss_fn = [&]() {
    auto out = neural::forward(critic, states, &actions, neural::Mode::kTraining).output;
    double l = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      const double err = out(i, 0) - y[i];
      l += err * err / 6.0;
    }
    return l;
  };

  auto fwd = neural::forward(critic, states, &actions, neural::Mode::kTraining);
  RealMatrix grad_q(6, 1);
  for (std::size_t i = 0; i < 6; ++i) grad_q(i, 0) = 2.0 * (fwd.output(i, 0) - y[i]) / 6.0;
  auto back = neural::backward(critic, fwd.cache, grad_q);

  // Probe a handful of parameters in every layer.
  const double h = 1.0e-5;
  double max_err = 0.0;
  for (std::size_t li = 0; li < critic.layers.size(); ++li) {
    auto probe = [&](double* param, double analytic) {
      const double saved = *param;
      *param = saved + h;
      const double lp = loss_fn();
      *param = saved - h;
      const double lm = loss_fn();
      *param = saved;
      const double numeric = (lp - lm) / (2.0 * h);
      max_err = std::max(max_err,
                         std::abs(analytic - numeric) /
                             std::max({1.0, std::abs(analytic), std::abs(numeric)}));
    };
    if (auto* aff = std::get_if<neural::AffineParams>(&critic.layers[li])) {
      const auto& g = std::get<neural::AffineParams>(back.grads.layers[li]);
      for (std::size_t i = 0; i < aff->w.data.size(); i += 7) probe(&aff->w.data[i], g.w.data[i]);
      probe(&aff->b[0], g.b[0]);
    } else if (auto* bn = std::get_if<neural::BatchNormParams>(&critic.layers[li])) {
      const auto& g = std::get<neural::BatchNormParams>(back.grads.layers[li]);
      probe(&bn->gamma[0], g.gamma[0]);
      probe(&bn->beta[1], g.beta[1]);
    } else {
      auto& pr = std::get<neural::PreluParams>(critic.layers[li]);
      const auto& g = std::get<neural::PreluParams>(back.grads.layers[li]);
      probe(&pr.slope[0], g.slope[0]);
    }
  }
  CHECK(max_err <= 1.0e-4);
}

TEST_CASE("actor_update climbs the toy critic toward a = 1") {
  DdpgNets nets;
  nets.actor = toy_actor(2.0);
  nets.target_actor = nets.actor;
  nets.critic = toy_abs_critic();
  nets.target_critic = nets.critic;

  AgentConfig cfg;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 0.0;

  const auto xs = constant_batch(4, 1, 1);
  const auto batch = pointers(xs);

  RealMatrix s(1, 1);
  const double mu0 = neural::infer(nets.actor, s)(0, 0);
  CHECK(std::abs(mu0 - 1.0) == doctest::Approx(1.0));

  double objective = 0.0;
  for (int it = 0; it < 300; ++it) objective = actor_update(batch, nets, cfg);
  const double mu = neural::infer(nets.actor, s)(0, 0);
  CHECK(std::abs(mu - 1.0) < 0.05);
  // Objective is the mean critic value of the batch: -|mu - 1| just before
  // the last step.
  CHECK(objective == doctest::Approx(-std::abs(mu - 1.0)).epsilon(0.5));
  CHECK(objective > -0.1);
}

TEST_CASE("actor parameters move only by decay when the critic ignores the action") {
  DdpgNets nets;
  nets.actor = toy_actor(1.0);
  std::get<neural::AffineParams>(nets.actor.layers[0]).w(0, 0) = 0.4;
  std::get<neural::AffineParams>(nets.actor.layers[0]).b[0] = -0.2;
  nets.target_actor = nets.actor;

  neural::MlpParams critic;  // Q = 0.3 s + 0.5, constant in the action
  critic.input_dim = 1;
  critic.action_dim = 1;
  critic.action_concat_before = 0;
  neural::AffineParams a;
  a.w = RealMatrix(2, 1);
  a.w(0, 0) = 0.3;
  a.w(1, 0) = 0.0;
  a.b.assign(1, 0.5);
  critic.layers.emplace_back(std::move(a));
  nets.critic = critic;
  nets.target_critic = critic;

  AgentConfig cfg;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 1.0e-5;

  const auto xs = constant_batch(4, 1, 1);
  actor_update(pointers(xs), nets, cfg);
  const auto& aff = std::get<neural::AffineParams>(nets.actor.layers[0]);
  const double shrink = 1.0 - cfg.learning_rate * cfg.weight_decay;
  CHECK(aff.w(0, 0) == doctest::Approx(0.4 * shrink).epsilon(1e-12));
  CHECK(aff.b[0] == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("environment pins the user count and redraws per episode") {
  GeometryConfig geo = tiny_geometry();
  UserDistSpec users;
  users.fixed_count = 1;
  Environment env(geo, NoiseModel{}, users, 5);
  CHECK(env.state_dim() == 16);
  CHECK(env.geometry().k_ue == 1);
  const auto s0 = env.state();
  env.reset(1);
  const auto s1 = env.state();
  bool differs = false;
  for (std::size_t i = 0; i < s0.size(); ++i) differs = differs || s0[i] != s1[i];
  CHECK(differs);
}

TEST_CASE("tiny training run: warmup honored, deterministic, finite") {
  GeometryConfig geo = tiny_geometry();
  UserDistSpec users;
  users.fixed_count = 1;

  AgentConfig cfg;
  cfg.batch_size = 8;
  cfg.warmup_steps = 10;
  cfg.steps_per_episode = 40;
  cfg.max_episodes = 2;
  cfg.hidden = {8, 4};
  cfg.replay_capacity = 50;
  cfg.seed = 11;

  Environment env(geo, NoiseModel{}, users, 11);
  const TrainResult a = train(env, cfg);
  REQUIRE(a.log.size() == 80);
  for (int i = 0; i < 10; ++i) CHECK(a.log[static_cast<std::size_t>(i)].critic_loss == 0.0);
  bool updated = false;
  for (std::size_t i = 10; i < a.log.size(); ++i)
    updated = updated || a.log[i].critic_loss != 0.0;
  CHECK(updated);
  for (const auto& row : a.log) {
    CHECK(std::isfinite(row.reward));
    CHECK(row.total_power_w <= geo.p_t_watts + 1.0e-9);
  }

  Environment env2(geo, NoiseModel{}, users, 11);
  const TrainResult b = train(env2, cfg);
  REQUIRE(b.log.size() == a.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].reward == b.log[i].reward);
    CHECK(a.log[i].critic_loss == b.log[i].critic_loss);
    CHECK(a.log[i].total_power_w == b.log[i].total_power_w);
  }
}

TEST_CASE("agent config validation") {
  AgentConfig cfg;
  cfg.discount = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  AgentConfig cfg2;
  cfg2.batch_size = 2000;  // exceeds replay capacity
  CHECK_THROWS_AS(cfg2.validate(), std::invalid_argument);
  AgentConfig ok;
  CHECK_NOTHROW(ok.validate());
  CHECK(resolve_a_max(ok, GeometryConfig{}) ==
        doctest::Approx(std::sqrt(1.0 / 300.0)).epsilon(1e-12));
}
