#include "sagin/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sagin {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

RealMatrix batch_matrix(const std::vector<const Experience*>& batch, bool next_state) {
  const auto& first = next_state ? batch.front()->next_state : batch.front()->state;
  RealMatrix m(batch.size(), first.size());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto& v = next_state ? batch[r]->next_state : batch[r]->state;
    for (std::size_t c = 0; c < v.size(); ++c) m(r, c) = v[c];
  }
  return m;
}

RealMatrix action_matrix(const std::vector<const Experience*>& batch) {
  RealMatrix m(batch.size(), batch.front()->action.size());
  for (std::size_t r = 0; r < batch.size(); ++r)
    for (std::size_t c = 0; c < batch[r]->action.size(); ++c) m(r, c) = batch[r]->action[c];
  return m;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity >= 1, "replay buffer: capacity must be >= 1");
  store_.reserve(capacity);
}

void ReplayBuffer::push(Experience e) {
  if (store_.size() < capacity_) {
    store_.push_back(std::move(e));
    return;
  }
  store_[next_] = std::move(e);
  next_ = (next_ + 1) % capacity_;
}

const Experience& ReplayBuffer::oldest(std::size_t i) const {
  if (i >= store_.size()) throw std::out_of_range("replay buffer: index out of range");
  if (store_.size() < capacity_) return store_[i];
  return store_[(next_ + i) % capacity_];
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (store_.size() < batch)
    throw std::runtime_error("replay buffer: cannot sample " + std::to_string(batch) +
                             " from " + std::to_string(store_.size()) + " entries");
  std::vector<const Experience*> out(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t idx = static_cast<std::size_t>(rng.uniform() * store_.size());
    out[i] = &store_[std::min(idx, store_.size() - 1)];
  }
  return out;
}

void AgentConfig::validate() const {
  require(discount >= 0.0 && discount < 1.0, "agent: discount must lie in [0, 1)");
  require(learning_rate > 0.0, "agent: learning_rate must be positive");
  require(weight_decay >= 0.0, "agent: weight_decay must be >= 0");
  require(batch_size >= 2, "agent: batch_size must be >= 2");
  require(batch_size <= replay_capacity, "agent: batch_size must not exceed replay capacity");
  require(warmup_steps >= 0, "agent: warmup_steps must be >= 0");
  require(noise_std >= 0.0, "agent: noise_std must be >= 0");
  require(steps_per_episode >= 1 && max_episodes >= 1, "agent: episode shape must be positive");
  require(target_blend > 0.0 && target_blend <= 1.0, "agent: target_blend must be in (0, 1]");
  require(!hidden.empty(), "agent: at least one hidden layer required");
  require(a_max >= 0.0 && a_max_scale > 0.0, "agent: action bound must be positive");
}

double resolve_a_max(const AgentConfig& agent, const GeometryConfig& geo) {
  if (agent.a_max > 0.0) return agent.a_max;
  const double dim = 2.0 * geo.n_antennas * geo.n_streams();
  return agent.a_max_scale * std::sqrt(geo.p_t_watts / dim);
}

std::vector<double> encode_state(const ComplexMatrix& h) {
  std::vector<double> v;
  v.reserve(2 * h.size());
  for (const cplx& z : h.data()) v.push_back(z.real());
  for (const cplx& z : h.data()) v.push_back(z.imag());
  return v;
}

ComplexMatrix decode_matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  require(v.size() == 2 * rows * cols, "decode_matrix: length must equal 2 * rows * cols");
  ComplexMatrix m(rows, cols);
  const std::size_t n = rows * cols;
  for (std::size_t i = 0; i < n; ++i) m.data()[i] = cplx(v[i], v[n + i]);
  return m;
}

BeamformingMatrix decode_action(const std::vector<double>& a, const GeometryConfig& geo) {
  const std::size_t n = static_cast<std::size_t>(geo.n_antennas);
  const std::size_t k = static_cast<std::size_t>(geo.n_streams());
  require(a.size() == 2 * n * k, "decode_action: length must equal 2 * N * (K_sat + K_UE)");
  BeamformingMatrix w{decode_matrix(a, n, k)};
  return project_power(w, geo.p_t_watts);
}

double compute_reward(const ComplexMatrix& h, const BeamformingMatrix& w, double sigma2_w,
                      const GeometryConfig& geo, double lambda_power, double lambda_violation) {
  const SinrReport report = compute_sinr(h, w, sigma2_w);
  double rate_term = 0.0, violation = 0.0;
  for (int k = 0; k < geo.k_ue; ++k) {
    const double g = report.sinr[static_cast<std::size_t>(geo.k_sat + k)];
    rate_term += std::log2(1.0 + g);
    const double floored = std::max(g, 1.0e-12);
    violation += std::max(0.0, std::log10(geo.gamma_min / floored));
  }
  const double power_term = total_power(w) / geo.p_t_watts;
  return rate_term - lambda_power * power_term - lambda_violation * violation;
}

DdpgNets make_nets(int state_dim, int action_dim, const AgentConfig& cfg, double a_max) {
  Rng actor_rng(cfg.seed, rng_streams::kActorInit);
  Rng critic_rng(cfg.seed, rng_streams::kCriticInit);
  DdpgNets nets;
  nets.actor = neural::make_actor(state_dim, action_dim, cfg.hidden, a_max, actor_rng);
  nets.critic = neural::make_critic(state_dim, action_dim, cfg.hidden, critic_rng);
  nets.target_actor = nets.actor;
  nets.target_critic = nets.critic;
  return nets;
}

std::vector<double> critic_target_values(const std::vector<const Experience*>& batch,
                                         const neural::MlpParams& target_actor,
                                         const neural::MlpParams& target_critic,
                                         double discount) {
  require(!batch.empty(), "critic_target: empty batch");
  const RealMatrix next_states = batch_matrix(batch, true);
  const RealMatrix next_actions = neural::infer(target_actor, next_states);
  const RealMatrix q_next = neural::infer(target_critic, next_states, &next_actions);
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i)
    y[i] = batch[i]->reward + discount * q_next(i, 0);
  return y;
}

double critic_update(const std::vector<const Experience*>& batch, DdpgNets& nets,
                     const AgentConfig& cfg) {
  const auto y = critic_target_values(batch, nets.target_actor, nets.target_critic,
                                      cfg.discount);
  const RealMatrix states = batch_matrix(batch, false);
  const RealMatrix actions = action_matrix(batch);
  auto fwd = neural::forward(nets.critic, states, &actions, neural::Mode::kTraining);

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  RealMatrix grad_q(batch.size(), 1);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double err = fwd.output(i, 0) - y[i];
    loss += err * err * inv_b;
    grad_q(i, 0) = 2.0 * err * inv_b;
  }
  auto back = neural::backward(nets.critic, fwd.cache, grad_q);
  neural::optimizer_step(nets.critic, back.grads, cfg.learning_rate, cfg.weight_decay);
  return loss;
}

double actor_update(const std::vector<const Experience*>& batch, DdpgNets& nets,
                    const AgentConfig& cfg) {
  const RealMatrix states = batch_matrix(batch, false);
  auto actor_fwd = neural::forward(nets.actor, states, nullptr, neural::Mode::kTraining);
  auto critic_fwd =
      neural::forward(nets.critic, states, &actor_fwd.output, neural::Mode::kTraining);

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double objective = 0.0;
  RealMatrix grad_q(batch.size(), 1);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    objective += critic_fwd.output(i, 0) * inv_b;
    grad_q(i, 0) = -inv_b;  // minimize -mean(Q) == ascend mean(Q)
  }
  auto critic_back = neural::backward(nets.critic, critic_fwd.cache, grad_q);
  auto actor_back = neural::backward(nets.actor, actor_fwd.cache, critic_back.grad_action);
  neural::optimizer_step(nets.actor, actor_back.grads, cfg.learning_rate, cfg.weight_decay);
  return objective;
}

Environment::Environment(GeometryConfig geo, NoiseModel noise, UserDistSpec users,
                         std::uint64_t seed, std::uint64_t layout_stream)
    : geo_(geo),
      noise_(noise),
      users_(users),
      layout_rng_(seed, layout_stream),
      perturb_rng_(seed, rng_streams::kChannelPerturb) {
  geo_.validate();
  sigma2_ = noise_power(noise_, geo_.bandwidth_hz);
  if (users_.fixed_count <= 0) {
    // Pin the user count with one draw so network dimensions stay fixed.
    const UserLayout probe = place_users(geo_, users_, layout_rng_);
    users_.fixed_count = probe.count();
  }
  geo_.k_ue = users_.fixed_count;
  reset(0);
}

void Environment::reset(int /*episode*/) { redraw(); }

void Environment::redraw() {
  layout_ = place_users(geo_, users_, layout_rng_);
  const RisGeometry geom = ris_geometry(geo_, layout_);
  const RisPhaseProfile profile = ris_phase_profile(
      geom.incidence_rad, geom.user_bearing_rad[static_cast<std::size_t>(geom.served_user)],
      geo_);
  channels_ = build_channels(geo_, layout_, profile, perturb_rng_);
}

Environment::StepEval Environment::evaluate(const BeamformingMatrix& w,
                                            const AgentConfig& cfg) const {
  StepEval ev;
  ev.sinr = compute_sinr(channels_.h_composite, w, sigma2_);
  ev.total_power_w = total_power(w);
  double rate_term = 0.0, violation = 0.0;
  ev.min_user_sinr = std::numeric_limits<double>::infinity();
  for (int k = 0; k < geo_.k_ue; ++k) {
    const double g = ev.sinr.sinr[static_cast<std::size_t>(geo_.k_sat + k)];
    ev.min_user_sinr = std::min(ev.min_user_sinr, g);
    rate_term += std::log2(1.0 + g);
    violation += std::max(0.0, std::log10(geo_.gamma_min / std::max(g, 1.0e-12)));
  }
  ev.reward = rate_term - cfg.lambda_power * ev.total_power_w / geo_.p_t_watts -
              cfg.lambda_violation * violation;
  return ev;
}

TrainResult train(Environment& env, const AgentConfig& cfg) {
  cfg.validate();
  const double a_max = resolve_a_max(cfg, env.geometry());
  TrainResult result;
  result.nets = make_nets(env.state_dim(), env.action_dim(), cfg, a_max);
  DdpgNets& nets = result.nets;

  Rng explore(cfg.seed, rng_streams::kExploration);
  Rng replay_rng(cfg.seed, rng_streams::kReplay);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.replay_capacity));

  result.log.reserve(static_cast<std::size_t>(cfg.steps_per_episode) *
                     static_cast<std::size_t>(cfg.max_episodes));

  long global_step = 0;
  long updates = 0;
  for (int episode = 0; episode < cfg.max_episodes; ++episode) {
    env.reset(episode);
    std::vector<double> state = env.state();
    for (int t = 0; t < cfg.steps_per_episode; ++t, ++global_step) {
      RealMatrix sb(1, state.size());
      for (std::size_t c = 0; c < state.size(); ++c) sb(0, c) = state[c];
      const RealMatrix mu = neural::infer(nets.actor, sb);

      std::vector<double> action(static_cast<std::size_t>(env.action_dim()));
      for (std::size_t c = 0; c < action.size(); ++c) {
        const double a = mu(0, c) + cfg.noise_std * explore.gaussian();
        action[c] = std::clamp(a, -a_max, a_max);
      }

      const BeamformingMatrix w = decode_action(action, env.geometry());
      const Environment::StepEval ev = env.evaluate(w, cfg);
      if (cfg.redraw_per_step) env.redraw();
      std::vector<double> next_state = env.state();

      buffer.push(Experience{state, action, ev.reward, next_state});

      double loss = 0.0;
      if (global_step >= cfg.warmup_steps &&
          buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), replay_rng);
        loss = critic_update(batch, nets, cfg);
        actor_update(batch, nets, cfg);
        ++updates;
        if (cfg.target_hard_copy_period > 0) {
          if (updates % cfg.target_hard_copy_period == 0) {
            neural::blend_params(nets.target_actor, nets.actor, 1.0);
            neural::blend_params(nets.target_critic, nets.critic, 1.0);
          }
        } else {
          neural::blend_params(nets.target_actor, nets.actor, cfg.target_blend);
          neural::blend_params(nets.target_critic, nets.critic, cfg.target_blend);
        }
      }

      if (!std::isfinite(ev.reward) || !std::isfinite(loss)) {
        std::ostringstream diag;
        diag << "train: non-finite signal at step " << global_step << " (episode " << episode
             << "): reward=" << ev.reward << " loss=" << loss
             << " power=" << ev.total_power_w << " min_user_sinr=" << ev.min_user_sinr;
        throw std::runtime_error(diag.str());
      }

      const double sinr_db = linear_to_db(std::max(ev.min_user_sinr, 1.0e-30));
      result.log.push_back(
          TrainLogRow{global_step, episode, ev.reward, loss, ev.total_power_w, sinr_db});
      state = std::move(next_state);
    }
  }
  return result;
}

}  // namespace sagin
