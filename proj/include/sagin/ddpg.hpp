#pragma once

#include <cstdint>
#include <vector>

#include "sagin/beamforming.hpp"
#include "sagin/channel.hpp"
#include "sagin/neural.hpp"
#include "sagin/scenario.hpp"

namespace sagin {

/// Fixed stream ids so every consumer of randomness owns a private,
/// reproducible sequence derived from the one experiment seed.
namespace rng_streams {
inline constexpr std::uint64_t kLayout = 1;
inline constexpr std::uint64_t kChannelPerturb = 2;
inline constexpr std::uint64_t kActorInit = 3;
inline constexpr std::uint64_t kCriticInit = 4;
inline constexpr std::uint64_t kExploration = 5;
inline constexpr std::uint64_t kReplay = 6;
inline constexpr std::uint64_t kEval = 7;
inline constexpr std::uint64_t kSweepCellBase = 100;
}  // namespace rng_streams

struct Experience {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
};

/// Bounded FIFO of transitions; pushing into a full buffer evicts the oldest
/// entry. Sampling is uniform with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Experience e);
  std::size_t size() const { return store_.size(); }
  std::size_t capacity() const { return capacity_; }

  /// Entry i in age order: 0 is the oldest retained experience.
  const Experience& oldest(std::size_t i) const;

  std::vector<const Experience*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Experience> store_;
  std::size_t next_ = 0;  // write slot once the buffer is full
};

struct AgentConfig {
  double discount = 0.99;
  double learning_rate = 0.01;
  double weight_decay = 1.0e-5;
  int batch_size = 16;
  int warmup_steps = 50;
  double noise_std = 0.1;
  int steps_per_episode = 4000;
  int max_episodes = 10;
  std::uint64_t seed = 42;
  double target_blend = 0.005;
  int target_hard_copy_period = 0;  // > 0 switches to periodic hard copies
  double lambda_power = 0.1;
  double lambda_violation = 1.0;
  std::vector<int> hidden = {256, 128};
  double a_max = 0.0;        // explicit per-coordinate action bound, 0 = auto
  double a_max_scale = 1.0;  // multiplier on the auto bound
  int replay_capacity = 1000;
  bool redraw_per_step = false;

  void validate() const;
};

/// Per-coordinate action bound. The automatic choice
/// sqrt(P_t / (2 N (K_sat + K_UE))) puts the all-saturated action at the
/// power budget; a_max_scale stretches it.
double resolve_a_max(const AgentConfig& agent, const GeometryConfig& geo);

/// Composite channel -> real state vector: all real parts in row-major
/// order, then all imaginary parts. Length 2 * rows * cols.
std::vector<double> encode_state(const ComplexMatrix& h);

/// Inverse of the packing convention for a rows x cols complex matrix.
ComplexMatrix decode_matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols);

/// Action vector -> beamforming matrix (N x K packing) followed by the
/// power-budget projection, so decoded actions always satisfy the budget.
BeamformingMatrix decode_action(const std::vector<double>& a, const GeometryConfig& geo);

/// Shaped reward: sum-rate term over ground users, a normalized transmit
/// power penalty, and a hinge penalty on SINR-floor violations
///   r = sum_k log2(1 + g_k) - lp * P/P_t - lv * sum_k max(0, log10(gmin/g_k))
/// with g_k floored at 1e-12 inside the violation term.
double compute_reward(const ComplexMatrix& h, const BeamformingMatrix& w, double sigma2_w,
                      const GeometryConfig& geo, double lambda_power, double lambda_violation);

struct DdpgNets {
  neural::MlpParams actor;
  neural::MlpParams critic;
  neural::MlpParams target_actor;
  neural::MlpParams target_critic;
};

DdpgNets make_nets(int state_dim, int action_dim, const AgentConfig& cfg, double a_max);

/// y_i = r_i + discount * Q_target(s'_i, mu_target(s'_i)); the max over next
/// actions is realized by the deterministic target actor.
std::vector<double> critic_target_values(const std::vector<const Experience*>& batch,
                                         const neural::MlpParams& target_actor,
                                         const neural::MlpParams& target_critic,
                                         double discount);

/// One SGD step on the mean squared Bellman error; returns the pre-step loss.
double critic_update(const std::vector<const Experience*>& batch, DdpgNets& nets,
                     const AgentConfig& cfg);

/// One ascent step on mean Q(s, mu(s)) through the frozen critic; returns the
/// pre-step objective (mean critic value on the batch).
double actor_update(const std::vector<const Experience*>& batch, DdpgNets& nets,
                    const AgentConfig& cfg);

/// Quasi-static link environment: one realized scenario per episode (layout
/// redrawn on reset, channels held within the episode unless redraw_per_step
/// is used). The user count is pinned at construction, either from the fixed
/// count or from one Poisson draw, so network dimensions stay constant.
class Environment {
 public:
  Environment(GeometryConfig geo, NoiseModel noise, UserDistSpec users, std::uint64_t seed,
              std::uint64_t layout_stream = rng_streams::kLayout);

  void reset(int episode);
  void redraw();

  const GeometryConfig& geometry() const { return geo_; }
  const ChannelSet& channels() const { return channels_; }
  const UserLayout& layout() const { return layout_; }
  double sigma2() const { return sigma2_; }
  int state_dim() const { return 2 * geo_.n_streams() * geo_.n_antennas; }
  int action_dim() const { return 2 * geo_.n_streams() * geo_.n_antennas; }
  std::vector<double> state() const { return encode_state(channels_.h_composite); }

  struct StepEval {
    double reward = 0.0;
    double total_power_w = 0.0;
    double min_user_sinr = 0.0;  // linear
    SinrReport sinr;
  };
  StepEval evaluate(const BeamformingMatrix& w, const AgentConfig& cfg) const;

 private:
  GeometryConfig geo_;
  NoiseModel noise_;
  UserDistSpec users_;
  double sigma2_ = 0.0;
  Rng layout_rng_;
  Rng perturb_rng_;
  UserLayout layout_;
  ChannelSet channels_;
};

struct TrainLogRow {
  long step = 0;
  int episode = 0;
  double reward = 0.0;
  double critic_loss = 0.0;
  double total_power_w = 0.0;
  double min_user_sinr_db = 0.0;
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  DdpgNets nets;
};

/// Full training loop: explore with clipped Gaussian noise, store
/// transitions, and after the warm-up run one critic and one actor update
/// plus a target blend per step. Deterministic for a fixed (config, seed).
TrainResult train(Environment& env, const AgentConfig& cfg);

}  // namespace sagin
