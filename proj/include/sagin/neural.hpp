#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "sagin/numerics.hpp"
#include "sagin/real_matrix.hpp"

namespace sagin::neural {

struct AffineParams {
  RealMatrix w;            // in x out
  std::vector<double> b;   // out

  std::size_t in_dim() const { return w.rows; }
  std::size_t out_dim() const { return w.cols; }
};

struct BatchNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1.0e-5;

  std::size_t dim() const { return gamma.size(); }
};

struct PreluParams {
  std::vector<double> slope;  // per-feature negative-side slope

  std::size_t dim() const { return slope.size(); }
};

using LayerParams = std::variant<AffineParams, BatchNormParams, PreluParams>;

/// Layered parameter record for the actor/critic networks. The layer list is
/// a flat ordered sequence; for a critic, the action vector is concatenated
/// onto the running activation right before layers[action_concat_before]
/// ("fusion with the action vector in the second layer"). An actor squashes
/// its final affine output through tanh and scales it by output_scale
/// (the maximum allowable action a_max).
struct MlpParams {
  std::vector<LayerParams> layers;
  bool tanh_output = false;
  double output_scale = 1.0;
  int action_concat_before = -1;  // -1: no action input
  int input_dim = 0;
  int action_dim = 0;

  std::size_t output_dim() const;
};

enum class Mode { kTraining, kInference };

/// Everything backward() needs from the matching forward(): per-layer inputs
/// and batch-norm statistics. Training-mode caches are single-use.
struct ForwardCache {
  struct BnStats {
    std::vector<double> mean, var, inv_std;
    RealMatrix x_hat;
  };
  const void* params_id = nullptr;
  Mode mode = Mode::kInference;
  bool consumed = false;
  std::vector<RealMatrix> layer_inputs;  // input to each layer, post-concat
  std::vector<BnStats> bn_stats;         // parallel to layers (empty unless BN)
  RealMatrix tanh_values;                // tanh(z) when tanh_output
};

struct ForwardResult {
  RealMatrix output;
  ForwardCache cache;
};

/// Run the network on a [batch x features] input. Training mode uses batch
/// statistics in batch norm (so nets with BN need batch size >= 2) and
/// updates the running statistics in place; inference mode uses the stored
/// running statistics and leaves the parameters untouched. `action` must be
/// non-null exactly when the architecture has an action input.
ForwardResult forward(MlpParams& params, const RealMatrix& input, const RealMatrix* action,
                      Mode mode);

/// Inference-only forward that never mutates the parameters.
RealMatrix infer(const MlpParams& params, const RealMatrix& input,
                 const RealMatrix* action = nullptr);

/// Gradients in the same layered layout as the parameters (running BN
/// statistics carry zero gradient).
struct MlpGrads {
  std::vector<LayerParams> layers;
};

struct BackwardResult {
  MlpGrads grads;
  RealMatrix grad_input;
  RealMatrix grad_action;  // empty unless the net has an action input
};

/// Exact reverse-mode gradients of sum(output * grad_output) over the batch,
/// including the batch-statistics terms of batch norm and the PReLU slope
/// gradients. Requires a training-mode cache from the same parameter object;
/// a cache is consumed by the call and cannot be reused.
BackwardResult backward(const MlpParams& params, ForwardCache& cache,
                        const RealMatrix& grad_output);

/// SGD with decoupled L2 decay on affine weights only:
/// w <- w - lr * (grad + weight_decay * w); biases, batch-norm and PReLU
/// parameters are exempt from decay. Throws on non-finite gradients, naming
/// the offending layer.
void optimizer_step(MlpParams& params, const MlpGrads& grads, double learning_rate,
                    double weight_decay);

/// target <- (1 - blend) * target + blend * source, elementwise, including
/// the running batch-norm statistics. blend = 1 is a hard copy.
void blend_params(MlpParams& target, const MlpParams& source, double blend);

/// Actor network: [affine -> BN -> PReLU] per hidden width, then an affine
/// head squashed by tanh and scaled to a_max. Weights U(+-1/sqrt(fan_in)),
/// final layer U(+-1e-3) so initial actions start near zero.
MlpParams make_actor(int state_dim, int action_dim, const std::vector<int>& hidden,
                     double a_max, Rng& rng);

/// Critic network: the state runs through the first block, the action is
/// concatenated before the second affine, and a linear head emits the scalar
/// value estimate.
MlpParams make_critic(int state_dim, int action_dim, const std::vector<int>& hidden, Rng& rng);

/// Versioned JSON checkpoint of the full parameter record; a round trip
/// through save/load is bit-exact.
void save_checkpoint(const MlpParams& params, const std::string& path);
MlpParams load_checkpoint(const std::string& path);
std::string checkpoint_to_json(const MlpParams& params);
MlpParams checkpoint_from_json(const std::string& text);

struct GradCheckReport {
  double max_rel_error = 0.0;
  long parameters_checked = 0;
};

/// Central finite differences (step fd_step) against the analytic backward
/// pass on randomly drawn small actors and critics, covering affine,
/// batch-norm and PReLU parameters. The error is |analytic - numeric| /
/// max(1, |analytic|, |numeric|), i.e. relative above unit magnitude and
/// absolute below it.
GradCheckReport gradient_check(int n_instances, std::uint64_t seed, double fd_step = 1.0e-5);

}  // namespace sagin::neural
