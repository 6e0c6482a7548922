#include "sagin/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace sagin::neural {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

RealMatrix hconcat(const RealMatrix& a, const RealMatrix& b) {
  require(a.rows == b.rows, "hconcat: row mismatch");
  RealMatrix out(a.rows, a.cols + b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    double* dst = out.row(r);
    const double* pa = a.row(r);
    const double* pb = b.row(r);
    for (std::size_t c = 0; c < a.cols; ++c) dst[c] = pa[c];
    for (std::size_t c = 0; c < b.cols; ++c) dst[a.cols + c] = pb[c];
  }
  return out;
}

std::size_t layer_out_dim(const LayerParams& layer) {
  if (const auto* a = std::get_if<AffineParams>(&layer)) return a->out_dim();
  if (const auto* bn = std::get_if<BatchNormParams>(&layer)) return bn->dim();
  return std::get<PreluParams>(layer).dim();
}

RealMatrix affine_forward(const AffineParams& p, const RealMatrix& x) {
  require(x.cols == p.in_dim(), "affine: input width mismatch");
  RealMatrix y(x.rows, p.out_dim());
  const std::size_t in = p.in_dim(), out = p.out_dim();
  for (std::size_t r = 0; r < x.rows; ++r) {
    double* yr = y.row(r);
    for (std::size_t o = 0; o < out; ++o) yr[o] = p.b[o];
    const double* xr = x.row(r);
    for (std::size_t i = 0; i < in; ++i) {
      const double xv = xr[i];
      const double* wr = p.w.row(i);
      for (std::size_t o = 0; o < out; ++o) yr[o] += xv * wr[o];
    }
  }
  return y;
}

}  // namespace

std::size_t MlpParams::output_dim() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    if (const auto* a = std::get_if<AffineParams>(&*it)) return a->out_dim();
  return static_cast<std::size_t>(input_dim);
}

ForwardResult forward(MlpParams& params, const RealMatrix& input, const RealMatrix* action,
                      Mode mode) {
  require(static_cast<int>(input.cols) == params.input_dim, "forward: input width mismatch");
  const bool wants_action = params.action_concat_before >= 0;
  require(wants_action == (action != nullptr),
          "forward: action input presence must match the architecture");
  if (action) {
    require(static_cast<int>(action->cols) == params.action_dim,
            "forward: action width mismatch");
    require(action->rows == input.rows, "forward: action batch mismatch");
  }
  if (mode == Mode::kTraining && input.rows < 2) {
    for (const auto& layer : params.layers)
      if (std::holds_alternative<BatchNormParams>(layer))
        throw std::invalid_argument(
            "forward: training-mode batch norm needs batch size >= 2 (batch variance is "
            "undefined for a single sample)");
  }

  ForwardResult res;
  ForwardCache& cache = res.cache;
  cache.params_id = &params;
  cache.mode = mode;
  cache.layer_inputs.resize(params.layers.size());
  cache.bn_stats.resize(params.layers.size());

  RealMatrix cur = input;
  for (std::size_t idx = 0; idx < params.layers.size(); ++idx) {
    if (static_cast<int>(idx) == params.action_concat_before) cur = hconcat(cur, *action);
    cache.layer_inputs[idx] = cur;

    if (auto* aff = std::get_if<AffineParams>(&params.layers[idx])) {
      cur = affine_forward(*aff, cur);
    } else if (auto* bn = std::get_if<BatchNormParams>(&params.layers[idx])) {
      const std::size_t d = bn->dim();
      require(cur.cols == d, "batch norm: feature width mismatch");
      RealMatrix y(cur.rows, d);
      if (mode == Mode::kTraining) {
        auto& st = cache.bn_stats[idx];
        st.mean.assign(d, 0.0);
        st.var.assign(d, 0.0);
        st.inv_std.assign(d, 0.0);
        const double inv_b = 1.0 / static_cast<double>(cur.rows);
        for (std::size_t r = 0; r < cur.rows; ++r) {
          const double* xr = cur.row(r);
          for (std::size_t c = 0; c < d; ++c) st.mean[c] += xr[c];
        }
        for (std::size_t c = 0; c < d; ++c) st.mean[c] *= inv_b;
        for (std::size_t r = 0; r < cur.rows; ++r) {
          const double* xr = cur.row(r);
          for (std::size_t c = 0; c < d; ++c) {
            const double diff = xr[c] - st.mean[c];
            st.var[c] += diff * diff;
          }
        }
        for (std::size_t c = 0; c < d; ++c) {
          st.var[c] *= inv_b;  // population variance
          st.inv_std[c] = 1.0 / std::sqrt(st.var[c] + bn->eps);
        }
        st.x_hat = RealMatrix(cur.rows, d);
        for (std::size_t r = 0; r < cur.rows; ++r) {
          const double* xr = cur.row(r);
          double* hr = st.x_hat.row(r);
          double* yr = y.row(r);
          for (std::size_t c = 0; c < d; ++c) {
            hr[c] = (xr[c] - st.mean[c]) * st.inv_std[c];
            yr[c] = bn->gamma[c] * hr[c] + bn->beta[c];
          }
        }
        for (std::size_t c = 0; c < d; ++c) {
          bn->running_mean[c] =
              (1.0 - bn->momentum) * bn->running_mean[c] + bn->momentum * st.mean[c];
          bn->running_var[c] =
              (1.0 - bn->momentum) * bn->running_var[c] + bn->momentum * st.var[c];
        }
      } else {
        for (std::size_t r = 0; r < cur.rows; ++r) {
          const double* xr = cur.row(r);
          double* yr = y.row(r);
          for (std::size_t c = 0; c < d; ++c) {
            const double inv = 1.0 / std::sqrt(bn->running_var[c] + bn->eps);
            yr[c] = bn->gamma[c] * (xr[c] - bn->running_mean[c]) * inv + bn->beta[c];
          }
        }
      }
      cur = std::move(y);
    } else {
      const auto& prelu = std::get<PreluParams>(params.layers[idx]);
      const std::size_t d = prelu.dim();
      require(cur.cols == d, "prelu: feature width mismatch");
      RealMatrix y(cur.rows, d);
      for (std::size_t r = 0; r < cur.rows; ++r) {
        const double* xr = cur.row(r);
        double* yr = y.row(r);
        for (std::size_t c = 0; c < d; ++c)
          yr[c] = xr[c] > 0.0 ? xr[c] : prelu.slope[c] * xr[c];
      }
      cur = std::move(y);
    }
  }

  if (params.tanh_output) {
    cache.tanh_values = RealMatrix(cur.rows, cur.cols);
    for (std::size_t i = 0; i < cur.data.size(); ++i) {
      const double t = std::tanh(cur.data[i]);
      cache.tanh_values.data[i] = t;
      cur.data[i] = params.output_scale * t;
    }
  }
  res.output = std::move(cur);
  return res;
}

RealMatrix infer(const MlpParams& params, const RealMatrix& input, const RealMatrix* action) {
  // Inference mode never writes through the parameter reference.
  auto& mutable_params = const_cast<MlpParams&>(params);
  return forward(mutable_params, input, action, Mode::kInference).output;
}

BackwardResult backward(const MlpParams& params, ForwardCache& cache,
                        const RealMatrix& grad_output) {
  if (cache.params_id != &params)
    throw std::invalid_argument("backward: cache does not belong to these parameters");
  if (cache.mode != Mode::kTraining)
    throw std::invalid_argument("backward: cache must come from a training-mode forward");
  if (cache.consumed) throw std::invalid_argument("backward: cache already consumed");
  cache.consumed = true;

  BackwardResult res;
  res.grads.layers.resize(params.layers.size());

  RealMatrix g = grad_output;
  if (params.tanh_output) {
    require(g.rows == cache.tanh_values.rows && g.cols == cache.tanh_values.cols,
            "backward: grad_output shape mismatch");
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      const double t = cache.tanh_values.data[i];
      g.data[i] *= params.output_scale * (1.0 - t * t);
    }
  }

  for (std::size_t ri = params.layers.size(); ri-- > 0;) {
    const RealMatrix& x = cache.layer_inputs[ri];
    if (const auto* aff = std::get_if<AffineParams>(&params.layers[ri])) {
      require(g.cols == aff->out_dim(), "backward: affine grad width mismatch");
      AffineParams grad;
      grad.w = RealMatrix(aff->in_dim(), aff->out_dim());
      grad.b.assign(aff->out_dim(), 0.0);
      const std::size_t in = aff->in_dim(), out = aff->out_dim();
      for (std::size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        const double* gr = g.row(r);
        for (std::size_t o = 0; o < out; ++o) grad.b[o] += gr[o];
        for (std::size_t i = 0; i < in; ++i) {
          const double xv = xr[i];
          double* gw = grad.w.row(i);
          for (std::size_t o = 0; o < out; ++o) gw[o] += xv * gr[o];
        }
      }
      RealMatrix gx(x.rows, in);
      for (std::size_t r = 0; r < x.rows; ++r) {
        const double* gr = g.row(r);
        double* gxr = gx.row(r);
        for (std::size_t i = 0; i < in; ++i) {
          const double* wr = aff->w.row(i);
          double acc = 0.0;
          for (std::size_t o = 0; o < out; ++o) acc += gr[o] * wr[o];
          gxr[i] = acc;
        }
      }
      res.grads.layers[ri] = std::move(grad);
      g = std::move(gx);
    } else if (const auto* bn = std::get_if<BatchNormParams>(&params.layers[ri])) {
      const auto& st = cache.bn_stats[ri];
      const std::size_t d = bn->dim();
      const double inv_b = 1.0 / static_cast<double>(x.rows);
      BatchNormParams grad;
      grad.gamma.assign(d, 0.0);
      grad.beta.assign(d, 0.0);
      grad.running_mean.assign(d, 0.0);
      grad.running_var.assign(d, 0.0);
      grad.momentum = 0.0;
      grad.eps = 0.0;

      // Sums over the batch of dxhat and dxhat * xhat, per feature.
      std::vector<double> sum_dxh(d, 0.0), sum_dxh_xh(d, 0.0);
      for (std::size_t r = 0; r < x.rows; ++r) {
        const double* gr = g.row(r);
        const double* hr = st.x_hat.row(r);
        for (std::size_t c = 0; c < d; ++c) {
          const double dxh = gr[c] * bn->gamma[c];
          grad.gamma[c] += gr[c] * hr[c];
          grad.beta[c] += gr[c];
          sum_dxh[c] += dxh;
          sum_dxh_xh[c] += dxh * hr[c];
        }
      }
      RealMatrix gx(x.rows, d);
      for (std::size_t r = 0; r < x.rows; ++r) {
        const double* gr = g.row(r);
        const double* hr = st.x_hat.row(r);
        double* gxr = gx.row(r);
        for (std::size_t c = 0; c < d; ++c) {
          const double dxh = gr[c] * bn->gamma[c];
          gxr[c] = st.inv_std[c] *
                   (dxh - inv_b * sum_dxh[c] - hr[c] * inv_b * sum_dxh_xh[c]);
        }
      }
      res.grads.layers[ri] = std::move(grad);
      g = std::move(gx);
    } else {
      const auto& prelu = std::get<PreluParams>(params.layers[ri]);
      const std::size_t d = prelu.dim();
      PreluParams grad;
      grad.slope.assign(d, 0.0);
      RealMatrix gx(x.rows, d);
      for (std::size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        const double* gr = g.row(r);
        double* gxr = gx.row(r);
        for (std::size_t c = 0; c < d; ++c) {
          if (xr[c] > 0.0) {
            gxr[c] = gr[c];
          } else {
            gxr[c] = gr[c] * prelu.slope[c];
            grad.slope[c] += gr[c] * xr[c];
          }
        }
      }
      res.grads.layers[ri] = std::move(grad);
      g = std::move(gx);
    }

    if (static_cast<int>(ri) == params.action_concat_before) {
      const std::size_t state_part = g.cols - static_cast<std::size_t>(params.action_dim);
      res.grad_action = RealMatrix(g.rows, static_cast<std::size_t>(params.action_dim));
      RealMatrix left(g.rows, state_part);
      for (std::size_t r = 0; r < g.rows; ++r) {
        const double* gr = g.row(r);
        for (std::size_t c = 0; c < state_part; ++c) left(r, c) = gr[c];
        for (std::size_t c = 0; c < res.grad_action.cols; ++c)
          res.grad_action(r, c) = gr[state_part + c];
      }
      g = std::move(left);
    }
  }
  res.grad_input = std::move(g);
  return res;
}

void optimizer_step(MlpParams& params, const MlpGrads& grads, double learning_rate,
                    double weight_decay) {
  require(grads.layers.size() == params.layers.size(), "optimizer_step: layer count mismatch");
  auto check_finite = [](const std::vector<double>& v, std::size_t layer) {
    for (double x : v)
      if (!std::isfinite(x))
        throw std::runtime_error("optimizer_step: non-finite gradient in layer " +
                                 std::to_string(layer));
  };
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    if (auto* aff = std::get_if<AffineParams>(&params.layers[i])) {
      const auto& g = std::get<AffineParams>(grads.layers[i]);
      require(g.w.rows == aff->w.rows && g.w.cols == aff->w.cols && g.b.size() == aff->b.size(),
              "optimizer_step: affine shape mismatch");
      check_finite(g.w.data, i);
      check_finite(g.b, i);
      for (std::size_t k = 0; k < aff->w.data.size(); ++k)
        aff->w.data[k] -= learning_rate * (g.w.data[k] + weight_decay * aff->w.data[k]);
      for (std::size_t k = 0; k < aff->b.size(); ++k) aff->b[k] -= learning_rate * g.b[k];
    } else if (auto* bn = std::get_if<BatchNormParams>(&params.layers[i])) {
      const auto& g = std::get<BatchNormParams>(grads.layers[i]);
      require(g.gamma.size() == bn->gamma.size(), "optimizer_step: batch-norm shape mismatch");
      check_finite(g.gamma, i);
      check_finite(g.beta, i);
      for (std::size_t k = 0; k < bn->gamma.size(); ++k) {
        bn->gamma[k] -= learning_rate * g.gamma[k];
        bn->beta[k] -= learning_rate * g.beta[k];
      }
    } else {
      auto& prelu = std::get<PreluParams>(params.layers[i]);
      const auto& g = std::get<PreluParams>(grads.layers[i]);
      require(g.slope.size() == prelu.slope.size(), "optimizer_step: prelu shape mismatch");
      check_finite(g.slope, i);
      for (std::size_t k = 0; k < prelu.slope.size(); ++k)
        prelu.slope[k] -= learning_rate * g.slope[k];
    }
  }
}

void blend_params(MlpParams& target, const MlpParams& source, double blend) {
  require(target.layers.size() == source.layers.size() &&
              target.tanh_output == source.tanh_output &&
              target.output_scale == source.output_scale &&
              target.action_concat_before == source.action_concat_before &&
              target.input_dim == source.input_dim && target.action_dim == source.action_dim,
          "blend_params: architecture mismatch");
  const double keep = 1.0 - blend;
  auto blend_vec = [&](std::vector<double>& t, const std::vector<double>& s) {
    require(t.size() == s.size(), "blend_params: layer size mismatch");
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = keep * t[k] + blend * s[k];
  };
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    require(target.layers[i].index() == source.layers[i].index(),
            "blend_params: layer type mismatch");
    if (auto* aff = std::get_if<AffineParams>(&target.layers[i])) {
      const auto& s = std::get<AffineParams>(source.layers[i]);
      blend_vec(aff->w.data, s.w.data);
      blend_vec(aff->b, s.b);
    } else if (auto* bn = std::get_if<BatchNormParams>(&target.layers[i])) {
      const auto& s = std::get<BatchNormParams>(source.layers[i]);
      blend_vec(bn->gamma, s.gamma);
      blend_vec(bn->beta, s.beta);
      blend_vec(bn->running_mean, s.running_mean);
      blend_vec(bn->running_var, s.running_var);
    } else {
      auto& prelu = std::get<PreluParams>(target.layers[i]);
      blend_vec(prelu.slope, std::get<PreluParams>(source.layers[i]).slope);
    }
  }
}

namespace {

AffineParams init_affine(std::size_t in, std::size_t out, double bound, Rng& rng) {
  AffineParams p;
  p.w = RealMatrix(in, out);
  p.b.assign(out, 0.0);
  for (double& v : p.w.data) v = bound * (2.0 * rng.uniform() - 1.0);
  for (double& v : p.b) v = bound * (2.0 * rng.uniform() - 1.0);
  return p;
}

BatchNormParams init_bn(std::size_t dim) {
  BatchNormParams p;
  p.gamma.assign(dim, 1.0);
  p.beta.assign(dim, 0.0);
  p.running_mean.assign(dim, 0.0);
  p.running_var.assign(dim, 1.0);
  return p;
}

PreluParams init_prelu(std::size_t dim) {
  PreluParams p;
  p.slope.assign(dim, 0.25);
  return p;
}

}  // namespace

MlpParams make_actor(int state_dim, int action_dim, const std::vector<int>& hidden,
                     double a_max, Rng& rng) {
  require(state_dim >= 1 && action_dim >= 1 && !hidden.empty() && a_max > 0.0,
          "make_actor: bad architecture");
  MlpParams p;
  p.input_dim = state_dim;
  p.tanh_output = true;
  p.output_scale = a_max;
  std::size_t prev = static_cast<std::size_t>(state_dim);
  for (int h : hidden) {
    const std::size_t width = static_cast<std::size_t>(h);
    p.layers.emplace_back(init_affine(prev, width, 1.0 / std::sqrt(double(prev)), rng));
    p.layers.emplace_back(init_bn(width));
    p.layers.emplace_back(init_prelu(width));
    prev = width;
  }
  p.layers.emplace_back(init_affine(prev, static_cast<std::size_t>(action_dim), 1.0e-3, rng));
  return p;
}

MlpParams make_critic(int state_dim, int action_dim, const std::vector<int>& hidden, Rng& rng) {
  require(state_dim >= 1 && action_dim >= 1 && !hidden.empty(), "make_critic: bad architecture");
  MlpParams p;
  p.input_dim = state_dim;
  p.action_dim = action_dim;
  std::size_t prev = static_cast<std::size_t>(state_dim);
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    std::size_t in = prev;
    if (i == 1) {
      p.action_concat_before = static_cast<int>(p.layers.size());
      in += static_cast<std::size_t>(action_dim);
    }
    const std::size_t width = static_cast<std::size_t>(hidden[i]);
    p.layers.emplace_back(init_affine(in, width, 1.0 / std::sqrt(double(in)), rng));
    p.layers.emplace_back(init_bn(width));
    p.layers.emplace_back(init_prelu(width));
    prev = width;
  }
  std::size_t in = prev;
  if (hidden.size() == 1) {
    // Single hidden block: fuse the action directly into the value head.
    p.action_concat_before = static_cast<int>(p.layers.size());
    in += static_cast<std::size_t>(action_dim);
  }
  p.layers.emplace_back(init_affine(in, 1, 1.0 / std::sqrt(double(in)), rng));
  return p;
}

namespace {

using nlohmann::json;

json layer_to_json(const LayerParams& layer) {
  json j;
  if (const auto* aff = std::get_if<AffineParams>(&layer)) {
    j["type"] = "affine";
    j["in"] = aff->w.rows;
    j["out"] = aff->w.cols;
    j["w"] = aff->w.data;
    j["b"] = aff->b;
  } else if (const auto* bn = std::get_if<BatchNormParams>(&layer)) {
    j["type"] = "batch_norm";
    j["gamma"] = bn->gamma;
    j["beta"] = bn->beta;
    j["running_mean"] = bn->running_mean;
    j["running_var"] = bn->running_var;
    j["momentum"] = bn->momentum;
    j["eps"] = bn->eps;
  } else {
    const auto& prelu = std::get<PreluParams>(layer);
    j["type"] = "prelu";
    j["slope"] = prelu.slope;
  }
  return j;
}

LayerParams layer_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "affine") {
    AffineParams p;
    p.w = RealMatrix(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>());
    p.w.data = j.at("w").get<std::vector<double>>();
    p.b = j.at("b").get<std::vector<double>>();
    if (p.w.data.size() != p.w.rows * p.w.cols)
      throw std::runtime_error("checkpoint: affine tensor size mismatch");
    return p;
  }
  if (type == "batch_norm") {
    BatchNormParams p;
    p.gamma = j.at("gamma").get<std::vector<double>>();
    p.beta = j.at("beta").get<std::vector<double>>();
    p.running_mean = j.at("running_mean").get<std::vector<double>>();
    p.running_var = j.at("running_var").get<std::vector<double>>();
    p.momentum = j.at("momentum").get<double>();
    p.eps = j.at("eps").get<double>();
    return p;
  }
  if (type == "prelu") {
    PreluParams p;
    p.slope = j.at("slope").get<std::vector<double>>();
    return p;
  }
  throw std::runtime_error("checkpoint: unknown layer type " + type);
}

}  // namespace

std::string checkpoint_to_json(const MlpParams& params) {
  json j;
  j["format"] = "saginsim-mlp-v1";
  j["input_dim"] = params.input_dim;
  j["action_dim"] = params.action_dim;
  j["tanh_output"] = params.tanh_output;
  j["output_scale"] = params.output_scale;
  j["action_concat_before"] = params.action_concat_before;
  json layers = json::array();
  for (const auto& layer : params.layers) layers.push_back(layer_to_json(layer));
  j["layers"] = std::move(layers);
  return j.dump();
}

MlpParams checkpoint_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("format").get<std::string>() != "saginsim-mlp-v1")
    throw std::runtime_error("checkpoint: unsupported format tag");
  MlpParams p;
  p.input_dim = j.at("input_dim").get<int>();
  p.action_dim = j.at("action_dim").get<int>();
  p.tanh_output = j.at("tanh_output").get<bool>();
  p.output_scale = j.at("output_scale").get<double>();
  p.action_concat_before = j.at("action_concat_before").get<int>();
  for (const auto& layer : j.at("layers")) p.layers.push_back(layer_from_json(layer));
  return p;
}

namespace {

// All learnable scalars of one layer as raw pointers (running BN statistics
// are buffers, not parameters, and are excluded).
std::vector<double*> learnable_scalars(LayerParams& layer) {
  std::vector<double*> out;
  if (auto* aff = std::get_if<AffineParams>(&layer)) {
    for (double& v : aff->w.data) out.push_back(&v);
    for (double& v : aff->b) out.push_back(&v);
  } else if (auto* bn = std::get_if<BatchNormParams>(&layer)) {
    for (double& v : bn->gamma) out.push_back(&v);
    for (double& v : bn->beta) out.push_back(&v);
  } else {
    for (double& v : std::get<PreluParams>(layer).slope) out.push_back(&v);
  }
  return out;
}

std::vector<double> learnable_values(const LayerParams& layer) {
  std::vector<double> out;
  if (const auto* aff = std::get_if<AffineParams>(&layer)) {
    out.insert(out.end(), aff->w.data.begin(), aff->w.data.end());
    out.insert(out.end(), aff->b.begin(), aff->b.end());
  } else if (const auto* bn = std::get_if<BatchNormParams>(&layer)) {
    out.insert(out.end(), bn->gamma.begin(), bn->gamma.end());
    out.insert(out.end(), bn->beta.begin(), bn->beta.end());
  } else {
    const auto& s = std::get<PreluParams>(layer).slope;
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

}  // namespace

GradCheckReport gradient_check(int n_instances, std::uint64_t seed, double fd_step) {
  GradCheckReport report;
  Rng rng(seed, 0);
  for (int inst = 0; inst < n_instances; ++inst) {
    const int state_dim = 2 + static_cast<int>(rng.uniform() * 4);
    const int action_dim = 1 + static_cast<int>(rng.uniform() * 3);
    std::vector<int> hidden{2 + static_cast<int>(rng.uniform() * 5)};
    if (rng.uniform() < 0.5) hidden.push_back(2 + static_cast<int>(rng.uniform() * 5));
    const std::size_t batch = 2 + static_cast<std::size_t>(rng.uniform() * 3);
    const bool is_critic = inst % 2 == 1;

    MlpParams params = is_critic
                           ? make_critic(state_dim, action_dim, hidden, rng)
                           : make_actor(state_dim, action_dim, hidden, 1.5, rng);
    // Shake the defaults so BN/PReLU gradients are generic.
    for (auto& layer : params.layers) {
      if (auto* bn = std::get_if<BatchNormParams>(&layer)) {
        for (double& v : bn->gamma) v = 0.5 + rng.uniform();
        for (double& v : bn->beta) v = rng.gaussian() * 0.3;
      } else if (auto* pr = std::get_if<PreluParams>(&layer)) {
        for (double& v : pr->slope) v = 0.05 + 0.5 * rng.uniform();
      }
    }

    RealMatrix input(batch, static_cast<std::size_t>(state_dim));
    for (double& v : input.data) v = rng.gaussian();
    RealMatrix action(batch, static_cast<std::size_t>(action_dim));
    for (double& v : action.data) v = rng.gaussian();
    const RealMatrix* action_ptr = is_critic ? &action : nullptr;

    RealMatrix grad_out;
    {
      auto probe = forward(params, input, action_ptr, Mode::kTraining);
      grad_out = RealMatrix(probe.output.rows, probe.output.cols);
      for (double& v : grad_out.data) v = rng.gaussian();
    }
    auto fwd = forward(params, input, action_ptr, Mode::kTraining);
    auto back = backward(params, fwd.cache, grad_out);

    auto objective = [&]() {
      auto out = forward(params, input, action_ptr, Mode::kTraining).output;
      double j = 0.0;
      for (std::size_t i = 0; i < out.data.size(); ++i) j += out.data[i] * grad_out.data[i];
      return j;
    };

    for (std::size_t li = 0; li < params.layers.size(); ++li) {
      auto scalars = learnable_scalars(params.layers[li]);
      const auto analytic = learnable_values(back.grads.layers[li]);
      for (std::size_t pi = 0; pi < scalars.size(); ++pi) {
        const double saved = *scalars[pi];
        *scalars[pi] = saved + fd_step;
        const double j_plus = objective();
        *scalars[pi] = saved - fd_step;
        const double j_minus = objective();
        *scalars[pi] = saved;
        const double numeric = (j_plus - j_minus) / (2.0 * fd_step);
        const double denom = std::max({1.0, std::abs(analytic[pi]), std::abs(numeric)});
        report.max_rel_error =
            std::max(report.max_rel_error, std::abs(analytic[pi] - numeric) / denom);
        ++report.parameters_checked;
      }
    }
  }
  return report;
}

void save_checkpoint(const MlpParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << checkpoint_to_json(params);
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

MlpParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return checkpoint_from_json(text);
}

}  // namespace sagin::neural
