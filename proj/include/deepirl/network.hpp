#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "deepirl/errors.hpp"
#include "deepirl/matrix.hpp"
#include "deepirl/rng.hpp"

namespace deepirl {

enum class LayerKind : std::uint8_t { Dense = 0, Conv3x3 = 1 };
enum class Activation : std::uint8_t { Identity = 0, Relu = 1 };

/// One layer of a per-state reward network.
///
/// Dense layers act on every state independently (a width-one convolution).
/// Conv3x3 layers mix each cell with its 8 neighbours; off-grid cells read as 0.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::Identity;
  bool bias = true;

  std::size_t weight_count() const { return in * out * (kind == LayerKind::Conv3x3 ? 9 : 1); }
  std::size_t bias_count() const { return bias ? out : 0; }

  bool operator==(const LayerSpec&) const = default;
};

struct LayerParams {
  std::vector<double> weights;  // dense: (out, in); conv: (out, in, 3, 3)
  std::vector<double> bias;

  bool operator==(const LayerParams&) const = default;
};

/// Parameter-shaped blocks, used for both gradients and optimizer state.
using ParamBlocks = std::vector<LayerParams>;

struct NetworkParams {
  std::vector<LayerSpec> specs;
  ParamBlocks layers;

  std::size_t input_dim() const { return specs.empty() ? 0 : specs.front().in; }
  bool has_conv() const {
    return std::any_of(specs.begin(), specs.end(),
                       [](const LayerSpec& l) { return l.kind == LayerKind::Conv3x3; });
  }

  bool operator==(const NetworkParams&) const = default;
};

/// Per-state network input: one row of channels per state, plus the grid
/// shape that conv layers need. Rows follow row-major cell order.
struct ModelInput {
  Matrix values;  // (state, channel)
  std::size_t height = 0;
  std::size_t width = 0;
};

/// Channel-major raw grid, as rendered from a world's object layout.
struct GridTensor {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;  // (channel, row, col)

  double& at(std::size_t c, std::size_t r, std::size_t col) {
    return values[(c * height + r) * width + col];
  }
  double at(std::size_t c, std::size_t r, std::size_t col) const {
    return values[(c * height + r) * width + col];
  }

  bool operator==(const GridTensor&) const = default;
};

inline ModelInput to_model_input(const GridTensor& grid) {
  ModelInput in{Matrix(grid.height * grid.width, grid.channels), grid.height, grid.width};
  for (std::size_t c = 0; c < grid.channels; ++c)
    for (std::size_t r = 0; r < grid.height; ++r)
      for (std::size_t col = 0; col < grid.width; ++col)
        in.values(r * grid.width + col, c) = grid.at(c, r, col);
  return in;
}

inline ModelInput to_model_input(const Matrix& features, std::size_t height, std::size_t width) {
  return ModelInput{features, height, width};
}

// ---------------------------------------------------------------------------
// Architectures and initialization

inline void validate_specs(const std::vector<LayerSpec>& specs) {
  detail::require(!specs.empty(), "network needs at least one layer");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    detail::require(specs[i].in > 0 && specs[i].out > 0, "layer widths must be positive");
    if (i > 0)
      detail::require(specs[i].in == specs[i - 1].out,
                      "layer " + std::to_string(i) + " input does not match previous output");
  }
  detail::require(specs.back().out == 1, "final layer must output one reward per state");
  detail::require(specs.back().activation == Activation::Identity,
                  "final layer must use identity activation");
}

inline void validate_params(const NetworkParams& params) {
  validate_specs(params.specs);
  detail::require(params.layers.size() == params.specs.size(), "parameter block count mismatch");
  for (std::size_t i = 0; i < params.specs.size(); ++i) {
    detail::require(params.layers[i].weights.size() == params.specs[i].weight_count(),
                    "weight block " + std::to_string(i) + " has wrong size");
    detail::require(params.layers[i].bias.size() == params.specs[i].bias_count(),
                    "bias block " + std::to_string(i) + " has wrong size");
  }
}

/// theta^T f: one dense output with no bias.
inline std::vector<LayerSpec> linear_architecture(std::size_t features) {
  return {LayerSpec{LayerKind::Dense, features, 1, Activation::Identity, false}};
}

/// Dense ReLU hidden layers followed by a linear read-out.
inline std::vector<LayerSpec> mlp_architecture(std::size_t features,
                                               const std::vector<std::size_t>& hidden = {32, 32}) {
  std::vector<LayerSpec> specs;
  std::size_t in = features;
  for (std::size_t w : hidden) {
    specs.push_back({LayerKind::Dense, in, w, Activation::Relu, true});
    in = w;
  }
  specs.push_back({LayerKind::Dense, in, 1, Activation::Identity, true});
  return specs;
}

/// Two 3x3 conv layers, then dense ReLU layers and a linear read-out.
inline std::vector<LayerSpec> conv_architecture(std::size_t channels, std::size_t conv_channels = 16,
                                                const std::vector<std::size_t>& hidden = {32, 32}) {
  std::vector<LayerSpec> specs{
      {LayerKind::Conv3x3, channels, conv_channels, Activation::Relu, true},
      {LayerKind::Conv3x3, conv_channels, conv_channels, Activation::Relu, true}};
  std::size_t in = conv_channels;
  for (std::size_t w : hidden) {
    specs.push_back({LayerKind::Dense, in, w, Activation::Relu, true});
    in = w;
  }
  specs.push_back({LayerKind::Dense, in, 1, Activation::Identity, true});
  return specs;
}

inline NetworkParams zero_params(std::vector<LayerSpec> specs) {
  validate_specs(specs);
  NetworkParams p;
  for (const auto& spec : specs)
    p.layers.push_back({std::vector<double>(spec.weight_count(), 0.0),
                        std::vector<double>(spec.bias_count(), 0.0)});
  p.specs = std::move(specs);
  return p;
}

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
inline NetworkParams init_params(std::vector<LayerSpec> specs, std::uint64_t seed) {
  NetworkParams p = zero_params(std::move(specs));
  Rng rng(seed);
  for (std::size_t i = 0; i < p.specs.size(); ++i) {
    const auto& spec = p.specs[i];
    const double taps = spec.kind == LayerKind::Conv3x3 ? 9.0 : 1.0;
    const double limit =
        std::sqrt(6.0 / (taps * static_cast<double>(spec.in) + taps * static_cast<double>(spec.out)));
    for (double& w : p.layers[i].weights) w = rng.uniform(-limit, limit);
  }
  return p;
}

inline ParamBlocks zeros_like(const NetworkParams& params) {
  ParamBlocks blocks;
  for (const auto& layer : params.layers)
    blocks.push_back({std::vector<double>(layer.weights.size(), 0.0),
                      std::vector<double>(layer.bias.size(), 0.0)});
  return blocks;
}

inline double sup_norm(const ParamBlocks& blocks) {
  double m = 0.0;
  for (const auto& b : blocks) {
    for (double w : b.weights) m = std::max(m, std::abs(w));
    for (double w : b.bias) m = std::max(m, std::abs(w));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Forward and backward passes

/// Activations recorded by forward() for use by backward().
struct ForwardCache {
  bool filled = false;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Matrix> inputs;       // input of each layer
  std::vector<Matrix> preactivations;
};

namespace detail {

inline void dense_forward(const LayerSpec& spec, const LayerParams& p, const Matrix& x, Matrix& z) {
  z = Matrix(x.rows(), spec.out);
  for (std::size_t s = 0; s < x.rows(); ++s) {
    const double* xs = x.row(s);
    double* zs = z.row(s);
    for (std::size_t o = 0; o < spec.out; ++o) {
      const double* w = p.weights.data() + o * spec.in;
      double acc = 0.0;
      for (std::size_t i = 0; i < spec.in; ++i) acc += w[i] * xs[i];
      zs[o] = spec.bias ? acc + p.bias[o] : acc;
    }
  }
}

inline void conv_forward(const LayerSpec& spec, const LayerParams& p, const Matrix& x,
                         std::size_t height, std::size_t width, Matrix& z) {
  z = Matrix(x.rows(), spec.out);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      double* zs = z.row(r * width + c);
      for (std::size_t o = 0; o < spec.out; ++o) {
        double acc = 0.0;
        for (std::size_t ky = 0; ky < 3; ++ky) {
          if ((r == 0 && ky == 0) || (r + 1 == height && ky == 2)) continue;
          for (std::size_t kx = 0; kx < 3; ++kx) {
            if ((c == 0 && kx == 0) || (c + 1 == width && kx == 2)) continue;
            const double* xs = x.row((r + ky - 1) * width + (c + kx - 1));
            const double* w = p.weights.data() + (o * spec.in * 9) + ky * 3 + kx;
            for (std::size_t i = 0; i < spec.in; ++i) acc += w[i * 9] * xs[i];
          }
        }
        zs[o] = spec.bias ? acc + p.bias[o] : acc;
      }
    }
  }
}

}  // namespace detail

/// Per-state reward g(f, theta); fills `cache` for a later backward pass.
inline std::vector<double> forward(const NetworkParams& params, const ModelInput& input,
                                   ForwardCache& cache) {
  validate_params(params);
  detail::require(input.values.cols() == params.input_dim(),
                  "input has " + std::to_string(input.values.cols()) + " channels, network expects " +
                      std::to_string(params.input_dim()));
  if (params.has_conv())
    detail::require(input.height * input.width == input.values.rows() && input.values.rows() > 0,
                    "conv layers need grid dimensions matching the state count");

  cache = ForwardCache{};
  cache.height = input.height;
  cache.width = input.width;
  Matrix x = input.values;
  for (std::size_t l = 0; l < params.specs.size(); ++l) {
    const auto& spec = params.specs[l];
    Matrix z;
    if (spec.kind == LayerKind::Dense)
      detail::dense_forward(spec, params.layers[l], x, z);
    else
      detail::conv_forward(spec, params.layers[l], x, input.height, input.width, z);
    cache.inputs.push_back(std::move(x));
    x = z;
    if (spec.activation == Activation::Relu)
      for (double& v : x.data()) v = v > 0.0 ? v : 0.0;
    cache.preactivations.push_back(std::move(z));
  }
  cache.filled = true;
  return x.data();
}

inline std::vector<double> forward(const NetworkParams& params, const ModelInput& input) {
  ForwardCache cache;
  return forward(params, input, cache);
}

/// Gradient of error^T g(f, theta) with respect to every parameter.
inline ParamBlocks backward(const NetworkParams& params, const ForwardCache& cache,
                            const std::vector<double>& error) {
  if (!cache.filled || cache.inputs.size() != params.specs.size())
    throw ContractViolation("backward called without a matching forward pass");
  const std::size_t n = cache.inputs.front().rows();
  detail::require(error.size() == n, "error signal length does not match state count");

  ParamBlocks grads = zeros_like(params);
  Matrix upstream(n, 1);
  upstream.data() = error;

  for (std::size_t l = params.specs.size(); l-- > 0;) {
    const auto& spec = params.specs[l];
    const auto& p = params.layers[l];
    const Matrix& x = cache.inputs[l];
    const Matrix& z = cache.preactivations[l];
    auto& g = grads[l];

    Matrix dz = std::move(upstream);
    if (spec.activation == Activation::Relu)
      for (std::size_t k = 0; k < dz.data().size(); ++k)
        if (!(z.data()[k] > 0.0)) dz.data()[k] = 0.0;

    Matrix dx(n, spec.in, 0.0);
    if (spec.kind == LayerKind::Dense) {
      for (std::size_t s = 0; s < n; ++s) {
        const double* xs = x.row(s);
        const double* ds = dz.row(s);
        double* dxs = dx.row(s);
        for (std::size_t o = 0; o < spec.out; ++o) {
          const double d = ds[o];
          if (d == 0.0) continue;
          double* gw = g.weights.data() + o * spec.in;
          const double* w = p.weights.data() + o * spec.in;
          for (std::size_t i = 0; i < spec.in; ++i) {
            gw[i] += d * xs[i];
            dxs[i] += d * w[i];
          }
          if (spec.bias) g.bias[o] += d;
        }
      }
    } else {
      const std::size_t height = cache.height;
      const std::size_t width = cache.width;
      for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
          const double* ds = dz.row(r * width + c);
          for (std::size_t o = 0; o < spec.out; ++o) {
            const double d = ds[o];
            if (d == 0.0) continue;
            if (spec.bias) g.bias[o] += d;
            for (std::size_t ky = 0; ky < 3; ++ky) {
              if ((r == 0 && ky == 0) || (r + 1 == height && ky == 2)) continue;
              for (std::size_t kx = 0; kx < 3; ++kx) {
                if ((c == 0 && kx == 0) || (c + 1 == width && kx == 2)) continue;
                const std::size_t src = (r + ky - 1) * width + (c + kx - 1);
                const double* xs = x.row(src);
                double* dxs = dx.row(src);
                const std::size_t base = o * spec.in * 9 + ky * 3 + kx;
                for (std::size_t i = 0; i < spec.in; ++i) {
                  g.weights[base + i * 9] += d * xs[i];
                  dxs[i] += d * p.weights[base + i * 9];
                }
              }
            }
          }
        }
      }
    }
    upstream = std::move(dx);
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Optimization

/// Adds the gradient of -(lambda/2)||W||^2 to `grads`. Biases are not decayed.
inline void apply_weight_decay(ParamBlocks& grads, const NetworkParams& params, double lambda) {
  detail::require(lambda >= 0.0, "weight decay must be nonnegative");
  detail::require(grads.size() == params.layers.size(), "gradient block count mismatch");
  if (lambda == 0.0) return;
  for (std::size_t l = 0; l < grads.size(); ++l) {
    detail::require(grads[l].weights.size() == params.layers[l].weights.size(),
                    "gradient shape mismatch");
    for (std::size_t k = 0; k < grads[l].weights.size(); ++k)
      grads[l].weights[k] += -lambda * params.layers[l].weights[k];
  }
}

struct AdaGradState {
  ParamBlocks accumulators;
  double learning_rate = 0.1;
  double damping = 1e-8;
};

inline AdaGradState make_adagrad(const NetworkParams& params, double learning_rate = 0.1,
                                 double damping = 1e-8) {
  detail::require(learning_rate > 0.0, "learning rate must be positive");
  detail::require(damping > 0.0, "damping must be positive");
  return AdaGradState{zeros_like(params), learning_rate, damping};
}

/// Gradient ascent step: acc += g^2; theta += lr * g / (sqrt(acc) + damping).
inline void adagrad_update(NetworkParams& params, const ParamBlocks& grads, AdaGradState& state) {
  detail::require(grads.size() == params.layers.size() &&
                      state.accumulators.size() == params.layers.size(),
                  "optimizer block count mismatch");
  auto step = [&](std::vector<double>& theta, const std::vector<double>& g, std::vector<double>& acc) {
    detail::require(theta.size() == g.size() && theta.size() == acc.size(),
                    "optimizer shape mismatch");
    for (std::size_t k = 0; k < theta.size(); ++k) {
      acc[k] += g[k] * g[k];
      theta[k] += state.learning_rate * g[k] / (std::sqrt(acc[k]) + state.damping);
    }
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    step(params.layers[l].weights, grads[l].weights, state.accumulators[l].weights);
    step(params.layers[l].bias, grads[l].bias, state.accumulators[l].bias);
  }
}

}  // namespace deepirl
