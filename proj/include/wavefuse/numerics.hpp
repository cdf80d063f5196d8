#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "wavefuse/tensor.hpp"

namespace wavefuse::numerics {

// Kernels [out, in, k, k] with odd k, bias [out].
struct ConvLayerParams {
  Tensor kernels;
  Tensor bias;

  ConvLayerParams() = default;
  ConvLayerParams(std::size_t out_channels, std::size_t in_channels, std::size_t k);
  ConvLayerParams(Tensor kernels, Tensor bias);

  std::size_t out_channels() const { return kernels.dim(0); }
  std::size_t in_channels() const { return kernels.dim(1); }
  std::size_t kernel_size() const { return kernels.dim(2); }

  // Throws ArgumentError/DimensionError if the shapes are not a valid layer.
  void validate() const;

  friend bool operator==(const ConvLayerParams&, const ConvLayerParams&) = default;
};

struct ConvGradients {
  Tensor input;
  Tensor kernels;
  Tensor bias;
};

// Stride-1 convolution (cross-correlation) with same-size zero padding.
// input [C,H,W] -> [O,H,W]. im2col + GEMM; per-channel loops run under OpenMP.
Tensor conv2d_forward(const Tensor& input, const ConvLayerParams& params);

// Exact gradients of sum(grad_output * conv2d_forward(input, params)).
ConvGradients conv2d_backward(const Tensor& input, const ConvLayerParams& params,
                              const Tensor& grad_output);

namespace reference {
// Serial direct-loop versions of the kernels above. Slow; kept for tests and benchmarks.
Tensor conv2d_forward(const Tensor& input, const ConvLayerParams& params);
ConvGradients conv2d_backward(const Tensor& input, const ConvLayerParams& params,
                              const Tensor& grad_output);
}  // namespace reference

Tensor relu_forward(const Tensor& input);
// Subgradient 0 at exactly 0.
Tensor relu_backward(const Tensor& input, const Tensor& grad_output);

Tensor sigmoid_forward(const Tensor& input);
// Takes the forward *output*, since sigmoid' = y(1 - y).
Tensor sigmoid_backward(const Tensor& output, const Tensor& grad_output);

struct AdamHyperparameters {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Tensor first_moment;
  Tensor second_moment;
  std::uint64_t step_count = 0;
  AdamHyperparameters hyper;

  AdamState() = default;
  AdamState(const Shape& param_shape, AdamHyperparameters h);
};

struct AdamResult {
  Tensor params;
  AdamState state;
};

// One bias-corrected Adam update. `block` names the parameter tensor in errors.
AdamResult adam_step(const Tensor& params, const Tensor& grads, const AdamState& state,
                     std::string_view block = "params");

// In-place form used by the trainer; same arithmetic as adam_step.
void adam_update(Tensor& params, const Tensor& grads, AdamState& state,
                 std::string_view block = "params");

}  // namespace wavefuse::numerics
