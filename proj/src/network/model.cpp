#include <cmath>
#include <random>
#include <string>

#include "wavefuse/error.hpp"
#include "wavefuse/network.hpp"

namespace wavefuse::network {

using numerics::ConvLayerParams;

ArchitectureSpec ArchitectureSpec::wavefuse() {
  ArchitectureSpec s;
  s.encoder = {{1, 16, 16}, {16, 32, 32}, {32, 48, 48}};
  s.decoder = {{48, 32, 32}, {32, 16, 16}};
  s.final_in = 16;
  s.final_out = 1;
  s.feature_channels = 48;
  s.kernel_size = 3;
  return s;
}

void ArchitectureSpec::validate() const {
  if (encoder.empty() || decoder.empty()) throw ModelError("architecture needs encoder and decoder blocks");
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw ModelError("kernel size must be odd, got " + std::to_string(kernel_size));
  }
  if (encoder.front().in != 1) throw ModelError("encoder must take one input channel");
  std::uint32_t ch = 1;
  auto chain = [&](const std::vector<ConvBlockSpec>& blocks, const char* part) {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      if (b.in != ch || b.mid == 0 || b.out == 0) {
        throw ModelError(std::string(part) + " block " + std::to_string(i) +
                         " does not chain: expected " + std::to_string(ch) + " input channels, got " +
                         std::to_string(b.in));
      }
      ch = b.out;
    }
  };
  chain(encoder, "encoder");
  if (ch != feature_channels) {
    throw ModelError("encoder emits " + std::to_string(ch) + " channels but feature width is " +
                     std::to_string(feature_channels));
  }
  chain(decoder, "decoder");
  if (final_in != ch || final_out != 1) {
    throw ModelError("output layer must map " + std::to_string(ch) + " channels to 1");
  }
}

std::vector<Shape> ArchitectureSpec::kernel_shapes() const {
  std::vector<Shape> shapes;
  const std::size_t k = kernel_size;
  for (const auto* blocks : {&encoder, &decoder}) {
    for (const auto& b : *blocks) {
      shapes.push_back({b.mid, b.in, k, k});
      shapes.push_back({b.out, b.mid, k, k});
    }
  }
  shapes.push_back({final_out, final_in, 1, 1});
  return shapes;
}

void ModelWeights::validate() const {
  if (format_version != kFormatVersion) {
    throw ModelError("unsupported weight format version " + std::to_string(format_version));
  }
  spec.validate();
  const auto shapes = spec.kernel_shapes();
  if (layers.size() != shapes.size()) {
    throw ModelError("expected " + std::to_string(shapes.size()) + " layers, got " +
                     std::to_string(layers.size()));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (layers[i].kernels.shape() != shapes[i] || layers[i].bias.shape() != Shape{shapes[i][0]}) {
      throw ModelError("layer " + std::to_string(i) + " has kernels " +
                       shape_to_string(layers[i].kernels.shape()) + ", expected " +
                       shape_to_string(shapes[i]));
    }
  }
}

std::size_t ModelWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.kernels.size() + l.bias.size();
  return n;
}

ModelWeights init_weights(const ArchitectureSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ModelWeights w;
  w.spec = spec;
  for (const auto& shape : spec.kernel_shapes()) {
    const std::size_t area = shape[2] * shape[3];
    const double bound = std::sqrt(6.0 / static_cast<double>((shape[0] + shape[1]) * area));
    ConvLayerParams layer(shape[0], shape[1], shape[2]);
    for (double& v : layer.kernels.values()) {
      // 53-bit uniform in [0, 1); independent of the standard library's distributions.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v = (2.0 * u - 1.0) * bound;
    }
    w.layers.push_back(std::move(layer));
  }
  return w;
}

namespace {

void require_input(const Tensor& t, std::size_t channels, const char* what) {
  if (t.rank() != 3 || t.dim(0) != channels || t.dim(1) == 0 || t.dim(2) == 0) {
    throw DimensionError(std::string(what) + " expects [" + std::to_string(channels) +
                         ",H,W], got " + shape_to_string(t.shape()));
  }
}

}  // namespace

Tensor encode(const Tensor& image, const ModelWeights& weights) {
  require_input(image, 1, "encode");
  Tensor x = image;
  for (std::size_t i = 0; i < weights.spec.encoder_layer_count(); ++i) {
    x = numerics::relu_forward(numerics::conv2d_forward(x, weights.layers[i]));
  }
  return x;
}

Tensor decode(const Tensor& features, const ModelWeights& weights) {
  require_input(features, weights.spec.feature_channels, "decode");
  Tensor x = features;
  const std::size_t last = weights.layers.size() - 1;
  for (std::size_t i = weights.spec.encoder_layer_count(); i < last; ++i) {
    x = numerics::relu_forward(numerics::conv2d_forward(x, weights.layers[i]));
  }
  return numerics::sigmoid_forward(numerics::conv2d_forward(x, weights.layers[last]));
}

ForwardTrace forward_trace(const Tensor& image, const ModelWeights& weights) {
  require_input(image, 1, "forward_trace");
  ForwardTrace t;
  const std::size_t n = weights.layers.size();
  t.layer_inputs.reserve(n);
  t.pre_activation.reserve(n);
  Tensor x = image;
  for (std::size_t i = 0; i < n; ++i) {
    t.layer_inputs.push_back(x);
    t.pre_activation.push_back(numerics::conv2d_forward(x, weights.layers[i]));
    x = i + 1 < n ? numerics::relu_forward(t.pre_activation.back())
                  : numerics::sigmoid_forward(t.pre_activation.back());
  }
  t.output = std::move(x);
  return t;
}

ParameterGradients ParameterGradients::zeros_like(const ModelWeights& weights) {
  ParameterGradients g;
  for (const auto& l : weights.layers) {
    g.kernels.emplace_back(l.kernels.shape());
    g.bias.emplace_back(l.bias.shape());
  }
  return g;
}

void ParameterGradients::accumulate(const ParameterGradients& other, double scale) {
  if (other.kernels.size() != kernels.size()) throw DimensionError("gradient layer count mismatch");
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    require_same_shape(kernels[i], other.kernels[i], "gradient accumulate");
    for (std::size_t j = 0; j < kernels[i].size(); ++j) kernels[i][j] += scale * other.kernels[i][j];
    for (std::size_t j = 0; j < bias[i].size(); ++j) bias[i][j] += scale * other.bias[i][j];
  }
}

ParameterGradients backward(const ForwardTrace& trace, const ModelWeights& weights,
                            const Tensor& grad_output) {
  const std::size_t n = weights.layers.size();
  if (trace.layer_inputs.size() != n) throw DimensionError("trace does not match model depth");
  require_same_shape(trace.output, grad_output, "backward");
  ParameterGradients g;
  g.kernels.resize(n);
  g.bias.resize(n);
  Tensor grad = numerics::sigmoid_backward(trace.output, grad_output);
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) grad = numerics::relu_backward(trace.pre_activation[i], grad);
    auto cg = numerics::conv2d_backward(trace.layer_inputs[i], weights.layers[i], grad);
    g.kernels[i] = std::move(cg.kernels);
    g.bias[i] = std::move(cg.bias);
    grad = std::move(cg.input);
  }
  return g;
}

}  // namespace wavefuse::network
