#include <cmath>

#include "wavefuse/error.hpp"
#include "wavefuse/numerics.hpp"

namespace wavefuse::numerics {

Tensor relu_forward(const Tensor& input) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0 ? input[i] : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_output) {
  require_same_shape(input, grad_output, "relu_backward");
  Tensor g(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) g[i] = input[i] > 0.0 ? grad_output[i] : 0.0;
  return g;
}

Tensor sigmoid_forward(const Tensor& input) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double v = input[i];
    // Split on sign so exp never overflows.
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  return out;
}

Tensor sigmoid_backward(const Tensor& output, const Tensor& grad_output) {
  require_same_shape(output, grad_output, "sigmoid_backward");
  Tensor g(output.shape());
  for (std::size_t i = 0; i < output.size(); ++i) {
    g[i] = grad_output[i] * output[i] * (1.0 - output[i]);
  }
  return g;
}

}  // namespace wavefuse::numerics
