#include "wavefuse/error.hpp"
#include "wavefuse/numerics.hpp"

namespace wavefuse::numerics::reference {

namespace {

void check(const Tensor& input, const ConvLayerParams& params) {
  params.validate();
  if (input.rank() != 3 || input.dim(0) != params.in_channels()) {
    throw DimensionError("reference conv2d: input " + shape_to_string(input.shape()) +
                         " incompatible with kernels " + shape_to_string(params.kernels.shape()));
  }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const ConvLayerParams& params) {
  check(input, params);
  const long O = params.out_channels(), C = params.in_channels(), k = params.kernel_size();
  const long H = input.dim(1), W = input.dim(2), p = k / 2;
  Tensor out(Shape{static_cast<std::size_t>(O), input.dim(1), input.dim(2)});
  for (long o = 0; o < O; ++o) {
    for (long y = 0; y < H; ++y) {
      for (long x = 0; x < W; ++x) {
        double acc = params.bias[o];
        for (long c = 0; c < C; ++c) {
          for (long i = 0; i < k; ++i) {
            const long sy = y + i - p;
            if (sy < 0 || sy >= H) continue;
            for (long j = 0; j < k; ++j) {
              const long sx = x + j - p;
              if (sx < 0 || sx >= W) continue;
              acc += params.kernels[((o * C + c) * k + i) * k + j] * input.at(c, sy, sx);
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

ConvGradients conv2d_backward(const Tensor& input, const ConvLayerParams& params,
                              const Tensor& grad_output) {
  check(input, params);
  const long O = params.out_channels(), C = params.in_channels(), k = params.kernel_size();
  const long H = input.dim(1), W = input.dim(2), p = k / 2;
  if (grad_output.shape() != Shape{static_cast<std::size_t>(O), input.dim(1), input.dim(2)}) {
    throw DimensionError("reference conv2d_backward: grad_output shape " +
                         shape_to_string(grad_output.shape()));
  }
  ConvGradients g{Tensor(input.shape()), Tensor(params.kernels.shape()),
                  Tensor(params.bias.shape())};
  for (long o = 0; o < O; ++o) {
    for (long y = 0; y < H; ++y) {
      for (long x = 0; x < W; ++x) {
        const double go = grad_output.at(o, y, x);
        g.bias[o] += go;
        for (long c = 0; c < C; ++c) {
          for (long i = 0; i < k; ++i) {
            const long sy = y + i - p;
            if (sy < 0 || sy >= H) continue;
            for (long j = 0; j < k; ++j) {
              const long sx = x + j - p;
              if (sx < 0 || sx >= W) continue;
              const std::size_t ki = ((o * C + c) * k + i) * k + j;
              g.kernels[ki] += go * input.at(c, sy, sx);
              g.input.at(c, sy, sx) += go * params.kernels[ki];
            }
          }
        }
      }
    }
  }
  return g;
}

}  // namespace wavefuse::numerics::reference
