#include <Eigen/Core>
#include <algorithm>
#include <vector>

#include "wavefuse/error.hpp"
#include "wavefuse/numerics.hpp"

namespace wavefuse::numerics {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

// dst = lhs * rhs. Eigen sends vector-shaped products to GEMV, whose summation order follows
// pointer alignment; those run here in a fixed order so results do not depend on allocation.
template <typename Dst, typename Lhs, typename Rhs>
void product(Dst&& dst, const Lhs& lhs, const Rhs& rhs) {
  if (lhs.rows() > 1 && rhs.cols() > 1) {
    dst.noalias() = lhs * rhs;
    return;
  }
  for (Eigen::Index i = 0; i < lhs.rows(); ++i) {
    for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
      double acc = 0.0;
      for (Eigen::Index p = 0; p < lhs.cols(); ++p) acc += lhs(i, p) * rhs(p, j);
      dst(i, j) = acc;
    }
  }
}

void check_input(const Tensor& input, const ConvLayerParams& params) {
  params.validate();
  if (input.rank() != 3) {
    throw DimensionError("conv2d: input must be [C,H,W], got " + shape_to_string(input.shape()));
  }
  if (input.dim(0) != params.in_channels()) {
    throw DimensionError("conv2d: input channel axis is " + std::to_string(input.dim(0)) +
                         " but kernels expect " + std::to_string(params.in_channels()) +
                         " (kernel axis 1)");
  }
  if (input.dim(1) == 0 || input.dim(2) == 0) {
    throw DimensionError("conv2d: spatial axes must be >= 1, got " +
                         shape_to_string(input.shape()));
  }
}

void check_grad_output(const Tensor& input, const ConvLayerParams& params,
                       const Tensor& grad_output) {
  const Shape expected{params.out_channels(), input.dim(1), input.dim(2)};
  if (grad_output.shape() != expected) {
    throw DimensionError("conv2d_backward: grad_output shape " +
                         shape_to_string(grad_output.shape()) + " differs from forward output " +
                         shape_to_string(expected));
  }
}

// cols[(c*k + i)*k + j, y*W + x] = input[c, y+i-p, x+j-p] (zero outside).
std::vector<double> im2col(const Tensor& input, std::size_t k) {
  const std::ptrdiff_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const std::ptrdiff_t kk = k, pad = k / 2;
  std::vector<double> cols(static_cast<std::size_t>(C * kk * kk * H * W));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < C; ++c) {
    const double* src = input.data() + c * H * W;
    for (std::ptrdiff_t i = 0; i < kk; ++i) {
      for (std::ptrdiff_t j = 0; j < kk; ++j) {
        double* dst = cols.data() + ((c * kk + i) * kk + j) * H * W;
        for (std::ptrdiff_t y = 0; y < H; ++y) {
          const std::ptrdiff_t sy = y + i - pad;
          double* drow = dst + y * W;
          if (sy < 0 || sy >= H) {
            std::fill(drow, drow + W, 0.0);
            continue;
          }
          const double* srow = src + sy * W;
          for (std::ptrdiff_t x = 0; x < W; ++x) {
            const std::ptrdiff_t sx = x + j - pad;
            drow[x] = (sx >= 0 && sx < W) ? srow[sx] : 0.0;
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatter-add column gradients back onto the input grid.
void col2im(const std::vector<double>& cols, std::size_t k, Tensor& grad_input) {
  const std::ptrdiff_t C = grad_input.dim(0), H = grad_input.dim(1), W = grad_input.dim(2);
  const std::ptrdiff_t kk = k, pad = k / 2;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < C; ++c) {
    double* dst = grad_input.data() + c * H * W;
    for (std::ptrdiff_t i = 0; i < kk; ++i) {
      for (std::ptrdiff_t j = 0; j < kk; ++j) {
        const double* src = cols.data() + ((c * kk + i) * kk + j) * H * W;
        for (std::ptrdiff_t y = 0; y < H; ++y) {
          const std::ptrdiff_t sy = y + i - pad;
          if (sy < 0 || sy >= H) continue;
          double* drow = dst + sy * W;
          const double* srow = src + y * W;
          for (std::ptrdiff_t x = 0; x < W; ++x) {
            const std::ptrdiff_t sx = x + j - pad;
            if (sx >= 0 && sx < W) drow[sx] += srow[x];
          }
        }
      }
    }
  }
}

}  // namespace

ConvLayerParams::ConvLayerParams(std::size_t out_channels, std::size_t in_channels, std::size_t k)
    : kernels(Shape{out_channels, in_channels, k, k}), bias(Shape{out_channels}) {
  validate();
}

ConvLayerParams::ConvLayerParams(Tensor k, Tensor b) : kernels(std::move(k)), bias(std::move(b)) {
  validate();
}

void ConvLayerParams::validate() const {
  if (kernels.rank() != 4) {
    throw DimensionError("conv kernels must be [out,in,k,k], got " +
                         shape_to_string(kernels.shape()));
  }
  if (kernels.dim(2) != kernels.dim(3)) {
    throw DimensionError("conv kernels must be square, got " + shape_to_string(kernels.shape()));
  }
  if (kernels.dim(2) % 2 == 0) {
    throw ArgumentError("conv kernel size must be odd for same padding, got " +
                        std::to_string(kernels.dim(2)));
  }
  if (bias.rank() != 1 || bias.dim(0) != kernels.dim(0)) {
    throw DimensionError("conv bias shape " + shape_to_string(bias.shape()) +
                         " does not match out_channels " + std::to_string(kernels.dim(0)));
  }
}

Tensor conv2d_forward(const Tensor& input, const ConvLayerParams& params) {
  check_input(input, params);
  const std::size_t O = params.out_channels(), C = params.in_channels();
  const std::size_t k = params.kernel_size();
  const std::size_t H = input.dim(1), W = input.dim(2), HW = H * W;

  Tensor out(Shape{O, H, W});
  RowMap out_m(out.data(), O, HW);
  ConstRowMap kmat(params.kernels.data(), O, C * k * k);
  if (k == 1) {
    product(out_m, kmat, ConstRowMap(input.data(), C, HW));
  } else {
    const std::vector<double> cols = im2col(input, k);
    product(out_m, kmat, ConstRowMap(cols.data(), C * k * k, HW));
  }
  for (std::size_t o = 0; o < O; ++o) out_m.row(o).array() += params.bias[o];
  return out;
}

ConvGradients conv2d_backward(const Tensor& input, const ConvLayerParams& params,
                              const Tensor& grad_output) {
  check_input(input, params);
  check_grad_output(input, params, grad_output);
  const std::size_t O = params.out_channels(), C = params.in_channels();
  const std::size_t k = params.kernel_size();
  const std::size_t H = input.dim(1), W = input.dim(2), HW = H * W;
  const std::size_t rows = C * k * k;

  ConvGradients g{Tensor(input.shape()), Tensor(params.kernels.shape()),
                  Tensor(params.bias.shape())};
  ConstRowMap gout(grad_output.data(), O, HW);
  ConstRowMap kmat(params.kernels.data(), O, rows);
  RowMap gk(g.kernels.data(), O, rows);

  for (std::size_t o = 0; o < O; ++o) {
    const double* row = grad_output.data() + o * HW;
    double acc = 0.0;
    for (std::size_t i = 0; i < HW; ++i) acc += row[i];
    g.bias[o] = acc;
  }

  if (k == 1) {
    ConstRowMap cols(input.data(), C, HW);
    product(gk, gout, cols.transpose());
    product(RowMap(g.input.data(), C, HW), kmat.transpose(), gout);
    return g;
  }
  const std::vector<double> cols = im2col(input, k);
  product(gk, gout, ConstRowMap(cols.data(), rows, HW).transpose());
  std::vector<double> gcols(rows * HW);
  product(RowMap(gcols.data(), rows, HW), kmat.transpose(), gout);
  col2im(gcols, k, g.input);
  return g;
}

}  // namespace wavefuse::numerics
