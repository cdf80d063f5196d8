#include <string>

#include "wavefuse/error.hpp"
#include "wavefuse/metrics.hpp"
#include "wavefuse/network.hpp"

namespace wavefuse::network {

LossResult reconstruction_loss(const Tensor& output, const Tensor& input, double lambda) {
  require_same_shape(output, input, "reconstruction_loss");
  if (output.rank() != 3 || output.dim(0) != 1) {
    throw DimensionError("reconstruction_loss expects [1,H,W], got " + shape_to_string(output.shape()));
  }
  const std::size_t n = output.size();
  const std::size_t h = output.dim(1), w = output.dim(2);

  LossResult r;
  r.grad_output = Tensor(output.shape());
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = output[i] - input[i];
    sq += d * d;
    r.grad_output[i] = 2.0 * d / static_cast<double>(n);
  }
  r.breakdown.pixel = sq / static_cast<double>(n);

  const Matrix out_m(h, w, std::vector<double>(output.values().begin(), output.values().end()));
  const Matrix in_m(h, w, std::vector<double>(input.values().begin(), input.values().end()));
  const auto s = metrics::ssim_with_gradient(out_m, in_m);
  r.breakdown.ssim_loss = 1.0 - s.value;
  for (std::size_t i = 0; i < n; ++i) r.grad_output[i] -= lambda * s.grad_x.values()[i];

  r.breakdown.total = r.breakdown.pixel + lambda * r.breakdown.ssim_loss;
  return r;
}

}  // namespace wavefuse::network
