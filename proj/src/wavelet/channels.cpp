#include "wavefuse/error.hpp"
#include "wavefuse/wavelet.hpp"

namespace wavefuse::wavelet {

namespace {

void check_features(const Tensor& features) {
  if (features.rank() != 3) {
    throw DimensionError("channel wavelet transform expects [C,H,W], got " +
                         shape_to_string(features.shape()));
  }
}

Tensor allocate_output(std::span<const WaveletPyramid> pyramids) {
  if (pyramids.empty()) throw ArgumentError("waverec2_channels: no pyramids");
  for (const auto& p : pyramids) {
    if (p.rows != pyramids[0].rows || p.cols != pyramids[0].cols) {
      throw StructureError("waverec2_channels: channel pyramids have differing original dims");
    }
  }
  return Tensor(Shape{pyramids.size(), pyramids[0].rows, pyramids[0].cols});
}

}  // namespace

std::vector<WaveletPyramid> wavedec2_channels(const Tensor& features, const WaveletBasis& basis,
                                              std::size_t levels, Extension ext) {
  check_features(features);
  const std::ptrdiff_t C = features.dim(0);
  std::vector<WaveletPyramid> out(C);
  // Validate once up front so no exception escapes the parallel region.
  if (levels == 0 || levels > max_level(features.dim(1), features.dim(2))) {
    return reference::wavedec2_channels(features, basis, levels, ext);
  }
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < C; ++c) {
    out[c] = wavedec2(channel_plane(features, c), basis, levels, ext);
  }
  return out;
}

Tensor waverec2_channels(std::span<const WaveletPyramid> pyramids) {
  Tensor out = allocate_output(pyramids);
  for (const auto& p : pyramids) validate_pyramid(p);
  const std::ptrdiff_t C = pyramids.size();
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < C; ++c) {
    set_channel_plane(out, c, waverec2(pyramids[c]));
  }
  return out;
}

namespace reference {

std::vector<WaveletPyramid> wavedec2_channels(const Tensor& features, const WaveletBasis& basis,
                                              std::size_t levels, Extension ext) {
  check_features(features);
  std::vector<WaveletPyramid> out;
  out.reserve(features.dim(0));
  for (std::size_t c = 0; c < features.dim(0); ++c) {
    out.push_back(wavedec2(channel_plane(features, c), basis, levels, ext));
  }
  return out;
}

Tensor waverec2_channels(std::span<const WaveletPyramid> pyramids) {
  Tensor out = allocate_output(pyramids);
  for (std::size_t c = 0; c < pyramids.size(); ++c) {
    set_channel_plane(out, c, waverec2(pyramids[c]));
  }
  return out;
}

}  // namespace reference

}  // namespace wavefuse::wavelet
