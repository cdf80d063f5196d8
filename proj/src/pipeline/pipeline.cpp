#include "wavefuse/pipeline.hpp"

#include <algorithm>
#include <string>

#include "wavefuse/error.hpp"
#include "wavefuse/wavelet.hpp"

namespace wavefuse::pipeline {

namespace {

// Half-sample mirror: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
std::size_t mirror(std::size_t i, std::size_t n) {
  const std::size_t period = 2 * n;
  i %= period;
  return i < n ? i : period - 1 - i;
}

void require_pair(const imageio::GrayImage& a, const imageio::GrayImage& b) {
  if (a.width == 0 || a.height == 0) throw DimensionError("cannot fuse an empty image");
  if (!a.same_dims(b)) {
    throw DimensionError("source images differ in size: " + std::to_string(a.width) + "x" +
                         std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height));
  }
}

Tensor prepare(const imageio::GrayImage& img, std::size_t levels) {
  return pad_symmetric(imageio::to_tensor(img), padded_extent(img.height, levels),
                       padded_extent(img.width, levels));
}

}  // namespace

std::size_t padded_extent(std::size_t n, std::size_t levels) {
  const std::size_t m = std::size_t{1} << levels;
  return std::max<std::size_t>(8, (n + m - 1) / m * m);
}

Tensor pad_symmetric(const Tensor& t, std::size_t rows, std::size_t cols) {
  if (t.rank() != 3 || t.dim(1) == 0 || t.dim(2) == 0) {
    throw DimensionError("pad_symmetric expects a non-empty [C,H,W], got " + shape_to_string(t.shape()));
  }
  const std::size_t c = t.dim(0), h = t.dim(1), w = t.dim(2);
  if (rows < h || cols < w) throw ArgumentError("pad_symmetric cannot shrink");
  Tensor out({c, rows, cols});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < rows; ++y) {
      const std::size_t sy = mirror(y, h);
      for (std::size_t x = 0; x < cols; ++x) out.at(ch, y, x) = t.at(ch, sy, mirror(x, w));
    }
  }
  return out;
}

Tensor crop(const Tensor& t, std::size_t rows, std::size_t cols) {
  if (t.rank() != 3 || rows > t.dim(1) || cols > t.dim(2)) {
    throw DimensionError("cannot crop " + shape_to_string(t.shape()) + " to " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
  Tensor out({t.dim(0), rows, cols});
  for (std::size_t ch = 0; ch < t.dim(0); ++ch) {
    for (std::size_t y = 0; y < rows; ++y) {
      for (std::size_t x = 0; x < cols; ++x) out.at(ch, y, x) = t.at(ch, y, x);
    }
  }
  return out;
}

imageio::GrayImage fuse_images(const imageio::GrayImage& a, const imageio::GrayImage& b,
                               const network::ModelWeights& weights,
                               const fusion::FusionRuleConfig& config) {
  require_pair(a, b);
  config.validate();
  const auto& basis = wavelet::basis_by_name(config.basis);
  const Tensor fa = network::encode(prepare(a, config.levels), weights);
  const Tensor fb = network::encode(prepare(b, config.levels), weights);
  const auto pa = wavelet::wavedec2_channels(fa, basis, config.levels, config.extension);
  const auto pb = wavelet::wavedec2_channels(fb, basis, config.levels, config.extension);
  const auto fused = fusion::fuse_pyramids(pa, pb, config);
  const Tensor decoded = network::decode(wavelet::waverec2_channels(fused), weights);
  return imageio::from_tensor(crop(decoded, a.height, a.width));
}

imageio::GrayImage fuse_images_baseline(const imageio::GrayImage& a, const imageio::GrayImage& b,
                                        const network::ModelWeights& weights) {
  require_pair(a, b);
  Tensor fa = network::encode(prepare(a, 0), weights);
  const Tensor fb = network::encode(prepare(b, 0), weights);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] = 0.5 * (fa[i] + fb[i]);
  const Tensor decoded = network::decode(fa, weights);
  return imageio::from_tensor(crop(decoded, a.height, a.width));
}

imageio::GrayImage reconstruct(const imageio::GrayImage& image, const network::ModelWeights& weights,
                               std::size_t levels) {
  if (image.width == 0 || image.height == 0) throw DimensionError("cannot reconstruct an empty image");
  const Tensor decoded = network::decode(network::encode(prepare(image, levels), weights), weights);
  return imageio::from_tensor(crop(decoded, image.height, image.width));
}

}  // namespace wavefuse::pipeline
