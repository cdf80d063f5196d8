#pragma once

#include "wavefuse/fusion_rules.hpp"
#include "wavefuse/imageio.hpp"
#include "wavefuse/network.hpp"

namespace wavefuse::pipeline {

// Images are mirror-padded on the bottom/right to a multiple of 2^levels (and at least 8
// per side) before encoding, then cropped back after decoding.
std::size_t padded_extent(std::size_t n, std::size_t levels);
Tensor pad_symmetric(const Tensor& t, std::size_t rows, std::size_t cols);
Tensor crop(const Tensor& t, std::size_t rows, std::size_t cols);

// Encode both sources, fuse their feature pyramids, decode. Sources must share dimensions.
imageio::GrayImage fuse_images(const imageio::GrayImage& a, const imageio::GrayImage& b,
                               const network::ModelWeights& weights,
                               const fusion::FusionRuleConfig& config);

// No wavelet stage: decode the mean of the two feature tensors.
imageio::GrayImage fuse_images_baseline(const imageio::GrayImage& a, const imageio::GrayImage& b,
                                        const network::ModelWeights& weights);

// decode(encode(x)) under the same padding policy.
imageio::GrayImage reconstruct(const imageio::GrayImage& image, const network::ModelWeights& weights,
                               std::size_t levels = 0);

}  // namespace wavefuse::pipeline
