#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "wavefuse/imageio.hpp"
#include "wavefuse/numerics.hpp"
#include "wavefuse/tensor.hpp"

namespace wavefuse::network {

// Two 3x3 convolutions, each followed by ReLU.
struct ConvBlockSpec {
  std::uint32_t in = 0;
  std::uint32_t mid = 0;
  std::uint32_t out = 0;
  friend bool operator==(const ConvBlockSpec&, const ConvBlockSpec&) = default;
};

struct ArchitectureSpec {
  std::vector<ConvBlockSpec> encoder;
  std::vector<ConvBlockSpec> decoder;
  std::uint32_t final_in = 0;   // 1x1 output convolution
  std::uint32_t final_out = 1;
  std::uint32_t feature_channels = 48;
  std::uint32_t kernel_size = 3;

  // Encoder 1->16->16, 16->32->32, 32->48->48; decoder 48->32->32, 32->16->16; 1x1 16->1.
  static ArchitectureSpec wavefuse();

  void validate() const;  // throws ModelError
  std::size_t layer_count() const { return 2 * (encoder.size() + decoder.size()) + 1; }
  std::size_t encoder_layer_count() const { return 2 * encoder.size(); }
  // [out, in, k, k] for every convolution in topological order.
  std::vector<Shape> kernel_shapes() const;

  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

struct ModelWeights {
  static constexpr std::uint32_t kFormatVersion = 1;

  ArchitectureSpec spec;
  std::vector<numerics::ConvLayerParams> layers;
  std::uint32_t format_version = kFormatVersion;

  void validate() const;  // throws ModelError
  std::size_t parameter_count() const;

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases; mt19937_64 seeded with `seed`.
ModelWeights init_weights(const ArchitectureSpec& spec, std::uint64_t seed);

// [1,H,W] -> [48,H,W]
Tensor encode(const Tensor& image, const ModelWeights& weights);
// [48,H,W] -> [1,H,W], sigmoid output.
Tensor decode(const Tensor& features, const ModelWeights& weights);

// Activations kept for the backward pass of one encode->decode sweep.
struct ForwardTrace {
  std::vector<Tensor> layer_inputs;  // input to each convolution
  std::vector<Tensor> pre_activation;  // each convolution's output
  Tensor output;
};

ForwardTrace forward_trace(const Tensor& image, const ModelWeights& weights);

struct ParameterGradients {
  std::vector<Tensor> kernels;
  std::vector<Tensor> bias;

  static ParameterGradients zeros_like(const ModelWeights& weights);
  void accumulate(const ParameterGradients& other, double scale = 1.0);
};

// Back-propagates dL/d(output) through the traced autoencoder.
ParameterGradients backward(const ForwardTrace& trace, const ModelWeights& weights,
                            const Tensor& grad_output);

// ---- loss --------------------------------------------------------------------------------

struct LossBreakdown {
  double total = 0.0;
  double pixel = 0.0;      // mean squared error
  double ssim_loss = 0.0;  // 1 - SSIM, 11x11 Gaussian window, sigma 1.5, data range 1
};

struct LossResult {
  LossBreakdown breakdown;
  Tensor grad_output;  // dL/d(output)
};

LossResult reconstruction_loss(const Tensor& output, const Tensor& input, double lambda);

// ---- training ----------------------------------------------------------------------------

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 16;
  std::size_t epochs = 100;
  double lambda_ssim = 1000.0;
  std::uint64_t seed = 42;
  std::filesystem::path dataset_dir;
  std::size_t image_size = 256;
  std::size_t max_steps = 0;  // 0: run all epochs
  ArchitectureSpec architecture = ArchitectureSpec::wavefuse();

  void validate() const;  // throws ArgumentError
};

struct TrainResult {
  ModelWeights weights;
  std::vector<LossBreakdown> history;  // mean over the steps of each epoch
  std::size_t steps = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, const LossBreakdown&)>;

// All PGM/PNG files in dataset_dir, sorted by name, resized to image_size squared.
std::vector<imageio::GrayImage> load_dataset(const std::filesystem::path& dir,
                                             std::size_t image_size);

TrainResult train(const TrainConfig& config, const EpochCallback& on_epoch = {});
TrainResult train_on_images(const std::vector<imageio::GrayImage>& images,
                            const TrainConfig& config, const EpochCallback& on_epoch = {});

// ---- model files -------------------------------------------------------------------------

void save_model(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_model(const std::filesystem::path& path);

std::vector<unsigned char> serialize_model(const ModelWeights& weights);
ModelWeights deserialize_model(std::span<const unsigned char> bytes);

}  // namespace wavefuse::network
