#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <string>

#include "wavefuse/error.hpp"
#include "wavefuse/network.hpp"

namespace wavefuse::network {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learning rate must be a finite non-negative number");
  }
  if (batch_size == 0) throw ArgumentError("batch size must be at least 1");
  if (epochs == 0) throw ArgumentError("epochs must be at least 1");
  if (!(lambda_ssim >= 0.0) || !std::isfinite(lambda_ssim)) {
    throw ArgumentError("lambda must be a finite non-negative number");
  }
  if (image_size == 0) throw ArgumentError("image size must be positive");
  architecture.validate();
}

std::vector<imageio::GrayImage> load_dataset(const fs::path& dir, std::size_t image_size) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<imageio::GrayImage> images;
  images.reserve(files.size());
  for (const auto& f : files) {
    images.push_back(imageio::resize_bilinear(imageio::load_grayscale(f), image_size, image_size));
  }
  return images;
}

TrainResult train(const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  return train_on_images(load_dataset(config.dataset_dir, config.image_size), config, on_epoch);
}

namespace {

struct ItemResult {
  LossBreakdown loss;
  ParameterGradients grads;
  std::exception_ptr error;
};

}  // namespace

TrainResult train_on_images(const std::vector<imageio::GrayImage>& images, const TrainConfig& config,
                            const EpochCallback& on_epoch) {
  config.validate();
  if (images.size() < config.batch_size) {
    throw DataError("dataset has " + std::to_string(images.size()) + " images, fewer than batch size " +
                    std::to_string(config.batch_size));
  }
  std::vector<Tensor> inputs;
  inputs.reserve(images.size());
  for (const auto& img : images) {
    if (img.width == 0 || img.height == 0) throw DataError("dataset contains an empty image");
    inputs.push_back(imageio::to_tensor(img));
  }

  std::mt19937_64 rng(config.seed);
  TrainResult result;
  result.weights = init_weights(config.architecture, config.seed);
  ModelWeights& w = result.weights;

  numerics::AdamHyperparameters hyper;
  hyper.learning_rate = config.learning_rate;
  std::vector<numerics::AdamState> kernel_state, bias_state;
  for (const auto& l : w.layers) {
    kernel_state.emplace_back(l.kernels.shape(), hyper);
    bias_state.emplace_back(l.bias.shape(), hyper);
  }

  std::vector<std::size_t> order(inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % (i + 1)]);
    }
    LossBreakdown epoch_sum;
    std::size_t epoch_steps = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      if (config.max_steps != 0 && result.steps == config.max_steps) break;
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      std::vector<ItemResult> items(count);

#pragma omp parallel for schedule(dynamic)
      for (std::size_t b = 0; b < count; ++b) {
        try {
          const Tensor& x = inputs[order[start + b]];
          const auto trace = forward_trace(x, w);
          auto l = reconstruction_loss(trace.output, x, config.lambda_ssim);
          items[b].loss = l.breakdown;
          items[b].grads = backward(trace, w, l.grad_output);
        } catch (...) {
          items[b].error = std::current_exception();
        }
      }

      // Fixed summation order keeps results independent of the thread count.
      ParameterGradients grads = ParameterGradients::zeros_like(w);
      LossBreakdown step;
      const double scale = 1.0 / static_cast<double>(count);
      for (auto& item : items) {
        if (item.error) std::rethrow_exception(item.error);
        grads.accumulate(item.grads, scale);
        step.total += scale * item.loss.total;
        step.pixel += scale * item.loss.pixel;
        step.ssim_loss += scale * item.loss.ssim_loss;
      }
      if (!std::isfinite(step.total)) {
        throw NumericError("loss became non-finite at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(result.steps));
      }
      for (std::size_t i = 0; i < w.layers.size(); ++i) {
        numerics::adam_update(w.layers[i].kernels, grads.kernels[i], kernel_state[i],
                              "layer " + std::to_string(i) + " kernels");
        numerics::adam_update(w.layers[i].bias, grads.bias[i], bias_state[i],
                              "layer " + std::to_string(i) + " bias");
      }
      epoch_sum.total += step.total;
      epoch_sum.pixel += step.pixel;
      epoch_sum.ssim_loss += step.ssim_loss;
      ++epoch_steps;
      ++result.steps;
    }
    if (epoch_steps == 0) break;
    const double inv = 1.0 / static_cast<double>(epoch_steps);
    LossBreakdown mean{epoch_sum.total * inv, epoch_sum.pixel * inv, epoch_sum.ssim_loss * inv};
    result.history.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace wavefuse::network
