#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "wavefuse/tensor.hpp"

namespace wavefuse::imageio {

// Grayscale raster with pixels in [0,1], row-major.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, double fill = 0.0)
      : width(w), height(h), pixels(w * h, fill) {}
  GrayImage(std::size_t w, std::size_t h, std::vector<double> values);

  double& at(std::size_t x, std::size_t y) noexcept { return pixels[y * width + x]; }
  double at(std::size_t x, std::size_t y) const noexcept { return pixels[y * width + x]; }

  bool same_dims(const GrayImage& o) const noexcept {
    return width == o.width && height == o.height;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// PGM (binary P5, maxval 255) or 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette).
// Color is reduced with luma weights 0.299/0.587/0.114 before dividing by 255.
GrayImage load_grayscale(const std::filesystem::path& path);

// Writes round(clamp(p,0,1)*255). ".png" extension selects PNG, anything else PGM P5.
void save_grayscale(const GrayImage& image, const std::filesystem::path& path);

// Bilinear, half-pixel centers, edge-clamped taps.
GrayImage resize_bilinear(const GrayImage& image, std::size_t new_width, std::size_t new_height);

// Quantization used by save and by histogram metrics: floor(clamp(p)*255 + 0.5).
unsigned char quantize(double p) noexcept;

Tensor to_tensor(const GrayImage& image);    // [1,H,W]
GrayImage from_tensor(const Tensor& t);      // [1,H,W], clamps into [0,1]
Matrix to_matrix(const GrayImage& image);
GrayImage from_matrix(const Matrix& m);      // clamps into [0,1]

}  // namespace wavefuse::imageio
