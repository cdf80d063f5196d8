#pragma once

#include <array>
#include <string>
#include <string_view>

#include "wavefuse/imageio.hpp"
#include "wavefuse/tensor.hpp"

namespace wavefuse::metrics {

using imageio::GrayImage;

// ---- structural similarity -------------------------------------------------------------

struct SsimParams {
  std::size_t window = 11;   // shrunk to the largest odd size that fits smaller images
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

// Mean SSIM over all valid (fully inside) window positions.
double ssim(const Matrix& x, const Matrix& y, const SsimParams& params = {});
double ssim(const GrayImage& x, const GrayImage& y, const SsimParams& params = {});

struct SsimGradient {
  double value = 0.0;
  Matrix grad_x;  // d ssim(x, y) / d x
};
SsimGradient ssim_with_gradient(const Matrix& x, const Matrix& y, const SsimParams& params = {});

// Per-scale means of the contrast-structure term and the full SSIM map.
struct SsimComponents {
  double ssim = 0.0;
  double contrast_structure = 0.0;
};
SsimComponents ssim_components(const Matrix& x, const Matrix& y, const SsimParams& params = {});

inline constexpr std::array<double, 5> kMsSsimWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

// Scales used for an image pair: the most (<= 5) dyadic scales whose coarsest side still
// holds a full window; at least one.
std::size_t ms_ssim_scales(std::size_t rows, std::size_t cols, const SsimParams& params = {});

// Multi-scale SSIM; 2x2 mean downsampling, weights renormalized when fewer than 5 scales
// fit. Negative per-scale terms are clamped to 0.
double ms_ssim(const Matrix& x, const Matrix& y, const SsimParams& params = {});
double ms_ssim(const GrayImage& x, const GrayImage& y, const SsimParams& params = {});

// ---- fusion quality metrics ------------------------------------------------------------

double entropy(const GrayImage& image);
double cross_entropy_metric(const GrayImage& a, const GrayImage& b, const GrayImage& fused);
double variance_metric(const GrayImage& fused);

enum class FmiVariant { pixel, dct, wavelet };

// Feature image (already binned to 0..255) used by the FMI variant.
std::vector<unsigned char> fmi_features(const GrayImage& image, FmiVariant variant);

// 2 I(u;v) / (H(u) + H(v)) from the joint 256x256 histogram; 1 when both are constant.
double normalized_mutual_information(std::span<const unsigned char> u,
                                     std::span<const unsigned char> v);

double fmi(const GrayImage& a, const GrayImage& b, const GrayImage& fused, FmiVariant variant);

struct QabfParams {
  double gamma_g = 0.9994;
  double kappa_g = -15.0;
  double sigma_g = 0.5;
  double gamma_a = 0.9879;
  double kappa_a = -22.0;
  double sigma_a = 0.8;
  double weight_exponent = 1.0;
};

double q_abf(const GrayImage& a, const GrayImage& b, const GrayImage& fused,
             const QabfParams& params = {});

// Pairwise nonlinear correlation coefficient (normalized mutual information over
// 256 intensity bins).
double nonlinear_correlation(const GrayImage& u, const GrayImage& v);
double q_nice(const GrayImage& a, const GrayImage& b, const GrayImage& fused);

// ---- reports ---------------------------------------------------------------------------

inline constexpr std::array<std::string_view, 9> kMetricNames{
    "EN", "CE", "FMI_pixel", "FMI_dct", "FMI_w", "Q_NICE", "Q_ABF", "VARI", "MS_SSIM"};

struct MetricReport {
  std::string source_a;
  std::string source_b;
  std::string fused;
  std::array<double, kMetricNames.size()> values{};

  double get(std::string_view name) const;  // throws ArgumentError for unknown names
  double& operator[](std::string_view name);
};

MetricReport evaluate_all(const GrayImage& a, const GrayImage& b, const GrayImage& fused);

std::string csv_header();
std::string csv_row(const MetricReport& report);
std::string to_json(const MetricReport& report);

}  // namespace wavefuse::metrics
