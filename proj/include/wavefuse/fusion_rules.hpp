#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wavefuse/tensor.hpp"
#include "wavefuse/wavelet.hpp"

namespace wavefuse::fusion {

enum class Rule { regional, l1norm, combined };
enum class CombineMode { mean };

Rule parse_rule(std::string_view name);  // "regional" | "l1" | "l1norm" | "combined"
std::string rule_name(Rule rule);

struct FusionRuleConfig {
  Rule rule = Rule::combined;
  std::size_t window = 3;          // regional-energy window, odd
  double match_threshold = 0.6;    // T in (0,1)
  std::size_t block_radius = 1;    // l1-norm activity averaging radius
  CombineMode combine = CombineMode::mean;
  std::size_t levels = 2;
  std::string basis = "db1";
  wavelet::Extension extension = wavelet::Extension::symmetric;

  void validate() const;  // throws ArgumentError
};

using PyramidStack = std::vector<wavelet::WaveletPyramid>;

// Normalized binomial window weights, row-major window x window (3 -> [1 2 1]^T[1 2 1]/16).
std::vector<double> window_weights(std::size_t window);

// E[y,x] = sum_{i,j} w[i,j] * C[y+i, x+j]^2 with replicated edges.
Matrix regional_energy(const Matrix& coeffs, std::size_t window);

// Low-frequency rule: select the larger regional energy where the matching degree is
// below the threshold, otherwise weight the larger-energy source by
// 0.5 + 0.5 (1 - M) / (1 - T).
Matrix fuse_low_regional(const Matrix& a, const Matrix& b, const FusionRuleConfig& config);

double population_variance(std::span<const double> values);

// Returns whichever subband has strictly larger global variance; the mean on a tie.
Matrix fuse_high_variance(const Matrix& a, const Matrix& b);

// Weight map of the first source for one subband across a channel stack:
// activity = channel-wise l1 norm, box-averaged over (2r+1)^2, normalized against the
// other source (0.5 where both activities vanish). Second weight is (A2)/(A1+A2).
struct L1Weights {
  Matrix first;
  Matrix second;
};
L1Weights l1_weights(const std::vector<const Matrix*>& a, const std::vector<const Matrix*>& b,
                     std::size_t radius);

// l1-norm rule over the whole channel stack, applied identically to every subband.
PyramidStack fuse_l1norm(const PyramidStack& a, const PyramidStack& b, std::size_t radius);

// Per-channel regional rule: regional low-pass fusion of the top approximation, variance
// selection for every detail subband.
PyramidStack fuse_regional(const PyramidStack& a, const PyramidStack& b,
                           const FusionRuleConfig& config);

// Dispatch on config.rule; `combined` is the subband-wise mean of the two rule outputs.
PyramidStack fuse_pyramids(const PyramidStack& a, const PyramidStack& b,
                           const FusionRuleConfig& config);

// Subband-wise (a + b) / 2.
PyramidStack combine_mean(const PyramidStack& a, const PyramidStack& b);

}  // namespace wavefuse::fusion
