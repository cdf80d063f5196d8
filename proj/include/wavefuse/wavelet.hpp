#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wavefuse/tensor.hpp"

namespace wavefuse::wavelet {

// Signal extension at the borders.
//  symmetric:     half-sample mirror (x[-1] = x[0]); coefficient length floor((n+taps-1)/2).
//  periodization: circular, odd lengths padded by repeating the last sample; length ceil(n/2).
enum class Extension { symmetric, periodization };

struct WaveletBasis {
  std::string name;
  std::vector<double> dec_lowpass;
  std::vector<double> dec_highpass;
  std::vector<double> rec_lowpass;
  std::vector<double> rec_highpass;

  std::size_t taps() const noexcept { return dec_lowpass.size(); }
};

// Shipped orthonormal Daubechies bases: db1 (Haar) through db4.
const std::vector<std::string>& basis_names();
// Throws ArgumentError listing the valid names.
const WaveletBasis& basis_by_name(std::string_view name);

// Orthonormality, quadrature-mirror and time-reversal checks. Empty string when valid,
// otherwise a description of the first violated invariant.
std::string check_basis(const WaveletBasis& basis, double tol = 1e-12);

struct Coeffs1D {
  std::vector<double> approx;
  std::vector<double> detail;
};

std::size_t coeff_length(std::size_t n, const WaveletBasis& basis, Extension ext);

Coeffs1D dwt1d(std::span<const double> signal, const WaveletBasis& basis,
               Extension ext = Extension::symmetric);
std::vector<double> idwt1d(std::span<const double> approx, std::span<const double> detail,
                           const WaveletBasis& basis, std::size_t target_len,
                           Extension ext = Extension::symmetric);

// Subband orientation: H is high-pass along rows (x) and low-pass along columns, so it
// responds to vertical edges; V is the transpose case; D is high-pass in both.
struct SubbandSet {
  Matrix L;
  Matrix H;
  Matrix V;
  Matrix D;
};

struct DetailSet {
  Matrix H;
  Matrix V;
  Matrix D;
};

struct WaveletPyramid {
  std::vector<DetailSet> levels;  // finest first
  Matrix top_approx;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string basis_name;
  Extension extension = Extension::symmetric;
};

SubbandSet dwt2d_level(const Matrix& m, const WaveletBasis& basis,
                       Extension ext = Extension::symmetric);
Matrix idwt2d_level(const SubbandSet& s, const WaveletBasis& basis, std::size_t rows,
                    std::size_t cols, Extension ext = Extension::symmetric);

// Number of dyadic halvings before the smaller side reaches 1: floor(log2(min(rows, cols))).
std::size_t max_level(std::size_t rows, std::size_t cols);

WaveletPyramid wavedec2(const Matrix& m, const WaveletBasis& basis, std::size_t levels,
                        Extension ext = Extension::symmetric);
// Throws StructureError when subband extents disagree with the recorded dims.
Matrix waverec2(const WaveletPyramid& pyramid, const WaveletBasis& basis);
Matrix waverec2(const WaveletPyramid& pyramid);

// Throws StructureError unless the pyramid's subband dims match its recorded geometry.
void validate_pyramid(const WaveletPyramid& pyramid);
bool same_structure(const WaveletPyramid& a, const WaveletPyramid& b);

// Per-channel transforms of a [C,H,W] tensor; channels run in parallel.
std::vector<WaveletPyramid> wavedec2_channels(const Tensor& features, const WaveletBasis& basis,
                                              std::size_t levels,
                                              Extension ext = Extension::symmetric);
Tensor waverec2_channels(std::span<const WaveletPyramid> pyramids);

namespace reference {
// Serial channel loop, for tests and benchmarks.
std::vector<WaveletPyramid> wavedec2_channels(const Tensor& features, const WaveletBasis& basis,
                                              std::size_t levels,
                                              Extension ext = Extension::symmetric);
Tensor waverec2_channels(std::span<const WaveletPyramid> pyramids);
}  // namespace reference

}  // namespace wavefuse::wavelet
