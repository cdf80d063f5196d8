#include <algorithm>
#include <bit>
#include <string>

#include "wavefuse/error.hpp"
#include "wavefuse/wavelet.hpp"

namespace wavefuse::wavelet {

namespace {

// Half-sample symmetric index into [0, n): period 2n, mirrored second half.
std::size_t mirror_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  const std::ptrdiff_t period = 2 * n;
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < n ? m : period - 1 - m);
}

std::size_t wrap_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  std::ptrdiff_t m = i % n;
  return static_cast<std::size_t>(m < 0 ? m + n : m);
}

Coeffs1D analyze_symmetric(std::span<const double> x, const WaveletBasis& b) {
  const std::ptrdiff_t n = x.size(), taps = b.taps();
  const std::size_t out = coeff_length(x.size(), b, Extension::symmetric);
  Coeffs1D c{std::vector<double>(out), std::vector<double>(out)};
  for (std::size_t k = 0; k < out; ++k) {
    double a = 0.0, d = 0.0;
    for (std::ptrdiff_t j = 0; j < taps; ++j) {
      const double v = x[mirror_index(2 * static_cast<std::ptrdiff_t>(k) + 1 - j, n)];
      a += b.dec_lowpass[j] * v;
      d += b.dec_highpass[j] * v;
    }
    c.approx[k] = a;
    c.detail[k] = d;
  }
  return c;
}

// Valid part of the upsampled synthesis convolution; aligns with analyze_symmetric.
std::vector<double> synthesize_symmetric(std::span<const double> a, std::span<const double> d,
                                         const WaveletBasis& b, std::size_t target) {
  const std::ptrdiff_t taps = b.taps(), n = a.size();
  std::vector<double> out(target, 0.0);
  for (std::size_t m = 0; m < target; ++m) {
    const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(m) + taps - 2;
    // k ranges over coefficients whose filter support covers t: 0 <= t - 2k < taps.
    std::ptrdiff_t k_lo = (t - taps + 2) / 2;
    if (k_lo < 0) k_lo = 0;
    std::ptrdiff_t k_hi = t / 2;
    if (k_hi > n - 1) k_hi = n - 1;
    double acc = 0.0;
    for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
      const std::ptrdiff_t f = t - 2 * k;
      if (f < 0 || f >= taps) continue;
      acc += a[k] * b.rec_lowpass[f] + d[k] * b.rec_highpass[f];
    }
    out[m] = acc;
  }
  return out;
}

Coeffs1D analyze_periodic(std::span<const double> x, const WaveletBasis& b) {
  const std::ptrdiff_t n = x.size(), taps = b.taps();
  const std::ptrdiff_t padded = n + (n % 2);
  const std::size_t out = padded / 2;
  auto sample = [&](std::ptrdiff_t i) { return i < n ? x[i] : x[n - 1]; };
  Coeffs1D c{std::vector<double>(out), std::vector<double>(out)};
  for (std::size_t k = 0; k < out; ++k) {
    double a = 0.0, d = 0.0;
    for (std::ptrdiff_t j = 0; j < taps; ++j) {
      const double v =
          sample(static_cast<std::ptrdiff_t>(wrap_index(2 * static_cast<std::ptrdiff_t>(k) + 1 - j,
                                                        padded)));
      a += b.dec_lowpass[j] * v;
      d += b.dec_highpass[j] * v;
    }
    c.approx[k] = a;
    c.detail[k] = d;
  }
  return c;
}

// The periodized analysis operator is orthogonal, so synthesis is its transpose.
std::vector<double> synthesize_periodic(std::span<const double> a, std::span<const double> d,
                                        const WaveletBasis& b, std::size_t target) {
  const std::ptrdiff_t taps = b.taps();
  const std::ptrdiff_t padded = 2 * static_cast<std::ptrdiff_t>(a.size());
  std::vector<double> full(padded, 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::ptrdiff_t j = 0; j < taps; ++j) {
      full[wrap_index(2 * static_cast<std::ptrdiff_t>(k) + 1 - j, padded)] +=
          b.dec_lowpass[j] * a[k] + b.dec_highpass[j] * d[k];
    }
  }
  full.resize(target);
  return full;
}

std::vector<double> column(const Matrix& m, std::size_t c) {
  std::vector<double> v(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) v[r] = m(r, c);
  return v;
}

// Level input dims for each level of a pyramid, derived from the original dims.
std::vector<std::pair<std::size_t, std::size_t>> level_input_dims(const WaveletPyramid& p,
                                                                  const WaveletBasis& b) {
  std::vector<std::pair<std::size_t, std::size_t>> dims;
  std::size_t r = p.rows, c = p.cols;
  for (std::size_t l = 0; l < p.levels.size(); ++l) {
    dims.emplace_back(r, c);
    r = coeff_length(r, b, p.extension);
    c = coeff_length(c, b, p.extension);
  }
  return dims;
}

}  // namespace

std::size_t coeff_length(std::size_t n, const WaveletBasis& basis, Extension ext) {
  if (ext == Extension::periodization) return (n + 1) / 2;
  return (n + basis.taps() - 1) / 2;
}

Coeffs1D dwt1d(std::span<const double> signal, const WaveletBasis& basis, Extension ext) {
  if (signal.empty()) throw ArgumentError("dwt1d: signal must have at least one sample");
  return ext == Extension::symmetric ? analyze_symmetric(signal, basis)
                                     : analyze_periodic(signal, basis);
}

std::vector<double> idwt1d(std::span<const double> approx, std::span<const double> detail,
                           const WaveletBasis& basis, std::size_t target_len, Extension ext) {
  if (approx.size() != detail.size()) {
    throw ArgumentError("idwt1d: approx length " + std::to_string(approx.size()) +
                        " differs from detail length " + std::to_string(detail.size()));
  }
  if (approx.empty()) throw ArgumentError("idwt1d: empty coefficient vectors");
  if (target_len == 0 || coeff_length(target_len, basis, ext) != approx.size()) {
    throw ArgumentError("idwt1d: " + std::to_string(approx.size()) +
                        " coefficients cannot reconstruct a signal of length " +
                        std::to_string(target_len) + " with " + basis.name);
  }
  return ext == Extension::symmetric ? synthesize_symmetric(approx, detail, basis, target_len)
                                     : synthesize_periodic(approx, detail, basis, target_len);
}

SubbandSet dwt2d_level(const Matrix& m, const WaveletBasis& basis, Extension ext) {
  if (m.rows() == 0 || m.cols() == 0) throw ArgumentError("dwt2d_level: empty matrix");
  const std::size_t R = m.rows();
  const std::size_t nc = coeff_length(m.cols(), basis, ext);
  const std::size_t nr = coeff_length(R, basis, ext);

  // Rows: low/high along x.
  Matrix lo_x(R, nc), hi_x(R, nc);
  for (std::size_t r = 0; r < R; ++r) {
    Coeffs1D c = dwt1d(m.row(r), basis, ext);
    std::copy(c.approx.begin(), c.approx.end(), lo_x.row(r).begin());
    std::copy(c.detail.begin(), c.detail.end(), hi_x.row(r).begin());
  }
  // Columns: low/high along y.
  SubbandSet s{Matrix(nr, nc), Matrix(nr, nc), Matrix(nr, nc), Matrix(nr, nc)};
  for (std::size_t c = 0; c < nc; ++c) {
    Coeffs1D from_lo = dwt1d(column(lo_x, c), basis, ext);
    Coeffs1D from_hi = dwt1d(column(hi_x, c), basis, ext);
    for (std::size_t r = 0; r < nr; ++r) {
      s.L(r, c) = from_lo.approx[r];
      s.V(r, c) = from_lo.detail[r];
      s.H(r, c) = from_hi.approx[r];
      s.D(r, c) = from_hi.detail[r];
    }
  }
  return s;
}

Matrix idwt2d_level(const SubbandSet& s, const WaveletBasis& basis, std::size_t rows,
                    std::size_t cols, Extension ext) {
  if (!s.L.same_dims(s.H) || !s.L.same_dims(s.V) || !s.L.same_dims(s.D)) {
    throw StructureError("idwt2d_level: subbands have differing dims (L " + s.L.dims_string() +
                         ", H " + s.H.dims_string() + ", V " + s.V.dims_string() + ", D " +
                         s.D.dims_string() + ")");
  }
  const std::size_t nr = s.L.rows(), nc = s.L.cols();
  if (coeff_length(rows, basis, ext) != nr || coeff_length(cols, basis, ext) != nc) {
    throw StructureError("idwt2d_level: subbands " + s.L.dims_string() +
                         " cannot reconstruct " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  Matrix lo_x(rows, nc), hi_x(rows, nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto lo = idwt1d(column(s.L, c), column(s.V, c), basis, rows, ext);
    const auto hi = idwt1d(column(s.H, c), column(s.D, c), basis, rows, ext);
    for (std::size_t r = 0; r < rows; ++r) {
      lo_x(r, c) = lo[r];
      hi_x(r, c) = hi[r];
    }
  }
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto v = idwt1d(lo_x.row(r), hi_x.row(r), basis, cols, ext);
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

std::size_t max_level(std::size_t rows, std::size_t cols) {
  const std::size_t m = std::min(rows, cols);
  return m == 0 ? 0 : static_cast<std::size_t>(std::bit_width(m) - 1);
}

WaveletPyramid wavedec2(const Matrix& m, const WaveletBasis& basis, std::size_t levels,
                        Extension ext) {
  if (levels == 0) throw ArgumentError("wavedec2: levels must be >= 1");
  if (m.rows() == 0 || m.cols() == 0) throw ArgumentError("wavedec2: empty matrix");
  const std::size_t limit = max_level(m.rows(), m.cols());
  if (levels > limit) {
    throw ArgumentError("wavedec2: " + std::to_string(levels) + " levels requested for a " +
                        m.dims_string() + " matrix; maximum feasible level is " +
                        std::to_string(limit));
  }
  WaveletPyramid p;
  p.rows = m.rows();
  p.cols = m.cols();
  p.basis_name = basis.name;
  p.extension = ext;
  Matrix approx = m;
  for (std::size_t l = 0; l < levels; ++l) {
    SubbandSet s = dwt2d_level(approx, basis, ext);
    p.levels.push_back({std::move(s.H), std::move(s.V), std::move(s.D)});
    approx = std::move(s.L);
  }
  p.top_approx = std::move(approx);
  return p;
}

void validate_pyramid(const WaveletPyramid& p) {
  if (p.levels.empty()) throw StructureError("pyramid has no detail levels");
  const WaveletBasis& b = basis_by_name(p.basis_name);
  const auto dims = level_input_dims(p, b);
  for (std::size_t l = 0; l < p.levels.size(); ++l) {
    const std::size_t r = coeff_length(dims[l].first, b, p.extension);
    const std::size_t c = coeff_length(dims[l].second, b, p.extension);
    const DetailSet& d = p.levels[l];
    for (const Matrix* m : {&d.H, &d.V, &d.D}) {
      if (m->rows() != r || m->cols() != c) {
        throw StructureError("pyramid level " + std::to_string(l + 1) + " subband is " +
                             m->dims_string() + ", expected " + std::to_string(r) + "x" +
                             std::to_string(c));
      }
    }
  }
  const DetailSet& last = p.levels.back();
  if (!p.top_approx.same_dims(last.H)) {
    throw StructureError("pyramid top approximation is " + p.top_approx.dims_string() +
                         ", expected " + last.H.dims_string());
  }
}

bool same_structure(const WaveletPyramid& a, const WaveletPyramid& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.basis_name != b.basis_name ||
      a.extension != b.extension || a.levels.size() != b.levels.size() ||
      !a.top_approx.same_dims(b.top_approx)) {
    return false;
  }
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    if (!a.levels[l].H.same_dims(b.levels[l].H) || !a.levels[l].V.same_dims(b.levels[l].V) ||
        !a.levels[l].D.same_dims(b.levels[l].D)) {
      return false;
    }
  }
  return true;
}

Matrix waverec2(const WaveletPyramid& p, const WaveletBasis& basis) {
  if (basis.name != p.basis_name) {
    throw StructureError("pyramid built with " + p.basis_name + " cannot be inverted with " +
                         basis.name);
  }
  validate_pyramid(p);
  const auto dims = level_input_dims(p, basis);
  Matrix approx = p.top_approx;
  for (std::size_t l = p.levels.size(); l-- > 0;) {
    const DetailSet& d = p.levels[l];
    SubbandSet s{std::move(approx), d.H, d.V, d.D};
    approx = idwt2d_level(s, basis, dims[l].first, dims[l].second, p.extension);
  }
  return approx;
}

Matrix waverec2(const WaveletPyramid& p) { return waverec2(p, basis_by_name(p.basis_name)); }

}  // namespace wavefuse::wavelet
