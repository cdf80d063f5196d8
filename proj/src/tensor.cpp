#include "wavefuse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "wavefuse/error.hpp"

namespace wavefuse {

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_volume(shape_) != data_.size()) {
    throw DimensionError("tensor shape " + shape_to_string(shape_) + " holds " +
                         std::to_string(shape_volume(shape_)) + " values, got " +
                         std::to_string(data_.size()));
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape " + shape_to_string(a.shape()) +
                         " does not match " + shape_to_string(b.shape()));
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows_ * cols_ != data_.size()) {
    throw DimensionError("matrix " + dims_string() + " holds " + std::to_string(rows_ * cols_) +
                         " values, got " + std::to_string(data_.size()));
  }
}

std::string Matrix::dims_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix channel_plane(const Tensor& t, std::size_t c) {
  if (t.rank() != 3 || c >= t.dim(0)) {
    throw DimensionError("channel " + std::to_string(c) + " out of range for tensor " +
                         shape_to_string(t.shape()));
  }
  const std::size_t h = t.dim(1), w = t.dim(2);
  Matrix m(h, w);
  std::copy_n(t.data() + c * h * w, h * w, m.values().begin());
  return m;
}

void set_channel_plane(Tensor& t, std::size_t c, const Matrix& m) {
  if (t.rank() != 3 || c >= t.dim(0) || m.rows() != t.dim(1) || m.cols() != t.dim(2)) {
    throw DimensionError("cannot store " + m.dims_string() + " plane into channel " +
                         std::to_string(c) + " of " + shape_to_string(t.shape()));
  }
  std::copy(m.values().begin(), m.values().end(), t.data() + c * m.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("max_abs_diff: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " differ");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace wavefuse
