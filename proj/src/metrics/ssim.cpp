#include <algorithm>
#include <cmath>
#include <vector>

#include "wavefuse/error.hpp"
#include "wavefuse/metrics.hpp"

namespace wavefuse::metrics {

namespace {

std::vector<double> gaussian_taps(std::size_t size, double sigma) {
  std::vector<double> g(size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

std::size_t effective_window(std::size_t rows, std::size_t cols, std::size_t window) {
  std::size_t fit = std::min(rows, cols);
  if (fit % 2 == 0) --fit;
  return std::max<std::size_t>(1, std::min(window, fit));
}

// Separable "valid" correlation: output (rows-w+1) x (cols-w+1).
Matrix filter_valid(const Matrix& m, const std::vector<double>& g) {
  const std::size_t w = g.size();
  const std::size_t orows = m.rows() - w + 1, ocols = m.cols() - w + 1;
  Matrix tmp(m.rows(), ocols);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < ocols; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w; ++j) acc += g[j] * m(r, c + j);
      tmp(r, c) = acc;
    }
  }
  Matrix out(orows, ocols);
  for (std::size_t r = 0; r < orows; ++r) {
    for (std::size_t c = 0; c < ocols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < w; ++i) acc += g[i] * tmp(r + i, c);
      out(r, c) = acc;
    }
  }
  return out;
}

// Adjoint of filter_valid: scatter a valid-sized map back to full size.
Matrix filter_valid_adjoint(const Matrix& m, const std::vector<double>& g, std::size_t rows,
                            std::size_t cols) {
  const std::size_t w = g.size();
  Matrix tmp(rows, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      for (std::size_t i = 0; i < w; ++i) tmp(r + i, c) += g[i] * m(r, c);
    }
  }
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      for (std::size_t j = 0; j < w; ++j) out(r, c + j) += g[j] * tmp(r, c);
    }
  }
  return out;
}

Matrix product(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] * b.values()[i];
  return out;
}

void check_pair(const Matrix& x, const Matrix& y, const char* what) {
  if (!x.same_dims(y)) {
    throw ArgumentError(std::string(what) + ": dims " + x.dims_string() + " and " +
                        y.dims_string() + " differ");
  }
  if (x.empty()) throw ArgumentError(std::string(what) + ": empty input");
}

// Local statistics over every valid window position.
struct Moments {
  Matrix mu_x, mu_y, xx, yy, xy;  // E[x], E[y], E[x^2], E[y^2], E[xy]
  std::vector<double> taps;
};

Moments moments(const Matrix& x, const Matrix& y, const SsimParams& p) {
  Moments m;
  m.taps = gaussian_taps(effective_window(x.rows(), x.cols(), p.window), p.sigma);
  m.mu_x = filter_valid(x, m.taps);
  m.mu_y = filter_valid(y, m.taps);
  m.xx = filter_valid(product(x, x), m.taps);
  m.yy = filter_valid(product(y, y), m.taps);
  m.xy = filter_valid(product(x, y), m.taps);
  return m;
}

Matrix downsample(const Matrix& m) {
  const std::size_t r = m.rows() / 2, c = m.cols() / 2;
  Matrix out(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      out(i, j) = 0.25 * (m(2 * i, 2 * j) + m(2 * i, 2 * j + 1) + m(2 * i + 1, 2 * j) +
                          m(2 * i + 1, 2 * j + 1));
    }
  }
  return out;
}

}  // namespace

SsimComponents ssim_components(const Matrix& x, const Matrix& y, const SsimParams& p) {
  check_pair(x, y, "ssim");
  const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
  const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);
  const Moments m = moments(x, y, p);
  double sum_ssim = 0.0, sum_cs = 0.0;
  const std::size_t n = m.mu_x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double mx = m.mu_x.values()[i], my = m.mu_y.values()[i];
    const double vx = m.xx.values()[i] - mx * mx;
    const double vy = m.yy.values()[i] - my * my;
    const double cov = m.xy.values()[i] - mx * my;
    const double cs = (2.0 * cov + c2) / (vx + vy + c2);
    const double lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
    sum_ssim += lum * cs;
    sum_cs += cs;
  }
  return {sum_ssim / static_cast<double>(n), sum_cs / static_cast<double>(n)};
}

double ssim(const Matrix& x, const Matrix& y, const SsimParams& p) {
  return ssim_components(x, y, p).ssim;
}

double ssim(const GrayImage& x, const GrayImage& y, const SsimParams& p) {
  return ssim(imageio::to_matrix(x), imageio::to_matrix(y), p);
}

SsimGradient ssim_with_gradient(const Matrix& x, const Matrix& y, const SsimParams& p) {
  check_pair(x, y, "ssim_with_gradient");
  const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
  const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);
  const Moments m = moments(x, y, p);
  const std::size_t n = m.mu_x.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Partials of the map with respect to E[x], E[x^2], E[xy] at each window position.
  Matrix d_mu(m.mu_x.rows(), m.mu_x.cols());
  Matrix d_xx(d_mu.rows(), d_mu.cols());
  Matrix d_xy(d_mu.rows(), d_mu.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mx = m.mu_x.values()[i], my = m.mu_y.values()[i];
    const double vx = m.xx.values()[i] - mx * mx;
    const double vy = m.yy.values()[i] - my * my;
    const double cov = m.xy.values()[i] - mx * my;
    const double a1 = 2.0 * mx * my + c1, a2 = 2.0 * cov + c2;
    const double b1 = mx * mx + my * my + c1, b2 = vx + vy + c2;
    const double s = (a1 * a2) / (b1 * b2);
    total += s;
    const double inv = 1.0 / (b1 * b2);
    d_mu.values()[i] = inv_n * ((2.0 * my * a2 - 2.0 * my * a1) * inv - s * (2.0 * mx / b1 - 2.0 * mx / b2));
    d_xx.values()[i] = inv_n * (-s / b2);
    d_xy.values()[i] = inv_n * (2.0 * a1 * inv);
  }

  const Matrix g_mu = filter_valid_adjoint(d_mu, m.taps, x.rows(), x.cols());
  const Matrix g_xx = filter_valid_adjoint(d_xx, m.taps, x.rows(), x.cols());
  const Matrix g_xy = filter_valid_adjoint(d_xy, m.taps, x.rows(), x.cols());
  SsimGradient out{total * inv_n, Matrix(x.rows(), x.cols())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.grad_x.values()[i] = g_mu.values()[i] + 2.0 * x.values()[i] * g_xx.values()[i] +
                             y.values()[i] * g_xy.values()[i];
  }
  return out;
}

std::size_t ms_ssim_scales(std::size_t rows, std::size_t cols, const SsimParams& p) {
  std::size_t scales = 1;
  std::size_t side = std::min(rows, cols);
  while (scales < kMsSsimWeights.size() && side / 2 >= p.window) {
    side /= 2;
    ++scales;
  }
  return scales;
}

double ms_ssim(const Matrix& x, const Matrix& y, const SsimParams& p) {
  check_pair(x, y, "ms_ssim");
  const std::size_t scales = ms_ssim_scales(x.rows(), x.cols(), p);
  double weight_sum = 0.0;
  for (std::size_t s = 0; s < scales; ++s) weight_sum += kMsSsimWeights[s];

  Matrix cx = x, cy = y;
  double result = 1.0;
  for (std::size_t s = 0; s < scales; ++s) {
    const SsimComponents c = ssim_components(cx, cy, p);
    const double term = (s + 1 == scales) ? c.ssim : c.contrast_structure;
    result *= std::pow(std::max(term, 0.0), kMsSsimWeights[s] / weight_sum);
    if (s + 1 < scales) {
      cx = downsample(cx);
      cy = downsample(cy);
    }
  }
  return result;
}

double ms_ssim(const GrayImage& x, const GrayImage& y, const SsimParams& p) {
  return ms_ssim(imageio::to_matrix(x), imageio::to_matrix(y), p);
}

}  // namespace wavefuse::metrics
