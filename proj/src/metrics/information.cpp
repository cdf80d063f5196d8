#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "wavefuse/error.hpp"
#include "wavefuse/metrics.hpp"
#include "wavefuse/wavelet.hpp"

namespace wavefuse::metrics {

namespace {

constexpr std::size_t kBins = 256;

void check_triple(const GrayImage& a, const GrayImage& b, const GrayImage& f, const char* what) {
  if (!a.same_dims(f) || !b.same_dims(f)) {
    throw ArgumentError(std::string(what) + ": image dims differ (A " + std::to_string(a.width) +
                        "x" + std::to_string(a.height) + ", B " + std::to_string(b.width) + "x" +
                        std::to_string(b.height) + ", F " + std::to_string(f.width) + "x" +
                        std::to_string(f.height) + ")");
  }
  if (f.pixels.empty()) throw ArgumentError(std::string(what) + ": empty images");
}

std::vector<unsigned char> quantized(const GrayImage& img) {
  std::vector<unsigned char> q(img.pixels.size());
  std::transform(img.pixels.begin(), img.pixels.end(), q.begin(), imageio::quantize);
  return q;
}

std::array<double, kBins> histogram(std::span<const unsigned char> v) {
  std::array<double, kBins> h{};
  for (unsigned char b : v) h[b] += 1.0;
  return h;
}

double entropy_bits(std::span<const double> counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

// Min-max binning of a real-valued feature image into 256 levels.
std::vector<unsigned char> bin_features(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  std::vector<unsigned char> out(v.size(), 0);
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = (v[i] - *lo) / range * static_cast<double>(kBins);
    out[i] = static_cast<unsigned char>(std::min<double>(kBins - 1, std::floor(t)));
  }
  return out;
}

// Orthonormal 8x8 DCT-II coefficient magnitudes, edge-replicated to whole blocks.
std::vector<double> dct_magnitudes(const GrayImage& img) {
  constexpr std::size_t B = 8;
  std::array<double, B * B> basis{};
  for (std::size_t k = 0; k < B; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / B) : std::sqrt(2.0 / B);
    for (std::size_t n = 0; n < B; ++n) {
      basis[k * B + n] = scale * std::cos(std::numbers::pi * (2.0 * n + 1.0) * k / (2.0 * B));
    }
  }
  const std::size_t W = img.width, H = img.height;
  std::vector<double> out(W * H);
  for (std::size_t by = 0; by < H; by += B) {
    for (std::size_t bx = 0; bx < W; bx += B) {
      std::array<double, B * B> block{}, tmp{};
      for (std::size_t y = 0; y < B; ++y) {
        for (std::size_t x = 0; x < B; ++x) {
          block[y * B + x] = img.at(std::min(bx + x, W - 1), std::min(by + y, H - 1));
        }
      }
      for (std::size_t y = 0; y < B; ++y) {
        for (std::size_t u = 0; u < B; ++u) {
          double acc = 0.0;
          for (std::size_t x = 0; x < B; ++x) acc += basis[u * B + x] * block[y * B + x];
          tmp[y * B + u] = acc;
        }
      }
      for (std::size_t v = 0; v < B && by + v < H; ++v) {
        for (std::size_t u = 0; u < B && bx + u < W; ++u) {
          double acc = 0.0;
          for (std::size_t y = 0; y < B; ++y) acc += basis[v * B + y] * tmp[y * B + u];
          out[(by + v) * W + bx + u] = std::abs(acc);
        }
      }
    }
  }
  return out;
}

// Level-1 db1 detail magnitude sqrt(H^2 + V^2 + D^2), nearest-neighbour upsampled.
std::vector<double> wavelet_magnitudes(const GrayImage& img) {
  const auto& haar = wavelet::basis_by_name("db1");
  const wavelet::SubbandSet s = wavelet::dwt2d_level(imageio::to_matrix(img), haar);
  std::vector<double> out(img.pixels.size());
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const std::size_t r = y / 2, c = x / 2;
      out[y * img.width + x] =
          std::sqrt(s.H(r, c) * s.H(r, c) + s.V(r, c) * s.V(r, c) + s.D(r, c) * s.D(r, c));
    }
  }
  return out;
}

struct Gradients {
  std::vector<double> magnitude;
  std::vector<double> angle;
};

Gradients sobel(const GrayImage& img) {
  const std::ptrdiff_t W = img.width, H = img.height;
  auto px = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
    return img.at(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x, 0, W - 1)),
                  static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(y, 0, H - 1)));
  };
  Gradients g{std::vector<double>(W * H), std::vector<double>(W * H)};
  for (std::ptrdiff_t y = 0; y < H; ++y) {
    for (std::ptrdiff_t x = 0; x < W; ++x) {
      const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
      g.magnitude[y * W + x] = std::sqrt(gx * gx + gy * gy);
      g.angle[y * W + x] = gx == 0.0 ? std::numbers::pi / 2.0 : std::atan(gy / gx);
    }
  }
  return g;
}

// Per-pixel edge preservation Q^{SF} of source S in fused F.
std::vector<double> edge_preservation(const Gradients& s, const Gradients& f,
                                      const QabfParams& p) {
  std::vector<double> q(s.magnitude.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double gs = s.magnitude[i], gf = f.magnitude[i];
    double strength = 0.0;
    if (gs > gf) {
      strength = gf / gs;
    } else if (gf > 0.0) {
      strength = gs / gf;
    }
    const double orientation = 1.0 - std::abs(s.angle[i] - f.angle[i]) / (std::numbers::pi / 2.0);
    const double qg = p.gamma_g / (1.0 + std::exp(p.kappa_g * (strength - p.sigma_g)));
    const double qa = p.gamma_a / (1.0 + std::exp(p.kappa_a * (orientation - p.sigma_a)));
    q[i] = qg * qa;
  }
  return q;
}

}  // namespace

double entropy(const GrayImage& image) {
  if (image.pixels.empty()) return 0.0;
  const auto q = quantized(image);
  const auto h = histogram(q);
  return entropy_bits(h, static_cast<double>(q.size()));
}

double cross_entropy_metric(const GrayImage& a, const GrayImage& b, const GrayImage& fused) {
  check_triple(a, b, fused, "cross_entropy_metric");
  const double n = static_cast<double>(fused.pixels.size()) + kBins;
  const auto ha = histogram(quantized(a));
  const auto hb = histogram(quantized(b));
  const auto hf = histogram(quantized(fused));
  auto kl = [&](const std::array<double, kBins>& hs) {
    double d = 0.0;
    for (std::size_t k = 0; k < kBins; ++k) {
      const double ps = (hs[k] + 1.0) / n;
      const double pf = (hf[k] + 1.0) / n;
      d += ps * std::log2(ps / pf);
    }
    return d;
  };
  return (kl(ha) + kl(hb)) / 2.0;
}

double variance_metric(const GrayImage& fused) {
  if (fused.pixels.empty()) return 0.0;
  const double n = static_cast<double>(fused.pixels.size());
  double mean = 0.0;
  for (double p : fused.pixels) mean += 255.0 * p;
  mean /= n;
  double ss = 0.0;
  for (double p : fused.pixels) ss += (255.0 * p - mean) * (255.0 * p - mean);
  return ss / n;
}

std::vector<unsigned char> fmi_features(const GrayImage& image, FmiVariant variant) {
  switch (variant) {
    case FmiVariant::pixel: return quantized(image);
    case FmiVariant::dct: return bin_features(dct_magnitudes(image));
    case FmiVariant::wavelet: return bin_features(wavelet_magnitudes(image));
  }
  throw ArgumentError("unknown FMI variant");
}

double normalized_mutual_information(std::span<const unsigned char> u,
                                     std::span<const unsigned char> v) {
  if (u.size() != v.size() || u.empty()) {
    throw ArgumentError("normalized_mutual_information: sample counts differ or are zero");
  }
  std::vector<double> joint(kBins * kBins, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) joint[u[i] * kBins + v[i]] += 1.0;
  const double n = static_cast<double>(u.size());
  const double hu = entropy_bits(histogram(u), n);
  const double hv = entropy_bits(histogram(v), n);
  const double huv = entropy_bits(joint, n);
  if (hu + hv <= 0.0) return 1.0;
  return std::clamp(2.0 * (hu + hv - huv) / (hu + hv), 0.0, 1.0);
}

double fmi(const GrayImage& a, const GrayImage& b, const GrayImage& fused, FmiVariant variant) {
  check_triple(a, b, fused, "fmi");
  const auto ff = fmi_features(fused, variant);
  const double ia = normalized_mutual_information(ff, fmi_features(a, variant));
  const double ib = normalized_mutual_information(ff, fmi_features(b, variant));
  return (ia + ib) / 2.0;
}

double q_abf(const GrayImage& a, const GrayImage& b, const GrayImage& fused,
             const QabfParams& params) {
  check_triple(a, b, fused, "q_abf");
  const Gradients ga = sobel(a), gb = sobel(b), gf = sobel(fused);
  const auto qa = edge_preservation(ga, gf, params);
  const auto qb = edge_preservation(gb, gf, params);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < qa.size(); ++i) {
    const double wa = std::pow(ga.magnitude[i], params.weight_exponent);
    const double wb = std::pow(gb.magnitude[i], params.weight_exponent);
    num += qa[i] * wa + qb[i] * wb;
    den += wa + wb;
  }
  // No source edges: nothing to lose.
  if (den <= 0.0) return 1.0;
  return std::clamp(num / den, 0.0, 1.0);
}

double nonlinear_correlation(const GrayImage& u, const GrayImage& v) {
  if (!u.same_dims(v)) throw ArgumentError("nonlinear_correlation: image dims differ");
  return normalized_mutual_information(quantized(u), quantized(v));
}

double q_nice(const GrayImage& a, const GrayImage& b, const GrayImage& fused) {
  check_triple(a, b, fused, "q_nice");
  const double ab = nonlinear_correlation(a, b);
  const double af = nonlinear_correlation(a, fused);
  const double bf = nonlinear_correlation(b, fused);
  Eigen::Matrix3d r;
  r << 1.0, ab, af, ab, 1.0, bf, af, bf, 1.0;
  const Eigen::Vector3d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(r,
      Eigen::EigenvaluesOnly).eigenvalues();
  double q = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double l = eig[i] / 3.0;
    if (l > 0.0) q += l * std::log(l) / std::log(256.0);
  }
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace wavefuse::metrics
