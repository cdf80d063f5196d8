#include "wavefuse/fusion_rules.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavefuse/error.hpp"

namespace wavefuse::fusion {

namespace {

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

void require_same_dims(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_dims(b)) {
    throw ArgumentError(std::string(what) + ": subband dims " + a.dims_string() + " and " +
                        b.dims_string() + " differ");
  }
}

void require_compatible(const PyramidStack& a, const PyramidStack& b, const char* what) {
  if (a.empty() || a.size() != b.size()) {
    throw ArgumentError(std::string(what) + ": channel counts " + std::to_string(a.size()) +
                        " and " + std::to_string(b.size()) + " must be equal and non-zero");
  }
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (!wavelet::same_structure(a[c], b[c]) || !wavelet::same_structure(a[c], a[0])) {
      throw ArgumentError(std::string(what) + ": channel " + std::to_string(c) +
                          " pyramids are structurally different");
    }
  }
}

// Windowed sum of w * f(C1, C2) with replicated edges.
template <typename F>
Matrix windowed(const Matrix& a, const Matrix& b, std::size_t window, F f) {
  const auto w = window_weights(window);
  const std::ptrdiff_t half = window / 2;
  Matrix out(a.rows(), a.cols());
  for (std::size_t y = 0; y < a.rows(); ++y) {
    for (std::size_t x = 0; x < a.cols(); ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -half; i <= half; ++i) {
        const std::size_t sy = clamp_index(static_cast<std::ptrdiff_t>(y) + i, a.rows());
        for (std::ptrdiff_t j = -half; j <= half; ++j) {
          const std::size_t sx = clamp_index(static_cast<std::ptrdiff_t>(x) + j, a.cols());
          acc += w[(i + half) * window + (j + half)] * f(a(sy, sx), b(sy, sx));
        }
      }
      out(y, x) = acc;
    }
  }
  return out;
}

Matrix box_mean(const Matrix& m, std::size_t radius) {
  if (radius == 0) return m;
  const std::ptrdiff_t r = radius;
  const double norm = 1.0 / static_cast<double>((2 * r + 1) * (2 * r + 1));
  Matrix out(m.rows(), m.cols());
  for (std::size_t y = 0; y < m.rows(); ++y) {
    for (std::size_t x = 0; x < m.cols(); ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -r; i <= r; ++i) {
        const std::size_t sy = clamp_index(static_cast<std::ptrdiff_t>(y) + i, m.rows());
        for (std::ptrdiff_t j = -r; j <= r; ++j) {
          acc += m(sy, clamp_index(static_cast<std::ptrdiff_t>(x) + j, m.cols()));
        }
      }
      out(y, x) = acc * norm;
    }
  }
  return out;
}

Matrix mean_of(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = (a.values()[i] + b.values()[i]) / 2.0;
  return out;
}

// Every subband of a pyramid in a fixed order: top approximation, then H/V/D per level.
std::vector<Matrix*> subbands(wavelet::WaveletPyramid& p) {
  std::vector<Matrix*> out{&p.top_approx};
  for (auto& d : p.levels) {
    out.push_back(&d.H);
    out.push_back(&d.V);
    out.push_back(&d.D);
  }
  return out;
}

std::vector<const Matrix*> subbands(const wavelet::WaveletPyramid& p) {
  std::vector<const Matrix*> out{&p.top_approx};
  for (const auto& d : p.levels) {
    out.push_back(&d.H);
    out.push_back(&d.V);
    out.push_back(&d.D);
  }
  return out;
}

}  // namespace

Rule parse_rule(std::string_view name) {
  if (name == "regional") return Rule::regional;
  if (name == "l1" || name == "l1norm") return Rule::l1norm;
  if (name == "combined") return Rule::combined;
  throw ArgumentError("unknown fusion rule '" + std::string(name) +
                      "' (valid: regional, l1, combined)");
}

std::string rule_name(Rule rule) {
  switch (rule) {
    case Rule::regional: return "regional";
    case Rule::l1norm: return "l1norm";
    case Rule::combined: return "combined";
  }
  return "?";
}

void FusionRuleConfig::validate() const {
  if (window == 0 || window % 2 == 0) {
    throw ArgumentError("fusion window must be a positive odd integer, got " +
                        std::to_string(window));
  }
  if (!(match_threshold > 0.0 && match_threshold < 1.0)) {
    throw ArgumentError("match threshold must lie in (0,1), got " +
                        std::to_string(match_threshold));
  }
  if (levels == 0) throw ArgumentError("wavelet levels must be >= 1");
  wavelet::basis_by_name(basis);
}

std::vector<double> window_weights(std::size_t window) {
  if (window == 0 || window % 2 == 0) {
    throw ArgumentError("regional-energy window must be odd, got " + std::to_string(window));
  }
  std::vector<double> row(window, 1.0);
  for (std::size_t n = 1; n < window; ++n) {
    for (std::size_t k = n; k-- > 1;) row[k] += row[k - 1];
  }
  const double total = std::pow(2.0, 2.0 * static_cast<double>(window - 1));
  std::vector<double> w(window * window);
  for (std::size_t i = 0; i < window; ++i) {
    for (std::size_t j = 0; j < window; ++j) w[i * window + j] = row[i] * row[j] / total;
  }
  return w;
}

Matrix regional_energy(const Matrix& coeffs, std::size_t window) {
  return windowed(coeffs, coeffs, window, [](double c, double) { return c * c; });
}

Matrix fuse_low_regional(const Matrix& a, const Matrix& b, const FusionRuleConfig& config) {
  require_same_dims(a, b, "fuse_low_regional");
  config.validate();
  const Matrix ea = regional_energy(a, config.window);
  const Matrix eb = regional_energy(b, config.window);
  const Matrix cross = windowed(a, b, config.window, [](double u, double v) { return u * v; });
  const double T = config.match_threshold;

  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e1 = ea.values()[i], e2 = eb.values()[i];
    const double denom = e1 + e2;
    const double match = denom > 0.0 ? std::min(1.0, 2.0 * cross.values()[i] / denom) : 0.0;
    const bool first_major = e1 >= e2;
    const double major = first_major ? a.values()[i] : b.values()[i];
    const double minor = first_major ? b.values()[i] : a.values()[i];
    if (match < T) {
      out.values()[i] = major;
    } else {
      const double w_major = 0.5 + 0.5 * (1.0 - match) / (1.0 - T);
      out.values()[i] = w_major * major + (1.0 - w_major) * minor;
    }
  }
  return out;
}

double population_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size());
}

Matrix fuse_high_variance(const Matrix& a, const Matrix& b) {
  require_same_dims(a, b, "fuse_high_variance");
  const double va = population_variance(a.values());
  const double vb = population_variance(b.values());
  if (va > vb) return a;
  if (vb > va) return b;
  return mean_of(a, b);
}

L1Weights l1_weights(const std::vector<const Matrix*>& a, const std::vector<const Matrix*>& b,
                     std::size_t radius) {
  if (a.empty() || a.size() != b.size()) {
    throw ArgumentError("l1_weights: channel stacks must be non-empty and equally sized");
  }
  const std::size_t rows = a[0]->rows(), cols = a[0]->cols();
  Matrix act_a(rows, cols), act_b(rows, cols);
  for (std::size_t c = 0; c < a.size(); ++c) {
    require_same_dims(*a[c], *a[0], "l1_weights");
    require_same_dims(*b[c], *a[0], "l1_weights");
    for (std::size_t i = 0; i < act_a.size(); ++i) {
      act_a.values()[i] += std::abs(a[c]->values()[i]);
      act_b.values()[i] += std::abs(b[c]->values()[i]);
    }
  }
  const Matrix avg_a = box_mean(act_a, radius);
  const Matrix avg_b = box_mean(act_b, radius);
  L1Weights w{Matrix(rows, cols), Matrix(rows, cols)};
  for (std::size_t i = 0; i < avg_a.size(); ++i) {
    const double denom = avg_a.values()[i] + avg_b.values()[i];
    if (denom > 0.0) {
      w.first.values()[i] = avg_a.values()[i] / denom;
      w.second.values()[i] = avg_b.values()[i] / denom;
    } else {
      w.first.values()[i] = 0.5;
      w.second.values()[i] = 0.5;
    }
  }
  return w;
}

PyramidStack fuse_l1norm(const PyramidStack& a, const PyramidStack& b, std::size_t radius) {
  require_compatible(a, b, "fuse_l1norm");
  PyramidStack out = a;
  const std::size_t bands = 1 + 3 * a[0].levels.size();
  const std::size_t C = a.size();

  std::vector<std::vector<const Matrix*>> sa(C), sb(C);
  std::vector<std::vector<Matrix*>> so(C);
  for (std::size_t c = 0; c < C; ++c) {
    sa[c] = subbands(a[c]);
    sb[c] = subbands(b[c]);
    so[c] = subbands(out[c]);
  }

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(bands); ++s) {
    std::vector<const Matrix*> band_a(C), band_b(C);
    for (std::size_t c = 0; c < C; ++c) {
      band_a[c] = sa[c][s];
      band_b[c] = sb[c][s];
    }
    const L1Weights w = l1_weights(band_a, band_b, radius);
    for (std::size_t c = 0; c < C; ++c) {
      auto dst = so[c][s]->values();
      const auto u = band_a[c]->values();
      const auto v = band_b[c]->values();
      for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = w.first.values()[i] * u[i] + w.second.values()[i] * v[i];
      }
    }
  }
  return out;
}

PyramidStack fuse_regional(const PyramidStack& a, const PyramidStack& b,
                           const FusionRuleConfig& config) {
  require_compatible(a, b, "fuse_regional");
  config.validate();
  PyramidStack out = a;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(a.size()); ++c) {
    out[c].top_approx = fuse_low_regional(a[c].top_approx, b[c].top_approx, config);
    for (std::size_t l = 0; l < a[c].levels.size(); ++l) {
      const auto& da = a[c].levels[l];
      const auto& db = b[c].levels[l];
      out[c].levels[l] = {fuse_high_variance(da.H, db.H), fuse_high_variance(da.V, db.V),
                          fuse_high_variance(da.D, db.D)};
    }
  }
  return out;
}

PyramidStack combine_mean(const PyramidStack& a, const PyramidStack& b) {
  require_compatible(a, b, "combine_mean");
  PyramidStack out = a;
  for (std::size_t c = 0; c < a.size(); ++c) {
    auto dst = subbands(out[c]);
    auto sb = subbands(b[c]);
    auto sa = subbands(a[c]);
    for (std::size_t s = 0; s < dst.size(); ++s) *dst[s] = mean_of(*sa[s], *sb[s]);
  }
  return out;
}

PyramidStack fuse_pyramids(const PyramidStack& a, const PyramidStack& b,
                           const FusionRuleConfig& config) {
  config.validate();
  switch (config.rule) {
    case Rule::regional: return fuse_regional(a, b, config);
    case Rule::l1norm: return fuse_l1norm(a, b, config.block_radius);
    case Rule::combined:
      return combine_mean(fuse_regional(a, b, config), fuse_l1norm(a, b, config.block_radius));
  }
  throw ArgumentError("unsupported fusion rule");
}

}  // namespace wavefuse::fusion
