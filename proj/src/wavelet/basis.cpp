#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "wavefuse/error.hpp"
#include "wavefuse/wavelet.hpp"

namespace wavefuse::wavelet {

namespace {

// Daubechies scaling (reconstruction low-pass) filters.
constexpr double kDb1[] = {0.7071067811865476, 0.7071067811865476};
constexpr double kDb2[] = {0.48296291314453416, 0.8365163037378079, 0.2241438680420134, -0.12940952255126037};
constexpr double kDb3[] = {0.33267055295008263, 0.8068915093110925, 0.45987750211849154, -0.13501102001025458, -0.08544127388202666, 0.03522629188570953};
constexpr double kDb4[] = {0.2303778133088965, 0.7148465705529157, 0.6308807679298589, -0.027983769416859854, -0.18703481171909309, 0.030841381835560764, 0.0328830116668852, -0.010597401785069032};

WaveletBasis make_basis(std::string name, std::span<const double> scaling) {
  WaveletBasis b;
  b.name = std::move(name);
  const std::size_t n = scaling.size();
  b.rec_lowpass.assign(scaling.begin(), scaling.end());
  b.dec_lowpass.assign(scaling.rbegin(), scaling.rend());
  b.dec_highpass.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    b.dec_highpass[k] = (k % 2 == 0 ? -1.0 : 1.0) * scaling[k];
  }
  b.rec_highpass.assign(b.dec_highpass.rbegin(), b.dec_highpass.rend());
  return b;
}

const std::map<std::string, WaveletBasis, std::less<>>& registry() {
  static const auto bases = [] {
    std::map<std::string, WaveletBasis, std::less<>> m;
    m.emplace("db1", make_basis("db1", kDb1));
    m.emplace("db2", make_basis("db2", kDb2));
    m.emplace("db3", make_basis("db3", kDb3));
    m.emplace("db4", make_basis("db4", kDb4));
    for (const auto& [name, b] : m) {
      if (auto err = check_basis(b); !err.empty()) {
        throw std::logic_error("built-in wavelet " + name + " fails validation: " + err);
      }
    }
    return m;
  }();
  return bases;
}

}  // namespace

const std::vector<std::string>& basis_names() {
  static const std::vector<std::string> names{"db1", "db2", "db3", "db4"};
  return names;
}

const WaveletBasis& basis_by_name(std::string_view name) {
  const auto& reg = registry();
  if (auto it = reg.find(name); it != reg.end()) return it->second;
  std::string valid;
  for (const auto& n : basis_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ArgumentError("unknown wavelet '" + std::string(name) + "' (valid: " + valid + ")");
}

std::string check_basis(const WaveletBasis& b, double tol) {
  const std::size_t n = b.taps();
  if (n == 0 || n % 2 != 0 || b.dec_highpass.size() != n || b.rec_lowpass.size() != n ||
      b.rec_highpass.size() != n) {
    return "filter lengths must be equal and even";
  }
  double sum = 0.0, energy = 0.0;
  for (double h : b.dec_lowpass) {
    sum += h;
    energy += h * h;
  }
  std::ostringstream why;
  if (std::abs(energy - 1.0) > tol) {
    why << "sum of squared low-pass taps is " << energy << ", expected 1";
    return why.str();
  }
  if (std::abs(sum - std::sqrt(2.0)) > tol) {
    why << "sum of low-pass taps is " << sum << ", expected sqrt(2)";
    return why.str();
  }
  for (std::size_t shift = 2; shift < n; shift += 2) {
    double dot = 0.0;
    for (std::size_t k = 0; k + shift < n; ++k) dot += b.dec_lowpass[k] * b.dec_lowpass[k + shift];
    if (std::abs(dot) > tol) {
      why << "low-pass not orthogonal to its shift by " << shift << " (dot " << dot << ")";
      return why.str();
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double mirror = (k % 2 == 0 ? -1.0 : 1.0) * b.dec_lowpass[n - 1 - k];
    if (std::abs(b.dec_highpass[k] - mirror) > tol) return "high-pass is not the quadrature mirror";
    if (b.rec_lowpass[k] != b.dec_lowpass[n - 1 - k] ||
        b.rec_highpass[k] != b.dec_highpass[n - 1 - k]) {
      return "reconstruction filters are not time-reversed decomposition filters";
    }
  }
  return {};
}

}  // namespace wavefuse::wavelet
