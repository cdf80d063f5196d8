#pragma once

// Scalar-loop reference implementations of the fusion rules, written directly from the
// rule definitions and shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "wavefuse/tensor.hpp"

namespace oracles {

using wavefuse::Matrix;

// Binomial window built from Pascal's triangle, independent of the library helper.
inline std::vector<double> binomial(std::size_t n) {
  std::vector<double> row{1.0};
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<double> next(row.size() + 1, 0.0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      next[i] += row[i];
      next[i + 1] += row[i];
    }
    row = next;
  }
  return row;
}

inline double clamped(const Matrix& m, long r, long c) {
  r = std::clamp<long>(r, 0, static_cast<long>(m.rows()) - 1);
  c = std::clamp<long>(c, 0, static_cast<long>(m.cols()) - 1);
  return m(r, c);
}

inline double windowed_sum(const Matrix& a, const Matrix& b, std::size_t win, long r, long c) {
  const auto w = binomial(win);
  double total = 0;
  for (double v : w) total += v;
  const long p = static_cast<long>(win / 2);
  double s = 0;
  for (long i = -p; i <= p; ++i)
    for (long j = -p; j <= p; ++j)
      s += w[i + p] * w[j + p] / (total * total) * clamped(a, r + i, c + j) * clamped(b, r + i, c + j);
  return s;
}

inline Matrix oracle_low(const Matrix& a, const Matrix& b, std::size_t win, double T) {
  Matrix out(a.rows(), a.cols());
  for (long r = 0; r < static_cast<long>(a.rows()); ++r)
    for (long c = 0; c < static_cast<long>(a.cols()); ++c) {
      const double e1 = windowed_sum(a, a, win, r, c), e2 = windowed_sum(b, b, win, r, c);
      const double m = e1 + e2 > 0 ? std::min(1.0, 2 * windowed_sum(a, b, win, r, c) / (e1 + e2)) : 0.0;
      const double x1 = a(r, c), x2 = b(r, c);
      if (m < T) {
        out(r, c) = e1 >= e2 ? x1 : x2;
      } else {
        const double wmax = 0.5 + 0.5 * (1 - m) / (1 - T);
        out(r, c) = e1 >= e2 ? wmax * x1 + (1 - wmax) * x2 : wmax * x2 + (1 - wmax) * x1;
      }
    }
  return out;
}

inline double two_pass_variance(const Matrix& m) {
  double mean = 0;
  for (double v : m.values()) mean += v;
  mean /= m.size();
  double s = 0;
  for (double v : m.values()) s += (v - mean) * (v - mean);
  return s / m.size();
}

// Activity maps and weights for one subband across a channel stack.
inline std::pair<Matrix, Matrix> oracle_l1_weights(const std::vector<Matrix>& a, const std::vector<Matrix>& b,
                                            long radius) {
  const std::size_t R = a[0].rows(), C = a[0].cols();
  auto activity = [&](const std::vector<Matrix>& s) {
    Matrix act(R, C);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c)
        for (const auto& m : s) act(r, c) += std::abs(m(r, c));
    Matrix avg(R, C);
    for (long r = 0; r < static_cast<long>(R); ++r)
      for (long c = 0; c < static_cast<long>(C); ++c) {
        double t = 0;
        for (long i = -radius; i <= radius; ++i)
          for (long j = -radius; j <= radius; ++j) t += clamped(act, r + i, c + j);
        avg(r, c) = t / double((2 * radius + 1) * (2 * radius + 1));
      }
    return avg;
  };
  const Matrix a1 = activity(a), a2 = activity(b);
  Matrix w1(R, C), w2(R, C);
  for (std::size_t i = 0; i < w1.size(); ++i) {
    const double s = a1.values()[i] + a2.values()[i];
    w1.values()[i] = s > 0 ? a1.values()[i] / s : 0.5;
    w2.values()[i] = s > 0 ? a2.values()[i] / s : 0.5;
  }
  return {w1, w2};
}

}  // namespace oracles
