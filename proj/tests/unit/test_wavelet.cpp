#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "testkit.hpp"
#include "wavefuse/error.hpp"
#include "wavefuse/wavelet.hpp"

namespace wv = wavefuse::wavelet;
using wavefuse::Matrix;
using wv::Extension;

namespace {

const std::vector<double> kSignal{0.3, -1.2, 2.5, 0.7, -0.4, 1.1, 0.0, -2.2, 0.9};

void expect_all(const std::vector<double>& v, double want, double tol = 1e-14) {
  for (double x : v) EXPECT_NEAR(x, want, tol);
}

void expect_all(const Matrix& m, double want, double tol = 1e-14) {
  for (double x : m.values()) EXPECT_NEAR(x, want, tol);
}

void expect_vec_near(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

// Row-wise then column-wise 1-D transform, composed by hand.
wv::SubbandSet separable_oracle(const Matrix& m, const wv::WaveletBasis& basis, Extension ext) {
  const std::size_t cw = wv::coeff_length(m.cols(), basis, ext);
  Matrix lo(m.rows(), cw), hi(m.rows(), cw);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto c = wv::dwt1d(m.row(r), basis, ext);
    for (std::size_t k = 0; k < cw; ++k) {
      lo(r, k) = c.approx[k];
      hi(r, k) = c.detail[k];
    }
  }
  auto columns = [&](const Matrix& x, bool high) {
    const Matrix t = transpose(x);
    const std::size_t ch = wv::coeff_length(m.rows(), basis, ext);
    Matrix out(ch, t.rows());
    for (std::size_t c = 0; c < t.rows(); ++c) {
      const auto cc = wv::dwt1d(t.row(c), basis, ext);
      for (std::size_t k = 0; k < ch; ++k) out(k, c) = high ? cc.detail[k] : cc.approx[k];
    }
    return out;
  };
  return {columns(lo, false), columns(hi, false), columns(lo, true), columns(hi, true)};
}

}  // namespace

TEST(Basis, ShippedBasesPassFilterChecks) {
  ASSERT_EQ(wv::basis_names(), (std::vector<std::string>{"db1", "db2", "db3", "db4"}));
  for (const auto& name : wv::basis_names()) {
    const auto& b = wv::basis_by_name(name);
    EXPECT_EQ(wv::check_basis(b), "") << name;
    EXPECT_EQ(b.taps(), 2 * (name.back() - '0'));
  }
}

TEST(Basis, CheckDetectsBrokenFilters) {
  auto b = wv::basis_by_name("db2");
  b.dec_lowpass[0] += 1e-6;
  EXPECT_NE(wv::check_basis(b), "");
}

TEST(Basis, UnknownNameListsChoices) {
  try {
    wv::basis_by_name("db9");
    FAIL();
  } catch (const wavefuse::ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("db1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("db4"), std::string::npos);
  }
}

TEST(Dwt1d, HaarOfConstant) {
  const double c = 0.8;
  const std::vector<double> x(4, c);
  const auto r = wv::dwt1d(x, wv::basis_by_name("db1"));
  expect_all(r.approx, c * std::sqrt(2.0));
  expect_all(r.detail, 0.0);
}

TEST(Dwt1d, HaarAlternatingIsPureDetail) {
  const std::vector<double> x{1, -1, 1, -1};
  const auto r = wv::dwt1d(x, wv::basis_by_name("db1"));
  expect_all(r.approx, 0.0);
  for (double d : r.detail) EXPECT_NEAR(std::abs(d), std::sqrt(2.0), 1e-14);
}

// Reference coefficients from PyWavelets 1.x, mode "symmetric".
TEST(Dwt1d, MatchesPywtDb2) {
  const auto r = wv::dwt1d(kSignal, wv::basis_by_name("db2"));
  expect_vec_near(r.approx, {-0.10606601717798214, -0.38915768622285807, 1.560960673454609,
                             1.011683718466548, -1.7550749572814999, 0.6944147855016785}, 1e-12);
  expect_vec_near(r.detail, {0.9185586535436918, 1.983366505028384, -1.3462902399616712,
                             0.8677239630922647, 0.8113145612263759, -2.158533919757124}, 1e-12);
}

TEST(Dwt1d, MatchesPywtDb4) {
  const auto r = wv::dwt1d(kSignal, wv::basis_by_name("db4"));
  expect_vec_near(r.approx, {0.5954100546830997, 1.1645980895568917, -0.3099630597687818,
                             0.9009644691959214, 0.7454086879841937, 0.5428276824394138,
                             -0.5781682972251092, -0.7587859858911385}, 1e-12);
  expect_vec_near(r.detail, {0.825895699343628, 2.3039888226531278, -1.2632675648242293,
                             0.06836406858047998, 1.9678496984925928, -2.609049476730012,
                             1.2084778455151932, 0.0390348147832049}, 1e-12);
}

TEST(Dwt1d, CoefficientLengths) {
  const auto& db3 = wv::basis_by_name("db3");
  EXPECT_EQ(wv::coeff_length(9, db3, Extension::symmetric), 7u);
  EXPECT_EQ(wv::coeff_length(9, db3, Extension::periodization), 5u);
  EXPECT_EQ(wv::coeff_length(1, db3, Extension::symmetric), 3u);
}

TEST(Idwt1d, InvertsConstantAndZero) {
  const auto& haar = wv::basis_by_name("db1");
  const double c = -0.3, s = c * std::sqrt(2.0);
  const std::vector<double> a{s, s}, z{0.0, 0.0};
  expect_all(wv::idwt1d(a, z, haar, 4), c);
  expect_all(wv::idwt1d(z, z, haar, 4), 0.0, 0.0);
}

TEST(Idwt1d, RoundTripEveryBasisAndLength) {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto ext : {Extension::symmetric, Extension::periodization}) {
    for (const auto& name : wv::basis_names()) {
      const auto& b = wv::basis_by_name(name);
      for (std::size_t n = 1; n <= 33; ++n) {
        std::vector<double> x(n);
        for (double& v : x) v = u(rng);
        const auto c = wv::dwt1d(x, b, ext);
        const auto y = wv::idwt1d(c.approx, c.detail, b, n, ext);
        expect_vec_near(y, x, 1e-10);
      }
    }
  }
}

TEST(Idwt1d, RejectsInconsistentLengths) {
  const auto& b = wv::basis_by_name("db2");
  const std::vector<double> a(3), d(4);
  EXPECT_THROW(wv::idwt1d(a, d, b, 4), wavefuse::ArgumentError);
  const std::vector<double> a3(3), d3(3);
  EXPECT_THROW(wv::idwt1d(a3, d3, b, 40), wavefuse::ArgumentError);
}

TEST(Dwt2d, ConstantHaar) {
  const auto s = wv::dwt2d_level(Matrix(4, 4, 0.25), wv::basis_by_name("db1"));
  expect_all(s.L, 0.5);
  expect_all(s.H, 0.0);
  expect_all(s.V, 0.0);
  expect_all(s.D, 0.0);
}

TEST(Dwt2d, HorizontalStripesLandInOneSubband) {
  Matrix m(8, 8);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) m(r, c) = r % 2 ? -1.0 : 1.0;
  const auto s = wv::dwt2d_level(m, wv::basis_by_name("db1"));
  auto energy = [](const Matrix& x) {
    double e = 0;
    for (double v : x.values()) e += v * v;
    return e;
  };
  EXPECT_NEAR(energy(s.L), 0.0, 1e-24);
  EXPECT_NEAR(energy(s.H), 0.0, 1e-24);
  EXPECT_NEAR(energy(s.D), 0.0, 1e-24);
  EXPECT_NEAR(energy(s.V), energy(m), 1e-12);
}

TEST(Dwt2d, SeparableComposition) {
  std::mt19937_64 rng(21);
  const Matrix m = testkit::random_matrix(rng, 5, 7);
  for (auto ext : {Extension::symmetric, Extension::periodization}) {
    for (const char* name : {"db1", "db2", "db3"}) {
      const auto& b = wv::basis_by_name(name);
      const auto got = wv::dwt2d_level(m, b, ext);
      const auto want = separable_oracle(m, b, ext);
      EXPECT_LT(testkit::max_abs_diff(got.L, want.L), 1e-10);
      EXPECT_LT(testkit::max_abs_diff(got.H, want.H), 1e-10);
      EXPECT_LT(testkit::max_abs_diff(got.V, want.V), 1e-10);
      EXPECT_LT(testkit::max_abs_diff(got.D, want.D), 1e-10);
    }
  }
}

TEST(Wavedec2, SingleLevelEqualsOneStep) {
  std::mt19937_64 rng(22);
  const Matrix m = testkit::random_matrix(rng, 10, 9);
  const auto& b = wv::basis_by_name("db2");
  const auto p = wv::wavedec2(m, b, 1);
  const auto s = wv::dwt2d_level(m, b);
  ASSERT_EQ(p.levels.size(), 1u);
  EXPECT_EQ(p.top_approx, s.L);
  EXPECT_EQ(p.levels[0].H, s.H);
  EXPECT_EQ(p.levels[0].V, s.V);
  EXPECT_EQ(p.levels[0].D, s.D);
  EXPECT_EQ(p.rows, 10u);
  EXPECT_EQ(p.cols, 9u);
}

TEST(Wavedec2, IteratedConstantGain) {
  const auto p = wv::wavedec2(Matrix(8, 8, 0.1), wv::basis_by_name("db1"), 2);
  expect_all(p.top_approx, 0.4);
  for (const auto& l : p.levels) {
    expect_all(l.H, 0.0);
    expect_all(l.V, 0.0);
    expect_all(l.D, 0.0);
  }
}

TEST(Wavedec2, LevelFeasibility) {
  EXPECT_EQ(wv::max_level(1, 1), 0u);
  EXPECT_EQ(wv::max_level(7, 64), 2u);
  EXPECT_EQ(wv::max_level(64, 64), 6u);
  EXPECT_THROW(wv::wavedec2(Matrix(7, 64), wv::basis_by_name("db1"), 3), wavefuse::ArgumentError);
  EXPECT_THROW(wv::wavedec2(Matrix(8, 8), wv::basis_by_name("db1"), 0), wavefuse::ArgumentError);
}

TEST(Waverec2, RoundTrip64) {
  std::mt19937_64 rng(23);
  const Matrix m = testkit::random_matrix(rng, 64, 64);
  for (const auto& name : wv::basis_names()) {
    for (std::size_t levels = 1; levels <= 3; ++levels) {
      const auto p = wv::wavedec2(m, wv::basis_by_name(name), levels);
      EXPECT_LT(testkit::max_abs_diff(wv::waverec2(p), m), 1e-8) << name << " L" << levels;
    }
  }
}

TEST(Waverec2, ConstantsSurviveZeroedDetails) {
  auto p = wv::wavedec2(Matrix(12, 10, 0.6), wv::basis_by_name("db3"), 2);
  for (auto& l : p.levels) {
    std::fill(l.H.values().begin(), l.H.values().end(), 0.0);
    std::fill(l.V.values().begin(), l.V.values().end(), 0.0);
    std::fill(l.D.values().begin(), l.D.values().end(), 0.0);
  }
  expect_all(wv::waverec2(p), 0.6, 1e-12);
}

TEST(Waverec2, ZeroPyramidGivesZero) {
  auto p = wv::wavedec2(Matrix(9, 9), wv::basis_by_name("db2"), 2);
  expect_all(wv::waverec2(p), 0.0, 0.0);
}

TEST(Waverec2, RejectsCorruptGeometry) {
  auto p = wv::wavedec2(Matrix(16, 16, 1.0), wv::basis_by_name("db1"), 2);
  p.levels[1].D = Matrix(3, 3);
  EXPECT_THROW(wv::waverec2(p), wavefuse::StructureError);
  auto q = wv::wavedec2(Matrix(16, 16, 1.0), wv::basis_by_name("db1"), 2);
  q.basis_name = "haar";
  EXPECT_THROW(wv::waverec2(q), wavefuse::ArgumentError);
}

// ---- properties ---------------------------------------------------------------------------

TEST(WaveletProperties, PerfectReconstructionAllSizes) {
  std::mt19937_64 rng(24);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t r = dim(rng), c = dim(rng);
    const Matrix m = testkit::random_matrix(rng, r, c);
    for (auto ext : {Extension::symmetric, Extension::periodization}) {
      for (const auto& name : wv::basis_names()) {
        const std::size_t top = std::min<std::size_t>(3, wv::max_level(r, c));
        for (std::size_t levels = 1; levels <= top; ++levels) {
          const auto p = wv::wavedec2(m, wv::basis_by_name(name), levels, ext);
          ASSERT_LT(testkit::max_abs_diff(wv::waverec2(p), m), 1e-8)
              << r << "x" << c << " " << name << " L" << levels;
        }
      }
    }
  }
}

TEST(WaveletProperties, ParsevalUnderPeriodization) {
  std::mt19937_64 rng(25);
  const Matrix m = testkit::random_matrix(rng, 32, 16);
  double e_in = 0;
  for (double v : m.values()) e_in += v * v;
  for (const auto& name : wv::basis_names()) {
    const auto p = wv::wavedec2(m, wv::basis_by_name(name), 3, Extension::periodization);
    double e = 0;
    auto add = [&](const Matrix& x) { for (double v : x.values()) e += v * v; };
    add(p.top_approx);
    for (const auto& l : p.levels) {
      add(l.H);
      add(l.V);
      add(l.D);
    }
    EXPECT_NEAR(e, e_in, 1e-8) << name;
  }
}

TEST(WaveletProperties, Linearity) {
  std::mt19937_64 rng(26);
  const Matrix x = testkit::random_matrix(rng, 13, 11), y = testkit::random_matrix(rng, 13, 11);
  const double a = 0.7, b = -1.9;
  Matrix mix(13, 11);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = a * x.values()[i] + b * y.values()[i];
  const auto& basis = wv::basis_by_name("db3");
  const auto px = wv::wavedec2(x, basis, 2), py = wv::wavedec2(y, basis, 2), pm = wv::wavedec2(mix, basis, 2);
  auto check = [&](const Matrix& m, const Matrix& u, const Matrix& v) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      EXPECT_NEAR(m.values()[i], a * u.values()[i] + b * v.values()[i], 1e-10);
    }
  };
  check(pm.top_approx, px.top_approx, py.top_approx);
  for (std::size_t l = 0; l < 2; ++l) {
    check(pm.levels[l].H, px.levels[l].H, py.levels[l].H);
    check(pm.levels[l].V, px.levels[l].V, py.levels[l].V);
    check(pm.levels[l].D, px.levels[l].D, py.levels[l].D);
  }
}

TEST(ChannelTransforms, ParallelMatchesSerial) {
  std::mt19937_64 rng(27);
  const auto t = testkit::random_tensor(rng, {6, 20, 18});
  const auto& b = wv::basis_by_name("db2");
  const auto par = wv::wavedec2_channels(t, b, 2);
  const auto ser = wv::reference::wavedec2_channels(t, b, 2);
  ASSERT_EQ(par.size(), 6u);
  for (std::size_t c = 0; c < 6; ++c) {
    EXPECT_EQ(par[c].top_approx, ser[c].top_approx);
    EXPECT_TRUE(wv::same_structure(par[c], ser[c]));
  }
  const auto back = wv::waverec2_channels(par);
  EXPECT_EQ(back, wv::reference::waverec2_channels(ser));
  EXPECT_LT(testkit::max_abs_diff(back, t), 1e-10);
}
