#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "testkit.hpp"
#include "wavefuse/error.hpp"
#include "wavefuse/numerics.hpp"

namespace wn = wavefuse::numerics;
using wavefuse::Shape;
using wavefuse::Tensor;

namespace {

// Direct sextuple loop, written independently of both library kernels.
Tensor conv_oracle(const Tensor& x, const Tensor& k, const Tensor& bias) {
  const long C = x.dim(0), H = x.dim(1), W = x.dim(2), O = k.dim(0), K = k.dim(2), p = K / 2;
  Tensor y({std::size_t(O), std::size_t(H), std::size_t(W)});
  for (long o = 0; o < O; ++o)
    for (long i = 0; i < H; ++i)
      for (long j = 0; j < W; ++j) {
        double s = bias[o];
        for (long c = 0; c < C; ++c)
          for (long u = 0; u < K; ++u)
            for (long v = 0; v < K; ++v) {
              const long yy = i + u - p, xx = j + v - p;
              if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
              s += k[((o * C + c) * K + u) * K + v] * x.at(c, yy, xx);
            }
        y.at(o, i, j) = s;
      }
  return y;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

// Central differences of sum(g * f(t)) with respect to each entry of t.
Tensor numeric_grad(Tensor t, const Tensor& g, const std::function<Tensor(const Tensor&)>& f,
                    double h = 1e-5) {
  Tensor out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double keep = t[i];
    t[i] = keep + h;
    const Tensor up = f(t);
    t[i] = keep - h;
    const Tensor down = f(t);
    t[i] = keep;
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g[j] * (up[j] - down[j]);
    out[i] = s / (2 * h);
  }
  return out;
}

double max_rel(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, rel_err(a[i], b[i]));
  return m;
}

}  // namespace

TEST(Conv2d, OneByOneKernelScales) {
  wn::ConvLayerParams p(Tensor({1, 1, 1, 1}, {2.0}), Tensor({1}));
  const Tensor y = wn::conv2d_forward(Tensor({1, 3, 3}, 1.0), p);
  EXPECT_EQ(y, Tensor({1, 3, 3}, 2.0));
}

TEST(Conv2d, CenteredDeltaIsIdentity) {
  std::mt19937_64 rng(1);
  const Tensor x = testkit::random_tensor(rng, {1, 6, 5});
  wn::ConvLayerParams p(1, 1, 3);
  p.kernels[4] = 1.0;
  EXPECT_EQ(wn::conv2d_forward(x, p), x);
  EXPECT_EQ(wn::reference::conv2d_forward(x, p), x);
}

TEST(Conv2d, MatchesDirectLoopOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor x = testkit::random_tensor(rng, {2, 5, 5});
    wn::ConvLayerParams p(testkit::random_tensor(rng, {4, 2, 3, 3}), testkit::random_tensor(rng, {4}));
    const Tensor want = conv_oracle(x, p.kernels, p.bias);
    EXPECT_LT(testkit::max_abs_diff(wn::conv2d_forward(x, p), want), 1e-12);
    EXPECT_LT(testkit::max_abs_diff(wn::reference::conv2d_forward(x, p), want), 1e-12);
  }
  const Tensor x = testkit::random_tensor(rng, {3, 9, 7});
  wn::ConvLayerParams p5(testkit::random_tensor(rng, {2, 3, 5, 5}), testkit::random_tensor(rng, {2}));
  EXPECT_LT(testkit::max_abs_diff(wn::conv2d_forward(x, p5), conv_oracle(x, p5.kernels, p5.bias)), 1e-12);
}

TEST(Conv2d, LinearInInputWithoutBias) {
  std::mt19937_64 rng(3);
  const Tensor x = testkit::random_tensor(rng, {3, 7, 6});
  const Tensor z = testkit::random_tensor(rng, {3, 7, 6});
  wn::ConvLayerParams p(testkit::random_tensor(rng, {2, 3, 3, 3}), Tensor({2}));
  const double a = 1.7, b = -0.6;
  Tensor mix(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) mix[i] = a * x[i] + b * z[i];
  const Tensor yx = wn::conv2d_forward(x, p), yz = wn::conv2d_forward(z, p);
  const Tensor ym = wn::conv2d_forward(mix, p);
  for (std::size_t i = 0; i < ym.size(); ++i) EXPECT_NEAR(ym[i], a * yx[i] + b * yz[i], 1e-10);
}

TEST(Conv2d, RejectsBadShapes) {
  wn::ConvLayerParams p(2, 3, 3);
  EXPECT_THROW(wn::conv2d_forward(Tensor({2, 4, 4}), p), wavefuse::DimensionError);
  EXPECT_THROW(wn::ConvLayerParams(Tensor({1, 1, 2, 2}), Tensor({1})), wavefuse::ArgumentError);
}

TEST(Conv2dBackward, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 rng(4);
  const Tensor x = testkit::random_tensor(rng, {2, 4, 4});
  wn::ConvLayerParams p(testkit::random_tensor(rng, {3, 2, 3, 3}), testkit::random_tensor(rng, {3}));
  const auto g = wn::conv2d_backward(x, p, Tensor({3, 4, 4}));
  for (const Tensor* t : {&g.input, &g.kernels, &g.bias}) {
    for (double v : t->values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Conv2dBackward, ScalarChainRule) {
  const double x = 0.7, w = -1.3, g = 2.5;
  wn::ConvLayerParams p(Tensor({1, 1, 1, 1}, {w}), Tensor({1}));
  const auto grads = wn::conv2d_backward(Tensor({1, 1, 1}, {x}), p, Tensor({1, 1, 1}, {g}));
  EXPECT_DOUBLE_EQ(grads.input[0], w * g);
  EXPECT_DOUBLE_EQ(grads.kernels[0], x * g);
  EXPECT_DOUBLE_EQ(grads.bias[0], g);
}

TEST(Conv2dBackward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (std::size_t k : {1u, 3u, 5u}) {
    const Tensor x = testkit::random_tensor(rng, {2, 4, 5});
    wn::ConvLayerParams p(testkit::random_tensor(rng, {3, 2, k, k}), testkit::random_tensor(rng, {3}));
    const Tensor g = testkit::random_tensor(rng, {3, 4, 5});
    for (bool ref : {false, true}) {
      const auto grads = ref ? wn::reference::conv2d_backward(x, p, g) : wn::conv2d_backward(x, p, g);
      const Tensor gx = numeric_grad(x, g, [&](const Tensor& t) { return wn::conv2d_forward(t, p); });
      const Tensor gk = numeric_grad(p.kernels, g, [&](const Tensor& t) {
        return wn::conv2d_forward(x, wn::ConvLayerParams(t, p.bias));
      });
      const Tensor gb = numeric_grad(p.bias, g, [&](const Tensor& t) {
        return wn::conv2d_forward(x, wn::ConvLayerParams(p.kernels, t));
      });
      EXPECT_LT(max_rel(grads.input, gx), 1e-4);
      EXPECT_LT(max_rel(grads.kernels, gk), 1e-4);
      EXPECT_LT(max_rel(grads.bias, gb), 1e-4);
    }
  }
}

TEST(Conv2dBackward, ParallelMatchesReference) {
  std::mt19937_64 rng(6);
  const Tensor x = testkit::random_tensor(rng, {5, 11, 9});
  wn::ConvLayerParams p(testkit::random_tensor(rng, {4, 5, 3, 3}), testkit::random_tensor(rng, {4}));
  const Tensor g = testkit::random_tensor(rng, {4, 11, 9});
  const auto a = wn::conv2d_backward(x, p, g);
  const auto b = wn::reference::conv2d_backward(x, p, g);
  EXPECT_LT(testkit::max_abs_diff(a.input, b.input), 1e-12);
  EXPECT_LT(testkit::max_abs_diff(a.kernels, b.kernels), 1e-12);
  EXPECT_LT(testkit::max_abs_diff(a.bias, b.bias), 1e-12);
}

TEST(Relu, Definition) {
  EXPECT_EQ(wn::relu_forward(Tensor({3}, {-1.0, 0.0, 2.0})), Tensor({3}, {0.0, 0.0, 2.0}));
  const Tensor pos({2, 2}, {0.1, 2.0, 3.0, 4.0});
  EXPECT_EQ(wn::relu_forward(pos), pos);
}

TEST(Relu, MatchesElementwiseMax) {
  std::mt19937_64 rng(7);
  const Tensor x = testkit::random_tensor(rng, {4, 4, 4});
  const Tensor y = wn::relu_forward(x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], std::max(0.0, x[i]));
}

TEST(Relu, BackwardRegions) {
  const Tensor g({3}, {1.0, -2.0, 3.0});
  EXPECT_EQ(wn::relu_backward(Tensor({3}, -1.0), g), Tensor({3}, 0.0));
  EXPECT_EQ(wn::relu_backward(Tensor({3}, 1.0), g), g);
}

TEST(Relu, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  Tensor x = testkit::random_tensor(rng, {64});
  for (double& v : x.values()) if (std::abs(v) < 1e-3) v = 0.5;  // stay away from the kink
  const Tensor g = testkit::random_tensor(rng, {64});
  const Tensor num = numeric_grad(x, g, wn::relu_forward);
  EXPECT_LT(max_rel(wn::relu_backward(x, g), num), 1e-4);
}

TEST(Sigmoid, ValuesAndGradient) {
  const Tensor y = wn::sigmoid_forward(Tensor({3}, {0.0, 800.0, -800.0}));
  EXPECT_EQ(y[0], 0.5);
  EXPECT_EQ(y[1], 1.0);
  EXPECT_EQ(y[2], 0.0);
  EXPECT_TRUE(y.all_finite());

  std::mt19937_64 rng(9);
  const Tensor x = testkit::random_tensor(rng, {64}, -4.0, 4.0);
  const Tensor g = testkit::random_tensor(rng, {64});
  const Tensor num = numeric_grad(x, g, wn::sigmoid_forward);
  EXPECT_LT(max_rel(wn::sigmoid_backward(wn::sigmoid_forward(x), g), num), 1e-4);
}

TEST(Adam, ZeroGradientLeavesParamsAndDecaysMoments) {
  const Tensor params({4}, {1.0, -2.0, 3.0, 0.5});
  wn::AdamState s({4}, {});
  s.first_moment.fill(0.2);
  s.second_moment.fill(0.3);
  const auto r = wn::adam_step(params, Tensor({4}), s);
  // Stale moments still move params; only a fresh state leaves them fixed.
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(r.state.first_moment[i], 0.9 * 0.2);
    EXPECT_DOUBLE_EQ(r.state.second_moment[i], 0.999 * 0.3);
  }
  const auto fresh = wn::adam_step(params, Tensor({4}), wn::AdamState({4}, {}));
  EXPECT_EQ(fresh.params, params);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  const Tensor params({4}, 0.0);
  const Tensor g({4}, {3.0, -0.5, 1e-2, -40.0});
  const auto r = wn::adam_step(params, g, wn::AdamState({4}, {}));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(r.params[i], -1e-4 * (g[i] > 0 ? 1.0 : -1.0), 1e-9);
  }
  EXPECT_EQ(r.state.step_count, 1u);
}

TEST(Adam, MatchesScalarRecurrenceOnSquare) {
  // f(w) = w^2 from w = 1, three steps.
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double w = 1.0, m = 0.0, v = 0.0;
  Tensor p({1}, {1.0});
  wn::AdamState s({1}, {lr, b1, b2, eps});
  for (int t = 1; t <= 3; ++t) {
    const double g = 2.0 * w;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    w -= lr * mh / (std::sqrt(vh) + eps);
    auto r = wn::adam_step(p, Tensor({1}, {2.0 * p[0]}), s);
    p = r.params;
    s = r.state;
    EXPECT_NEAR(p[0], w, 1e-12);
  }
}

TEST(Adam, DeterministicAndInPlaceAgrees) {
  std::mt19937_64 rng(10);
  const Tensor p = testkit::random_tensor(rng, {3, 5});
  const Tensor g = testkit::random_tensor(rng, {3, 5});
  const wn::AdamState s({3, 5}, {});
  const auto a = wn::adam_step(p, g, s);
  const auto b = wn::adam_step(p, g, s);
  EXPECT_EQ(a.params, b.params);
  Tensor q = p;
  wn::AdamState st = s;
  wn::adam_update(q, g, st);
  EXPECT_EQ(q, a.params);
}

TEST(Adam, NonFiniteGradientNamesBlock) {
  Tensor g({2}, {1.0, std::nan("")});
  try {
    wn::adam_step(Tensor({2}), g, wn::AdamState({2}, {}), "encoder.0.kernels");
    FAIL() << "expected NumericError";
  } catch (const wavefuse::NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("encoder.0.kernels"), std::string::npos);
  }
}
