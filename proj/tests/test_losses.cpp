#include "curvkit/losses.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace curvkit::losses {
namespace {

using curvkit::testing::central_difference;
using curvkit::testing::random_grid;
using curvkit::testing::random_mask;
using curvkit::testing::relative_vector_error;

NormalMap random_normals(int w, int h, std::mt19937_64& rng) {
  NormalMap n(w, h);
  for (auto& v : n.normal.values()) v = curvkit::testing::random_facing_unit(rng);
  for (auto& m : n.valid.values()) m = 1;
  return n;
}

std::vector<Grid<double>> split(const NormalMap& n) {
  std::vector<Grid<double>> c(3, Grid<double>(n.width(), n.height()));
  for (std::size_t i = 0; i < n.normal.size(); ++i)
    for (int k = 0; k < 3; ++k) c[static_cast<std::size_t>(k)][i] = n.normal[i][k];
  return c;
}

// Mask with at least two valid pixels.
Mask usable_mask(int w, int h, std::mt19937_64& rng) {
  Mask m = random_mask(w, h, rng, 0.8);
  m[0] = 1;
  m[1] = 1;
  return m;
}

TEST(DepthLoss, ZeroAtGroundTruth) {
  std::mt19937_64 rng(1);
  const auto gt = random_grid(5, 5, rng);
  const auto r = depth_loss(gt, gt, Mask(5, 5, 1));
  EXPECT_EQ(r.value, 0.0);
  for (double g : r.grad.front().values()) EXPECT_EQ(g, 0.0);
}

TEST(DepthLoss, ConstantOffsetClosedForm) {
  // sum d^2 = n c^2 and (1 / 2n^2)(n c)^2 = c^2 / 2; the gradient term vanishes.
  std::mt19937_64 rng(2);
  const auto gt = random_grid(6, 4, rng);
  const double c = 0.37;
  Grid<double> pred = gt;
  for (auto& x : pred.values()) x += c;
  const double n = 24.0;
  EXPECT_NEAR(depth_loss(pred, gt, Mask(6, 4, 1)).value, n * c * c - 0.5 * c * c, 1e-12);
}

TEST(DepthLoss, MatchesBruteForceDefinition) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pred = random_grid(5, 5, rng);
    const auto gt = random_grid(5, 5, rng);
    const auto mask = usable_mask(5, 5, rng);
    double s = 0.0, s2 = 0.0, gsum = 0.0;
    int n = 0;
    const auto d = [&](int u, int v) { return pred(u, v) - gt(u, v); };
    for (int v = 0; v < 5; ++v) {
      for (int u = 0; u < 5; ++u) {
        if (!mask(u, v)) continue;
        s += d(u, v);
        s2 += d(u, v) * d(u, v);
        ++n;
        if (u + 1 < 5 && mask(u + 1, v)) gsum += std::pow(d(u + 1, v) - d(u, v), 2);
        if (v + 1 < 5 && mask(u, v + 1)) gsum += std::pow(d(u, v + 1) - d(u, v), 2);
      }
    }
    const double expected = s2 - s * s / (2.0 * n * n) + gsum / n;
    EXPECT_NEAR(depth_loss(pred, gt, mask).value, expected, 1e-12);
  }
}

TEST(DepthLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto pred = random_grid(5, 5, rng);
    const auto gt = random_grid(5, 5, rng);
    const auto mask = usable_mask(5, 5, rng);
    const auto r = depth_loss(pred, gt, mask);
    std::vector<double> analytic, numeric;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      analytic.push_back(r.grad.front()[i]);
      numeric.push_back(central_difference([&] { return depth_loss(pred, gt, mask).value; }, pred[i]));
    }
    EXPECT_LT(relative_vector_error(analytic, numeric), 1e-6);
  }
}

TEST(DepthLoss, InvariantToCommonShift) {
  std::mt19937_64 rng(5);
  const auto pred = random_grid(5, 5, rng);
  const auto gt = random_grid(5, 5, rng);
  const auto mask = usable_mask(5, 5, rng);
  auto p2 = pred, g2 = gt;
  for (auto& x : p2.values()) x += 1.7;
  for (auto& x : g2.values()) x += 1.7;
  EXPECT_NEAR(depth_loss(pred, gt, mask).value, depth_loss(p2, g2, mask).value, 1e-12);
}

TEST(DepthLoss, MaskedPixelsHaveNoInfluence) {
  std::mt19937_64 rng(6);
  auto pred = random_grid(5, 5, rng);
  const auto gt = random_grid(5, 5, rng);
  Mask mask(5, 5, 1);
  mask(2, 2) = 0;
  mask(4, 0) = 0;
  const auto a = depth_loss(pred, gt, mask);
  pred(2, 2) += 10.0;
  pred(4, 0) -= 3.0;
  const auto b = depth_loss(pred, gt, mask);
  EXPECT_EQ(a.value, b.value);
  EXPECT_TRUE(a.grad.front() == b.grad.front());
  EXPECT_EQ(a.grad.front()(2, 2), 0.0);
}

TEST(DepthLoss, NeedsTwoValidPixels) {
  Mask m(3, 3, 0);
  m(1, 1) = 1;
  EXPECT_THROW(depth_loss(Grid<double>(3, 3), Grid<double>(3, 3), m), std::invalid_argument);
  EXPECT_THROW(depth_loss(Grid<double>(3, 3), Grid<double>(3, 2), Mask(3, 3, 1)), std::invalid_argument);
}

TEST(DepthLoss, NonNegative) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto mask = usable_mask(5, 5, rng);
    EXPECT_GE(depth_loss(random_grid(5, 5, rng), random_grid(5, 5, rng), mask).value, 0.0);
  }
}

TEST(NormalLoss, PerPixelMinusOneAtGroundTruth) {
  std::mt19937_64 rng(8);
  const auto gt = random_normals(5, 5, rng);
  const auto r = normal_loss(split(gt), gt, Mask(5, 5, 1));
  EXPECT_NEAR(r.value, -25.0, 1e-12);
  for (const auto& g : r.grad)
    for (double x : g.values()) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(NormalLoss, AntipodalIsFive) {
  std::mt19937_64 rng(9);
  const auto gt = random_normals(1, 1, rng);
  auto pred = split(gt);
  for (auto& c : pred) c[0] = -c[0];
  EXPECT_NEAR(normal_loss(pred, gt, Mask(1, 1, 1)).value, 5.0, 1e-12);
}

TEST(NormalLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const auto gt = random_normals(5, 5, rng);
    std::vector<Grid<double>> pred(3);
    for (auto& c : pred) c = random_grid(5, 5, rng);
    const auto mask = random_mask(5, 5, rng);
    const auto r = normal_loss(pred, gt, mask);
    std::vector<double> analytic, numeric;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < 25; ++i) {
        analytic.push_back(r.grad[c][i]);
        numeric.push_back(central_difference([&] { return normal_loss(pred, gt, mask).value; }, pred[c][i]));
      }
    }
    EXPECT_LT(relative_vector_error(analytic, numeric), 1e-6);
  }
}

TEST(NormalLoss, ZeroLengthPredictionKeepsEuclideanTerm) {
  std::mt19937_64 rng(11);
  const auto gt = random_normals(1, 1, rng);
  std::vector<Grid<double>> pred(3, Grid<double>(1, 1, 0.0));
  const auto r = normal_loss(pred, gt, Mask(1, 1, 1));
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(r.grad[static_cast<std::size_t>(c)][0], -2.0 * gt.normal[0][c], 1e-12);
}

TEST(NormalLoss, BoundedBelowByMinusOnePerPixel) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gt = random_normals(4, 4, rng);
    std::vector<Grid<double>> pred(3);
    for (auto& c : pred) c = random_grid(4, 4, rng);
    const auto mask = random_mask(4, 4, rng);
    std::size_t n = 0;
    for (auto m : mask.values()) n += m;
    EXPECT_GT(normal_loss(pred, gt, mask).value, -static_cast<double>(n));
  }
}

TEST(NormalLoss, MaskedPixelsHaveNoInfluence) {
  std::mt19937_64 rng(13);
  const auto gt = random_normals(3, 3, rng);
  std::vector<Grid<double>> pred(3);
  for (auto& c : pred) c = random_grid(3, 3, rng);
  Mask mask(3, 3, 1);
  mask(1, 1) = 0;
  const auto a = normal_loss(pred, gt, mask);
  pred[2](1, 1) = 100.0;
  const auto b = normal_loss(pred, gt, mask);
  EXPECT_EQ(a.value, b.value);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(b.grad[static_cast<std::size_t>(c)](1, 1), 0.0);
}

TEST(CurvatureLoss, ZeroAtGroundTruth) {
  std::mt19937_64 rng(14);
  const auto k1 = random_grid(5, 5, rng), k2 = random_grid(5, 5, rng);
  const auto depth = random_grid(5, 5, rng, 0.5, 5.0);
  EXPECT_EQ(curvature_loss(k1, k2, k1, k2, depth, Mask(5, 5, 1)).value, 0.0);
}

TEST(CurvatureLoss, SinglePixelWeight) {
  const Grid<double> p1(1, 1, 1.0), p2(1, 1, 0.0), zero(1, 1, 0.0), depth(1, 1, 1.0);
  EXPECT_DOUBLE_EQ(curvature_loss(p1, p2, zero, zero, depth, Mask(1, 1, 1)).value, 0.25);
  // The printed reading of the weight multiplies by (1 + D)^2 instead.
  EXPECT_DOUBLE_EQ(curvature_loss(p1, p2, zero, zero, depth, Mask(1, 1, 1), 2.0).value, 4.0);
}

TEST(CurvatureLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    auto p1 = random_grid(5, 5, rng), p2 = random_grid(5, 5, rng);
    const auto g1 = random_grid(5, 5, rng), g2 = random_grid(5, 5, rng);
    const auto depth = random_grid(5, 5, rng, 0.5, 6.0);
    const auto mask = random_mask(5, 5, rng);
    const double exponent = trial % 2 ? -2.0 : 2.0;
    const auto r = curvature_loss(p1, p2, g1, g2, depth, mask, exponent);
    const auto f = [&] { return curvature_loss(p1, p2, g1, g2, depth, mask, exponent).value; };
    std::vector<double> analytic, numeric;
    for (std::size_t i = 0; i < 25; ++i) {
      analytic.push_back(r.grad[0][i]);
      numeric.push_back(central_difference(f, p1[i]));
      analytic.push_back(r.grad[1][i]);
      numeric.push_back(central_difference(f, p2[i]));
    }
    EXPECT_LT(relative_vector_error(analytic, numeric), 1e-6);
  }
}

TEST(CurvatureLoss, DistantPixelsWeighLess) {
  const Grid<double> p(1, 1, 1.0), zero(1, 1, 0.0);
  const double near = curvature_loss(p, zero, zero, zero, Grid<double>(1, 1, 1.0), Mask(1, 1, 1)).value;
  const double far = curvature_loss(p, zero, zero, zero, Grid<double>(1, 1, 4.0), Mask(1, 1, 1)).value;
  EXPECT_GT(near, far);
}

TEST(CurvatureLoss, MaskedPixelsHaveNoInfluence) {
  std::mt19937_64 rng(16);
  auto p1 = random_grid(3, 3, rng);
  const auto p2 = random_grid(3, 3, rng), g = random_grid(3, 3, rng);
  const auto depth = random_grid(3, 3, rng, 1.0, 3.0);
  Mask mask(3, 3, 1);
  mask(0, 2) = 0;
  const auto a = curvature_loss(p1, p2, g, g, depth, mask);
  p1(0, 2) = 50.0;
  const auto b = curvature_loss(p1, p2, g, g, depth, mask);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(b.grad[0](0, 2), 0.0);
}

}  // namespace
}  // namespace curvkit::losses
