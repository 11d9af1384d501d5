#include "curvkit/metrics.hpp"
#include "curvkit/quadric.hpp"
#include "curvkit/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace curvkit::metrics {
namespace {

using curvkit::testing::metric_gap;

DepthMap random_depth(int w, int h, std::mt19937_64& rng) {
  DepthMap d(w, h);
  d.depth = curvkit::testing::random_grid(w, h, rng, 0.5, 5.0);
  d.valid = curvkit::testing::random_mask(w, h, rng, 0.9);
  return d;
}

NormalMap random_normal_map(int w, int h, std::mt19937_64& rng) {
  NormalMap n(w, h);
  for (auto& v : n.normal.values()) v = curvkit::testing::random_unit(rng);
  n.valid = curvkit::testing::random_mask(w, h, rng, 0.9);
  return n;
}

CurvatureMap random_curvature(int w, int h, std::mt19937_64& rng) {
  CurvatureMap c(w, h);
  c.k1 = curvkit::testing::random_grid(w, h, rng, -3.0, 3.0);
  c.k2 = curvkit::testing::random_grid(w, h, rng, -3.0, 3.0);
  for (std::size_t i = 0; i < c.k1.size(); ++i) canonicalize_curvature(c.k1[i], c.k2[i]);
  c.valid = curvkit::testing::random_mask(w, h, rng, 0.9);
  return c;
}

TEST(Thresholds, MatchTableCaptions) {
  EXPECT_EQ(kDeltaBase, 1.25);
  EXPECT_EQ(kCurvatureThresholds[0], 0.25);
  EXPECT_EQ(kCurvatureThresholds[1], 0.5);
  EXPECT_EQ(kCurvatureThresholds[2], 1.0);
  EXPECT_EQ(kAngleThresholdsDeg[0], 11.25);
  EXPECT_EQ(kAngleThresholdsDeg[1], 22.5);
  EXPECT_EQ(kAngleThresholdsDeg[2], 30.0);
}

TEST(Median, OddAndEven) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(EvalDepth, PerfectPrediction) {
  std::mt19937_64 rng(1);
  const auto gt = random_depth(8, 8, rng);
  const auto m = eval_depth(gt, gt, Mask(8, 8, 1));
  EXPECT_EQ(m.rel_abs, 0.0);
  EXPECT_EQ(m.rms_lin, 0.0);
  EXPECT_EQ(m.rms_log, 0.0);
  EXPECT_EQ(m.delta1, 1.0);
  EXPECT_EQ(m.delta3, 1.0);
}

TEST(EvalDepth, ScaledByDeltaBaseIsStrict) {
  std::mt19937_64 rng(2);
  // Power-of-two depths keep pred / gt exactly 1.25.
  auto gt = random_depth(8, 8, rng);
  for (auto& x : gt.depth.values()) x = std::exp2(std::round(std::log2(x)));
  auto pred = gt;
  for (auto& x : pred.depth.values()) x *= 1.25;
  const auto m = eval_depth(pred, gt, Mask(8, 8, 1));
  EXPECT_NEAR(m.rel_abs, 0.25, 1e-12);
  EXPECT_EQ(m.delta1, 0.0);
  EXPECT_EQ(m.delta2, 1.0);
  EXPECT_EQ(m.delta3, 1.0);
}

TEST(EvalDepth, MatchesReference) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pred = random_depth(16, 16, rng), gt = random_depth(16, 16, rng);
    const auto mask = curvkit::testing::random_mask(16, 16, rng);
    EXPECT_LT(metric_gap(eval_depth(pred, gt, mask), curvkit::testing::reference_depth(pred, gt, mask)), 1e-12);
  }
}

TEST(EvalDepth, EmptyMaskThrows) {
  std::mt19937_64 rng(4);
  const auto gt = random_depth(4, 4, rng);
  EXPECT_THROW(eval_depth(gt, gt, Mask(4, 4, 0)), std::invalid_argument);
}

TEST(EvalDepth, DeltasAreOrdered) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = eval_depth(random_depth(8, 8, rng), random_depth(8, 8, rng), Mask(8, 8, 1));
    EXPECT_LE(0.0, m.delta1);
    EXPECT_LE(m.delta1, m.delta2);
    EXPECT_LE(m.delta2, m.delta3);
    EXPECT_LE(m.delta3, 1.0);
  }
}

TEST(EvalNormals, PerfectPrediction) {
  std::mt19937_64 rng(6);
  const auto gt = random_normal_map(8, 8, rng);
  const auto m = eval_normals(gt, gt, Mask(8, 8, 1));
  EXPECT_NEAR(m.mean_deg, 0.0, 1e-5);
  EXPECT_NEAR(m.median_deg, 0.0, 1e-5);
  EXPECT_EQ(m.within_11_25, 1.0);
}

TEST(EvalNormals, ConstantTwentyDegrees) {
  std::mt19937_64 rng(7);
  auto gt = random_normal_map(8, 8, rng);
  for (auto& m : gt.valid.values()) m = 1;
  NormalMap pred = gt;
  for (auto& n : pred.normal.values()) {
    const Eigen::Vector3d axis = n.unitOrthogonal();
    n = Eigen::AngleAxisd(20.0 * std::numbers::pi / 180.0, axis) * n;
  }
  const auto m = eval_normals(pred, gt, Mask(8, 8, 1));
  EXPECT_NEAR(m.mean_deg, 20.0, 1e-9);
  EXPECT_NEAR(m.median_deg, 20.0, 1e-9);
  EXPECT_EQ(m.within_11_25, 0.0);
  EXPECT_EQ(m.within_22_5, 1.0);
}

TEST(EvalNormals, PredictionsAreNormalised) {
  std::mt19937_64 rng(8);
  const auto gt = random_normal_map(6, 6, rng);
  auto pred = random_normal_map(6, 6, rng);
  const auto a = eval_normals(pred, gt, Mask(6, 6, 1));
  for (auto& n : pred.normal.values()) n *= 3.0;
  EXPECT_LT(metric_gap(a, eval_normals(pred, gt, Mask(6, 6, 1))), 1e-10);
}

TEST(EvalNormals, MatchesReference) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pred = random_normal_map(16, 16, rng), gt = random_normal_map(16, 16, rng);
    const auto mask = curvkit::testing::random_mask(16, 16, rng);
    EXPECT_LT(metric_gap(eval_normals(pred, gt, mask), curvkit::testing::reference_normals(pred, gt, mask)), 1e-10);
  }
}

TEST(EvalCurvature, PerfectPrediction) {
  std::mt19937_64 rng(10);
  const auto gt = random_curvature(8, 8, rng);
  const auto m = eval_curvature(gt, gt, Mask(8, 8, 1));
  EXPECT_EQ(m.rms_k1, 0.0);
  EXPECT_EQ(m.within_s1, 1.0);
  ASSERT_TRUE(m.median_planar);
  EXPECT_EQ(*m.median_planar, 0.0);
}

TEST(EvalCurvature, MatchesReference) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pred = random_curvature(16, 16, rng), gt = random_curvature(16, 16, rng);
    const auto mask = curvkit::testing::random_mask(16, 16, rng);
    EXPECT_LT(metric_gap(eval_curvature(pred, gt, mask), curvkit::testing::reference_curvature(pred, gt, mask)), 1e-10);
  }
}

TEST(EvalCurvature, EmptyPlanarSetIsAbsent) {
  CurvatureMap gt(2, 2);
  for (auto& x : gt.k1.values()) x = 3.0;
  for (auto& x : gt.k2.values()) x = 2.0;
  for (auto& m : gt.valid.values()) m = 1;
  const auto m = eval_curvature(gt, gt, Mask(2, 2, 1));
  EXPECT_FALSE(m.median_planar);
  ASSERT_TRUE(m.median_nonplanar);
}

TEST(EvalCurvature, PerChannelModeIsNoLooser) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pred = random_curvature(8, 8, rng), gt = random_curvature(8, 8, rng);
    const auto mean = eval_curvature(pred, gt, Mask(8, 8, 1));
    const auto chan = eval_curvature(pred, gt, Mask(8, 8, 1), CurvatureThresholdMode::kPerChannel);
    // |H - H*| <= max(|e1|, |e2|).
    EXPECT_LE(chan.within_s1, mean.within_s1);
    EXPECT_LE(chan.within_s3, mean.within_s3);
  }
}

TEST(EvalCurvature, SpherePlusPlaneMatchesReference) {
  synth::SceneSpec scene = synth::sphere_scene(0.4, 2.0);
  scene.primitives.push_back(synth::plane_scene(2.6).primitives.front());
  const auto intr = CameraIntrinsics::default_vga().rescaled(160, 120);
  const auto r = synth::render(scene, intr);
  const auto pred = curvature_from_predicted_depth(r.depth, intr, quadric::PatchSpec::rings(5.0));
  const Mask all(160, 120, 1);
  const auto m = eval_curvature(pred, r.curvature, all);
  EXPECT_LT(metric_gap(m, curvkit::testing::reference_curvature(pred, r.curvature, all)), 1e-10);
  EXPECT_TRUE(m.median_planar);
  EXPECT_TRUE(m.median_nonplanar);
}

TEST(Metrics, PermutationInvariant) {
  std::mt19937_64 rng(13);
  const auto pd = random_depth(8, 8, rng), gd = random_depth(8, 8, rng);
  const auto pn = random_normal_map(8, 8, rng), gn = random_normal_map(8, 8, rng);
  const auto pc = random_curvature(8, 8, rng), gc = random_curvature(8, 8, rng);
  std::vector<std::size_t> perm(64);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto permute = [&](auto g) {
    auto out = g;
    for (std::size_t i = 0; i < 64; ++i) out[perm[i]] = g[i];
    return out;
  };
  DepthMap pd2 = pd, gd2 = gd;
  pd2.depth = permute(pd.depth);
  pd2.valid = permute(pd.valid);
  gd2.depth = permute(gd.depth);
  gd2.valid = permute(gd.valid);
  EXPECT_LT(metric_gap(eval_depth(pd, gd, Mask(8, 8, 1)), eval_depth(pd2, gd2, Mask(8, 8, 1))), 1e-12);
  NormalMap pn2 = pn, gn2 = gn;
  pn2.normal = permute(pn.normal);
  pn2.valid = permute(pn.valid);
  gn2.normal = permute(gn.normal);
  gn2.valid = permute(gn.valid);
  EXPECT_LT(metric_gap(eval_normals(pn, gn, Mask(8, 8, 1)), eval_normals(pn2, gn2, Mask(8, 8, 1))), 1e-10);
  CurvatureMap pc2 = pc, gc2 = gc;
  pc2.k1 = permute(pc.k1);
  pc2.k2 = permute(pc.k2);
  pc2.valid = permute(pc.valid);
  gc2.k1 = permute(gc.k1);
  gc2.k2 = permute(gc.k2);
  gc2.valid = permute(gc.valid);
  EXPECT_LT(metric_gap(eval_curvature(pc, gc, Mask(8, 8, 1)), eval_curvature(pc2, gc2, Mask(8, 8, 1))), 1e-12);
}

TEST(CurvatureFromDepth, ConstantDepthIsFlat) {
  const auto intr = CameraIntrinsics::default_vga().rescaled(80, 60);
  DepthMap d(80, 60);
  for (auto& x : d.depth.values()) x = 1.5;
  for (auto& m : d.valid.values()) m = 1;
  const auto k = curvature_from_predicted_depth(d, intr, quadric::PatchSpec::rings(5.0));
  for (std::size_t i = 0; i < k.k1.size(); ++i) {
    ASSERT_TRUE(k.valid[i]);
    EXPECT_NEAR(k.k1[i], 0.0, 1e-6);
    EXPECT_NEAR(k.k2[i], 0.0, 1e-6);
  }
}

TEST(CurvatureFromDepth, NoiseMakesItWorse) {
  const auto intr = CameraIntrinsics::default_vga().rescaled(160, 120);
  auto clean_spec = synth::sphere_scene(0.4, 1.5);
  auto noisy_spec = clean_spec;
  noisy_spec.noise_sigma = 0.005;
  noisy_spec.seed = 5;
  const auto clean = synth::render(clean_spec, intr);
  const auto noisy = synth::render(noisy_spec, intr);
  const auto spec = quadric::PatchSpec::rings(9.0);
  const auto mask = synth::interior_mask(clean, 9.0);
  const auto a = eval_curvature(curvature_from_predicted_depth(clean.depth, intr, spec), clean.curvature, mask);
  const auto b = eval_curvature(curvature_from_predicted_depth(noisy.depth, intr, spec), clean.curvature, mask);
  EXPECT_LT(a.rms_k1, 0.05);
  EXPECT_GT(b.rms_k1, a.rms_k1);
  EXPECT_GT(b.rms_k2, a.rms_k2);
}

}  // namespace
}  // namespace curvkit::metrics
