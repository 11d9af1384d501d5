#include "curvkit/synth.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace curvkit::synth {
namespace {

CameraIntrinsics small_vga() { return CameraIntrinsics::default_vga().rescaled(160, 120); }

bool on_primitive(int id, std::size_t n_primitives) { return id >= 0 && id < static_cast<int>(8 * n_primitives); }

TEST(Render, FrontoParallelPlane) {
  const auto r = render(plane_scene(2.0), small_vga());
  for (int v = 0; v < 120; ++v) {
    for (int u = 0; u < 160; ++u) {
      ASSERT_TRUE(r.depth.valid(u, v));
      EXPECT_NEAR(r.depth.depth(u, v), 2.0, 1e-12);
      EXPECT_NEAR((r.normals.normal(u, v) - Eigen::Vector3d(0, 0, -1)).norm(), 0.0, 1e-12);
      EXPECT_EQ(r.curvature.k1(u, v), 0.0);
      EXPECT_EQ(r.curvature.k2(u, v), 0.0);
    }
  }
}

TEST(Render, SphereCurvatureIsInverseRadius) {
  const auto r = render(sphere_scene(0.25, 1.5), small_vga());
  std::size_t hits = 0;
  for (int v = 0; v < 120; ++v) {
    for (int u = 0; u < 160; ++u) {
      if (r.surface_id(u, v) != 0) continue;
      EXPECT_NEAR(r.curvature.k1(u, v), 4.0, 1e-12);
      EXPECT_NEAR(r.curvature.k2(u, v), 4.0, 1e-12);
      ++hits;
    }
  }
  EXPECT_GT(hits, 100u);
}

TEST(Render, SaddleApexCurvature) {
  const auto intr = small_vga();
  const auto r = render(saddle_scene(1.0, 2.0), intr);
  const int u = static_cast<int>(intr.cx), v = static_cast<int>(intr.cy);
  ASSERT_EQ(r.surface_id(u, v) / 8, 0);
  // The pixel centre sits a fraction of a pixel off the apex.
  EXPECT_NEAR(r.curvature.k1(u, v), 1.0, 1e-3);
  EXPECT_NEAR(r.curvature.k2(u, v), -1.0, 1e-3);
  EXPECT_NEAR(r.depth.depth(u, v), 2.0, 1e-5);
}

TEST(Render, CylinderCurvature) {
  const auto r = render(cylinder_scene(0.3, 2.0), small_vga());
  std::size_t hits = 0;
  for (int v = 0; v < 120; ++v) {
    for (int u = 0; u < 160; ++u) {
      if (r.surface_id(u, v) != 0) continue;  // lateral face
      EXPECT_NEAR(r.curvature.k1(u, v), 1.0 / 0.3, 1e-12);
      EXPECT_NEAR(r.curvature.k2(u, v), 0.0, 1e-12);
      ++hits;
    }
  }
  EXPECT_GT(hits, 100u);
}

TEST(Render, HitsLieOnAnalyticSurface) {
  const auto intr = small_vga();
  for (const auto& scene : {sphere_scene(0.5, 2.0), cylinder_scene(0.3, 2.0), saddle_scene(0.7, 2.0), box_scene(),
                            random_scene(1, 0.0), random_scene(2, 0.0), random_scene(3, 0.0)}) {
    const auto r = render(scene, intr);
    for (int v = 0; v < intr.height; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        if (!r.depth.valid(u, v)) continue;
        const Eigen::Vector3d p = intr.backproject(u, v, r.depth.depth(u, v));
        const int id = r.surface_id(u, v);
        if (on_primitive(id, scene.primitives.size())) {
          EXPECT_LT(std::abs(scene.primitives[static_cast<std::size_t>(id / 8)].surface_residual(p)), 1e-9);
        } else {
          EXPECT_NEAR(p.z(), scene.background_depth, 1e-9);
        }
      }
    }
  }
}

TEST(Render, GroundTruthMapsSatisfyInvariants) {
  const auto intr = small_vga();
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto r = render(random_scene(seed, 0.0), intr);
    for (int v = 0; v < intr.height; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        for (const auto& c : {r.rgb.rgb(u, v)}) {
          EXPECT_GE(c.minCoeff(), 0.0);
          EXPECT_LE(c.maxCoeff(), 1.0);
        }
        if (!r.depth.valid(u, v)) continue;
        EXPECT_GT(r.depth.depth(u, v), 0.0);
        ASSERT_TRUE(r.normals.valid(u, v));
        EXPECT_NEAR(r.normals.normal(u, v).norm(), 1.0, 1e-6);
        EXPECT_LT(r.normals.normal(u, v).dot(intr.ray(u, v)), 0.0);
        EXPECT_GE(r.curvature.k1(u, v), r.curvature.k2(u, v));
        EXPECT_LE(std::abs(r.curvature.k1(u, v)), kCurvatureBound);
        EXPECT_LE(std::abs(r.curvature.k2(u, v)), kCurvatureBound);
      }
    }
  }
}

TEST(Render, NoisePerturbsDepthOnly) {
  const auto intr = small_vga();
  auto clean_spec = random_scene(4, 0.0);
  auto noisy_spec = clean_spec;
  noisy_spec.noise_sigma = 0.01;
  noisy_spec.seed = 99;
  const auto clean = render(clean_spec, intr);
  const auto noisy = render(noisy_spec, intr);
  EXPECT_TRUE(clean.normals.normal == noisy.normals.normal);
  EXPECT_TRUE(clean.curvature.k1 == noisy.curvature.k1);
  EXPECT_TRUE(clean.curvature.k2 == noisy.curvature.k2);
  EXPECT_TRUE(clean.rgb.rgb == noisy.rgb.rgb);
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < clean.depth.depth.size(); ++i) {
    if (!clean.depth.valid[i]) continue;
    const double d = noisy.depth.depth[i] - clean.depth.depth[i];
    sq += d * d;
    ++n;
  }
  EXPECT_NEAR(std::sqrt(sq / static_cast<double>(n)), 0.01, 0.001);
}

TEST(Render, LambertianShadingFollowsLight) {
  const auto l = light_direction();
  EXPECT_NEAR((l - Eigen::Vector3d(1, 1, -1).normalized()).norm(), 0.0, 1e-15);
  // A fronto-parallel plane faces (0, 0, -1), so it receives cos = 1/sqrt(3).
  const auto r = render(plane_scene(2.0), small_vga());
  const Eigen::Vector3d c = r.rgb.rgb(10, 10);
  const Eigen::Vector3d d = r.rgb.rgb(100, 70);
  EXPECT_NEAR((c - d).norm(), 0.0, 1e-12);
  EXPECT_GT(c.x(), 0.0);
}

TEST(SceneSpec, ValidateRejectsBadScenes) {
  SceneSpec empty;
  EXPECT_THROW(empty.validate(), std::invalid_argument);
  auto s = sphere_scene(0.5, 2.0);
  s.noise_sigma = -1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = sphere_scene(0.5, 2.0);
  s.primitives[0].size.x() = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(RandomScene, DeterministicAndVaried) {
  const auto a = random_scene(5, 0.0);
  const auto b = random_scene(5, 0.0);
  ASSERT_EQ(a.primitives.size(), b.primitives.size());
  for (std::size_t i = 0; i < a.primitives.size(); ++i) {
    EXPECT_EQ(a.primitives[i].pose.translation, b.primitives[i].pose.translation);
    EXPECT_EQ(a.primitives[i].size, b.primitives[i].size);
  }
  const auto c = random_scene(6, 0.0);
  EXPECT_NE(a.primitives[0].pose.translation, c.primitives[0].pose.translation);
}

TEST(InteriorMask, ExcludesDiscontinuities) {
  const auto intr = small_vga();
  const auto r = render(sphere_scene(0.5, 2.0), intr);
  const auto m = interior_mask(r, 4.0);
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      if (!m(u, v)) continue;
      for (int dv = -4; dv <= 4; ++dv) {
        for (int du = -4; du <= 4; ++du) {
          if (!r.surface_id.contains(u + du, v + dv)) continue;
          EXPECT_EQ(r.surface_id(u + du, v + dv), r.surface_id(u, v));
        }
      }
    }
  }
}

TEST(Dataset, SameSeedIsIdentical) {
  const auto a = make_dataset(3, dataset_camera(), 0.004, 7);
  const auto b = make_dataset(3, dataset_camera(), 0.004, 7);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_TRUE(a[i].rgb.rgb == b[i].rgb.rgb);
    EXPECT_TRUE(a[i].depth.depth == b[i].depth.depth);
    EXPECT_TRUE(a[i].normals.normal == b[i].normals.normal);
    EXPECT_TRUE(a[i].curvature.k1 == b[i].curvature.k1);
  }
  const auto c = make_dataset(1, dataset_camera(), 0.004, 8);
  EXPECT_FALSE(a[0].depth.depth == c[0].depth.depth);
}

TEST(Dataset, LayoutAndStoredScale) {
  const auto intr = dataset_camera();
  const auto ds = make_dataset(2, intr, 0.0, 3);
  for (const auto& s : ds) {
    EXPECT_EQ(s.rgb.width(), 64);
    EXPECT_EQ(s.depth.width(), 32);
    EXPECT_EQ(s.curvature.height(), 32);
    EXPECT_DOUBLE_EQ(s.curvature_scale, 0.1);
    // Rebuild from the recorded scene seed.
    const auto r = render(random_scene(s.seed, 0.0), intr);
    const auto k = resample_bicubic(r.curvature, 32, 32);
    for (std::size_t i = 0; i < k.k1.size(); ++i) {
      if (!k.valid[i]) continue;
      EXPECT_DOUBLE_EQ(s.curvature.k1[i], 0.1 * k.k1[i]);
      EXPECT_DOUBLE_EQ(s.curvature.k2[i], 0.1 * k.k2[i]);
    }
    for (const auto& c : s.rgb.rgb.values()) {
      for (int ch = 0; ch < 3; ++ch) EXPECT_DOUBLE_EQ(c[ch] * 255.0, std::round(c[ch] * 255.0));
    }
  }
}

TEST(Dataset, SphereStoredCurvature) {
  // A quarter-metre sphere has curvature 4, stored as 0.4.
  SceneSpec s = sphere_scene(0.25, 1.0);
  const auto intr = dataset_camera();
  const auto r = render(s, intr);
  auto k = resample_bicubic(r.curvature, 32, 32);
  const auto interior = interior_mask(r, 6.0);
  const double scale = kCurvatureStorageScale;
  const int u = 16, v = 16;
  ASSERT_TRUE(interior(64, 64));
  EXPECT_NEAR(scale * k.k1(u, v), 0.4, 1e-12);
  EXPECT_NEAR(scale * k.k2(u, v), 0.4, 1e-12);
}

TEST(Dataset, ZeroScenesThrows) {
  EXPECT_THROW(make_dataset(0, dataset_camera(), 0.0, 1), std::invalid_argument);
}

TEST(Dataset, AugmentedCopiesCarryTheirSpec) {
  const auto ds = make_dataset(2, dataset_camera(), 0.0, 3);
  const auto ex = expand_with_augmentation(ds, 2, 11);
  ASSERT_EQ(ex.size(), 6u);
  EXPECT_FALSE(ex[0].augmentation);
  EXPECT_TRUE(ex[2].augmentation);
  EXPECT_EQ(ex[2].id, ds[0].id + "_aug0");
  EXPECT_THROW(expand_with_augmentation(ds, -1, 1), std::invalid_argument);
}

TEST(Quantize, RoundsToEightBits) {
  RgbImage img(1, 1);
  img.rgb(0, 0) = {0.5, 1.2, -0.1};
  quantize_rgb(img);
  EXPECT_DOUBLE_EQ(img.rgb(0, 0).x(), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(img.rgb(0, 0).y(), 1.0);
  EXPECT_DOUBLE_EQ(img.rgb(0, 0).z(), 0.0);
}

}  // namespace
}  // namespace curvkit::synth
