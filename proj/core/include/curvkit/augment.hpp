#pragma once

#include "curvkit/geom.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace curvkit::augment {

/// One geometric + photometric transform applied identically to every channel
/// of a sample. Translation is measured in pixels of the RGB raster.
struct AugmentSpec {
  bool flip_h = false;
  double rotation_deg = 0.0;
  int translate_x = 0;
  int translate_y = 0;
  Eigen::Vector3d color_scale = Eigen::Vector3d::Ones();
  std::uint64_t seed = 0;

  bool is_identity() const;
};

struct AugmentRanges {
  double max_rotation_deg = 15.0;
  int max_translation_px = 10;
  double color_scale_min = 0.8;
  double color_scale_max = 1.25;
  double flip_probability = 0.5;
};

/// RGB may be finer than the geometry channels as long as aspect ratios agree.
struct Sample {
  RgbImage rgb;
  DepthMap depth;
  NormalMap normals;
  CurvatureMap curvature;
};

/// Warps about the raster centre: flip, then rotate, then translate.
/// Depth, curvature, normals and masks use nearest-neighbour lookup; RGB is
/// bilinear. Normal vectors are flipped/rotated in-plane along with the
/// raster, curvature values are left untouched, and pixels mapped from
/// outside the frame become invalid (RGB black).
Sample apply(const Sample& sample, const AugmentSpec& spec);

/// Deterministic in `seed`; every parameter drawn uniformly from `ranges`.
AugmentSpec random_spec(std::uint64_t seed, const AugmentRanges& ranges = {});

}  // namespace curvkit::augment
