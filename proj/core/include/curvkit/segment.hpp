#pragma once

#include "curvkit/geom.hpp"

#include <cstdint>
#include <optional>

namespace curvkit::segment {

struct BorderWeights {
  double w_intensity = 1.0;
  double w_depth = 5.0;
  double w_curvature = 0.1;
  double delta_thresh = 0.3;

  void validate() const;
};

/// Scalar reduction of (k1, k2) used as the curvature term.
enum class CurvatureReduction {
  kMeanAbs,   // 0.5 (|k1| + |k2|)
  kMaxAbs,    // max(|k1|, |k2|)
  kAbsMean,   // |0.5 (k1 + k2)|
};

using BorderMap = Grid<std::uint8_t>;

/// Rec. 709 luma.
double luminance(const Eigen::Vector3d& rgb);

/// b = w_I |grad I| + w_d |grad D| + w_c C with central differences and
/// replicated borders. Invalid depth neighbours are replaced by the centre
/// value; pixels with invalid depth or curvature keep only the terms they have.
Grid<double> border_function(const RgbImage& rgb, const DepthMap& depth, const CurvatureMap& curv,
                             const BorderWeights& w, CurvatureReduction reduction = CurvatureReduction::kMeanAbs);

/// 1 where b >= delta_thresh.
BorderMap threshold(const Grid<double>& b, double delta_thresh);

enum class Source { kGroundTruth, kPredicted };

struct SceneMaps {
  RgbImage rgb;
  DepthMap gt_depth;
  CurvatureMap gt_curvature;
  std::optional<DepthMap> pred_depth;
  std::optional<CurvatureMap> pred_curvature;
};

/// Throws std::invalid_argument if a requested predicted map is absent.
BorderMap segment_scene(const SceneMaps& maps, Source depth_source, Source curvature_source, const BorderWeights& w,
                        CurvatureReduction reduction = CurvatureReduction::kMeanAbs);

}  // namespace curvkit::segment
