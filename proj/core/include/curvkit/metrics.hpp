#pragma once

#include "curvkit/geom.hpp"
#include "curvkit/quadric.hpp"

#include <array>
#include <optional>

namespace curvkit::metrics {

inline constexpr double kDeltaBase = 1.25;
inline constexpr std::array<double, 3> kAngleThresholdsDeg{11.25, 22.5, 30.0};
inline constexpr std::array<double, 3> kCurvatureThresholds{0.25, 0.5, 1.0};  // m^-1
/// Mean-curvature magnitude below which a ground-truth pixel counts as planar
/// (radius of curvature above one meter).
inline constexpr double kPlanarMeanCurvature = 1.0;

struct DepthMetrics {
  double rel_abs = 0.0;
  double rms_lin = 0.0;
  double rms_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t count = 0;
};

struct NormalMetrics {
  double mean_deg = 0.0;
  double median_deg = 0.0;
  double within_11_25 = 0.0;
  double within_22_5 = 0.0;
  double within_30 = 0.0;
  std::size_t count = 0;
};

struct CurvatureMetrics {
  double rms_k1 = 0.0;
  double rms_k2 = 0.0;
  std::optional<double> median_planar;
  std::optional<double> median_nonplanar;
  double within_s1 = 0.0;
  double within_s2 = 0.0;
  double within_s3 = 0.0;
  std::size_t count = 0;
};

/// Which per-pixel error the within-sigma fractions count.
enum class CurvatureThresholdMode {
  kMeanCurvature,  // |H - H*| with H = (k1 + k2) / 2
  kPerChannel,     // max(|k1 - k1*|, |k2 - k2*|)
};

/// Median of an unsorted sample; the mean of the two middle values for even sizes.
double median(std::vector<double> values);

/// Pixels valid in pred, gt and `mask` are scored. Throws when none remain.
DepthMetrics eval_depth(const DepthMap& pred, const DepthMap& gt, const Mask& mask);
/// Predictions are normalised internally.
NormalMetrics eval_normals(const NormalMap& pred, const NormalMap& gt, const Mask& mask);
/// Both maps in m^-1 (already unscaled).
CurvatureMetrics eval_curvature(const CurvatureMap& pred, const CurvatureMap& gt, const Mask& mask,
                                CurvatureThresholdMode mode = CurvatureThresholdMode::kMeanCurvature);

/// Curvature recomputed from a (predicted) depth map by local quadric fitting.
CurvatureMap curvature_from_predicted_depth(const DepthMap& pred_depth, const CameraIntrinsics& intr,
                                            const quadric::PatchSpec& spec);

}  // namespace curvkit::metrics
