#pragma once

#include "curvkit/geom.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace curvkit::quadric {

struct PixelOffset {
  int du = 0;
  int dv = 0;
  friend bool operator==(const PixelOffset&, const PixelOffset&) = default;
};

/// Sparse circular sampling pattern around the pixel being fitted.
struct PatchSpec {
  double radius_px = 18.0;
  std::vector<PixelOffset> sample_offsets;
  int min_samples = 12;

  /// Centre plus four concentric rings at 1/4, 1/2, 3/4 and 1 of the radius
  /// carrying 8, 12, 16 and 20 evenly spaced samples (57 offsets).
  static PatchSpec rings(double radius_px = 18.0, int min_samples = 12);

  void validate() const;
};

/// Height-field quadric w = a u^2 + b uv + c v^2 + d u + e v + f expressed in
/// the orthonormal frame (t1, t2, n0) anchored at `origin`. n0 faces the camera.
struct LocalQuadric {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();  // columns t1, t2, n0
  std::array<double, 6> coeffs{};                      // a, b, c, d, e, f
  int sample_count = 0;
  double residual_rms = 0.0;

  double a() const { return coeffs[0]; }
  double b() const { return coeffs[1]; }
  double c() const { return coeffs[2]; }
  double d() const { return coeffs[3]; }
  double e() const { return coeffs[4]; }
  double f() const { return coeffs[5]; }

  /// Camera-frame point -> local (u, v, w).
  Eigen::Vector3d to_local(const Eigen::Vector3d& p) const { return frame.transpose() * (p - origin); }
};

/// Two-pass fit: covariance plane for the frame, then linear least squares
/// for the six height coefficients. Empty when fewer than `min_samples`
/// samples are valid or the design matrix is numerically rank deficient.
std::optional<LocalQuadric> fit_patch(const PointCloudGrid& points, int u, int v, const PatchSpec& spec);

/// Unit surface normal at the frame origin, camera frame, facing the camera.
Eigen::Vector3d normal_from_quadric(const LocalQuadric& q);

/// Principal curvatures (k1 >= k2, m^-1), positive where the surface is
/// convex toward the camera, clamped to +-kCurvatureBound.
std::pair<double, double> curvature_from_quadric(const LocalQuadric& q);

struct DenseGeometry {
  NormalMap normals;
  CurvatureMap curvature;
};

DenseGeometry dense_geometry(const DepthMap& depth, const CameraIntrinsics& intr, const PatchSpec& spec);

}  // namespace curvkit::quadric
