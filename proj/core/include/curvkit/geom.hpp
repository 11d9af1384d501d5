#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvkit {

/// Row-major dense grid. Pixel (u, v) is column u, row v.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, const T& fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw std::invalid_argument("Grid: negative dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }

  T& operator()(int u, int v) { return data_[index(u, v)]; }
  const T& operator()(int u, int v) const { return data_[index(u, v)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(int w, int h) const { return width_ == w && height_ == h; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Per-pixel validity flag (1 = valid).
using Mask = Grid<std::uint8_t>;

/// Pinhole camera. Pixel centers sit at integer coordinates.
struct CameraIntrinsics {
  double fx = 580.0;
  double fy = 580.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  /// Generic 640x480 structured-light style default.
  static CameraIntrinsics default_vga() { return {}; }

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;

  /// Same field of view at a different raster size.
  CameraIntrinsics rescaled(int new_width, int new_height) const;

  Eigen::Vector3d ray(double u, double v) const {
    return {(u - cx) / fx, (v - cy) / fy, 1.0};
  }
  Eigen::Vector3d backproject(double u, double v, double depth) const {
    return {(u - cx) * depth / fx, (v - cy) * depth / fy, depth};
  }
  Eigen::Vector2d project(const Eigen::Vector3d& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
};

/// Metric depth in meters. Depth 0 is the raw-sensor encoding of a hole.
struct DepthMap {
  Grid<double> depth;
  Mask valid;

  DepthMap() = default;
  DepthMap(int width, int height) : depth(width, height, 0.0), valid(width, height, 0) {}

  /// Builds the mask from the raw values: valid iff depth > 0 and finite.
  static DepthMap from_raw(Grid<double> raw);

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
  std::size_t valid_count() const;
};

/// Unit normals in the camera frame, facing the camera.
struct NormalMap {
  Grid<Eigen::Vector3d> normal;
  Mask valid;

  NormalMap() = default;
  NormalMap(int width, int height)
      : normal(width, height, Eigen::Vector3d::Zero()), valid(width, height, 0) {}

  int width() const { return normal.width(); }
  int height() const { return normal.height(); }
};

/// Principal curvatures in m^-1, k1 >= k2, both clamped to the curvature bound.
struct CurvatureMap {
  Grid<double> k1;
  Grid<double> k2;
  Mask valid;

  CurvatureMap() = default;
  CurvatureMap(int width, int height) : k1(width, height, 0.0), k2(width, height, 0.0), valid(width, height, 0) {}

  int width() const { return k1.width(); }
  int height() const { return k1.height(); }
};

/// Linear RGB with every channel in [0, 1].
struct RgbImage {
  Grid<Eigen::Vector3d> rgb;

  RgbImage() = default;
  RgbImage(int width, int height) : rgb(width, height, Eigen::Vector3d::Zero()) {}

  int width() const { return rgb.width(); }
  int height() const { return rgb.height(); }
};

/// Back-projected camera-frame points; invalid pixels carry no point.
struct PointCloudGrid {
  Grid<Eigen::Vector3d> points;
  Mask valid;

  int width() const { return points.width(); }
  int height() const { return points.height(); }
};

/// Largest curvature magnitude the pipeline will report (1 cm radius).
inline constexpr double kCurvatureBound = 100.0;

/// Sorts (k1, k2) descending and clamps both into [-kCurvatureBound, kCurvatureBound].
void canonicalize_curvature(double& k1, double& k2);

PointCloudGrid backproject(const DepthMap& depth, const CameraIntrinsics& intr);

/// Catmull-Rom bicubic resampling with half-pixel-centred coordinates.
/// Taps that fall outside the source are linearly extrapolated from the two
/// nearest rows/columns, so affine data is reproduced exactly up to the border.
/// An output pixel is invalid if any source pixel feeding it is invalid.
void resample_bicubic(const Grid<double>& src, const Mask& src_valid, int new_width, int new_height,
                      Grid<double>& dst, Mask& dst_valid);

DepthMap resample_bicubic(const DepthMap& map, int new_width, int new_height);
/// Channels are interpolated independently then renormalised.
NormalMap resample_bicubic(const NormalMap& map, int new_width, int new_height);
/// Channels are interpolated independently then re-sorted and re-clamped.
CurvatureMap resample_bicubic(const CurvatureMap& map, int new_width, int new_height);
/// Result is clamped to [0, 1].
RgbImage resample_bicubic(const RgbImage& image, int new_width, int new_height);

/// Throws std::invalid_argument naming `what` when the two shapes differ.
void require_shape(int width, int height, int other_width, int other_height, const std::string& what);

}  // namespace curvkit
