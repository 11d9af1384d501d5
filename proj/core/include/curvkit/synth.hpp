#pragma once

#include "curvkit/augment.hpp"
#include "curvkit/geom.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace curvkit::synth {

enum class Shape { kPlane, kSphere, kCylinder, kSaddle, kBox };

const char* shape_name(Shape s);

/// Rigid transform taking primitive-local coordinates to the camera frame.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose at(const Eigen::Vector3d& t) { return {Eigen::Matrix3d::Identity(), t}; }
  Eigen::Vector3d to_local(const Eigen::Vector3d& p) const { return rotation.transpose() * (p - translation); }
};

/// Size parameters (meters), by shape:
///   plane    (half_x, half_y, -)      local z is the plane normal
///   sphere   (radius, -, -)
///   cylinder (radius, half_length, -) axis along local z, capped
///   saddle   (a, extent_radius, -)    z = (x^2 - y^2) / (2a)
///   box      (half_x, half_y, half_z)
struct Primitive {
  Shape shape = Shape::kPlane;
  Pose pose;
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  Eigen::Vector3d albedo = Eigen::Vector3d::Constant(0.7);

  static Primitive plane(const Pose& pose, double half_x, double half_y, const Eigen::Vector3d& albedo);
  static Primitive sphere(const Eigen::Vector3d& centre, double radius, const Eigen::Vector3d& albedo);
  static Primitive cylinder(const Pose& pose, double radius, double half_length, const Eigen::Vector3d& albedo);
  static Primitive saddle(const Pose& pose, double a, double extent, const Eigen::Vector3d& albedo);
  static Primitive box(const Pose& pose, const Eigen::Vector3d& half_extents, const Eigen::Vector3d& albedo);

  /// Signed residual of the primitive's implicit surface equation at a camera-frame point.
  /// Zero on the surface; meters for every shape.
  double surface_residual(const Eigen::Vector3d& p) const;
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  double background_depth = 0.0;  // fronto-parallel wall at this Z; <= 0 disables it
  Eigen::Vector3d background_albedo = Eigen::Vector3d::Constant(0.5);
  double noise_sigma = 0.0;       // additive Gaussian depth noise (meters)
  std::uint64_t seed = 0;

  void validate() const;
};

struct RenderOutput {
  RgbImage rgb;
  DepthMap depth;  // noisy when noise_sigma > 0
  NormalMap normals;
  CurvatureMap curvature;
  /// Index of the hit surface patch: primitive * 8 + face, -1 for no hit,
  /// 8 * primitives.size() for the background wall.
  Grid<int> surface_id;
};

/// Unit vector toward the light used for Lambertian shading.
Eigen::Vector3d light_direction();

/// Ray casts every pixel; nearest hit wins. Normals face the camera and
/// curvature is positive where the surface is convex toward the camera.
RenderOutput render(const SceneSpec& spec, const CameraIntrinsics& intr);

/// Pixels whose `radius_px` neighbourhood stays on one smooth surface patch:
/// no depth jump above `jump_m`, no change of surface id, no invalid pixel,
/// and the window stays inside the frame.
Mask interior_mask(const RenderOutput& render, double radius_px, double jump_m = 0.05);

/// Fixed catalogue scenes used by examples and acceptance checks.
SceneSpec sphere_scene(double radius, double distance);
SceneSpec cylinder_scene(double radius, double distance);
SceneSpec plane_scene(double distance);
SceneSpec saddle_scene(double a, double distance);
SceneSpec box_scene();
/// Random indoor-ish scene: back wall, floor and one to three objects.
SceneSpec random_scene(std::uint64_t seed, double noise_sigma);

inline constexpr double kCurvatureStorageScale = 0.1;

struct TrainingSample {
  std::string id;
  RgbImage rgb;            // input resolution, quantised to 8 bits per channel
  DepthMap depth;          // target resolution, meters
  NormalMap normals;       // target resolution
  CurvatureMap curvature;  // target resolution, multiplied by curvature_scale
  double curvature_scale = kCurvatureStorageScale;
  std::uint64_t seed = 0;
  std::optional<augment::AugmentSpec> augmentation;
};

struct DatasetLayout {
  int input_width = 64;
  int input_height = 64;
  int target_width = 32;
  int target_height = 32;
};

/// Renders `n_scenes` random scenes at the resolution of `intr`, then
/// bicubically resamples RGB to the input size and geometry to the target
/// size. Deterministic in `seed`.
std::vector<TrainingSample> make_dataset(int n_scenes, const CameraIntrinsics& intr, double noise_sigma,
                                         std::uint64_t seed, const DatasetLayout& layout = {});

/// Appends `copies` randomly augmented versions of every sample.
std::vector<TrainingSample> expand_with_augmentation(const std::vector<TrainingSample>& samples, int copies,
                                                     std::uint64_t seed);

/// Default render camera for datasets: 128x128 with the field of view of the VGA default.
CameraIntrinsics dataset_camera();

/// Quantises every channel to the nearest multiple of 1/255.
void quantize_rgb(RgbImage& image);

}  // namespace curvkit::synth
