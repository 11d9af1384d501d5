#include "curvkit/synth.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace curvkit::synth {

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::kPlane: return "plane";
    case Shape::kSphere: return "sphere";
    case Shape::kCylinder: return "cylinder";
    case Shape::kSaddle: return "saddle";
    case Shape::kBox: return "box";
  }
  return "unknown";
}

Primitive Primitive::plane(const Pose& pose, double half_x, double half_y, const Eigen::Vector3d& albedo) {
  return {Shape::kPlane, pose, {half_x, half_y, 1.0}, albedo};
}
Primitive Primitive::sphere(const Eigen::Vector3d& centre, double radius, const Eigen::Vector3d& albedo) {
  return {Shape::kSphere, Pose::at(centre), {radius, 1.0, 1.0}, albedo};
}
Primitive Primitive::cylinder(const Pose& pose, double radius, double half_length, const Eigen::Vector3d& albedo) {
  return {Shape::kCylinder, pose, {radius, half_length, 1.0}, albedo};
}
Primitive Primitive::saddle(const Pose& pose, double a, double extent, const Eigen::Vector3d& albedo) {
  return {Shape::kSaddle, pose, {a, extent, 1.0}, albedo};
}
Primitive Primitive::box(const Pose& pose, const Eigen::Vector3d& half_extents, const Eigen::Vector3d& albedo) {
  return {Shape::kBox, pose, half_extents, albedo};
}

double Primitive::surface_residual(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d l = pose.to_local(p);
  switch (shape) {
    case Shape::kPlane: return l.z();
    case Shape::kSphere: return l.norm() - size.x();
    case Shape::kCylinder: return std::max(std::hypot(l.x(), l.y()) - size.x(), std::abs(l.z()) - size.y());
    case Shape::kSaddle: return l.z() - (l.x() * l.x() - l.y() * l.y()) / (2.0 * size.x());
    case Shape::kBox: return (l.cwiseAbs() - size).maxCoeff();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void SceneSpec::validate() const {
  if (primitives.empty() && !(background_depth > 0.0)) {
    throw std::invalid_argument("SceneSpec: needs at least one primitive or a background");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("SceneSpec: noise_sigma must be >= 0");
  for (const auto& p : primitives) {
    const int used = p.shape == Shape::kSphere ? 1 : (p.shape == Shape::kBox ? 3 : 2);
    for (int i = 0; i < used; ++i) {
      if (!(p.size[i] > 0.0)) throw std::invalid_argument("SceneSpec: primitive sizes must be positive");
    }
  }
}

Eigen::Vector3d light_direction() { return Eigen::Vector3d(1.0, 1.0, -1.0).normalized(); }

namespace {

constexpr double kMinT = 1e-9;

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Eigen::Vector3d normal_local = Eigen::Vector3d::Zero();  // outward (or +z for planes/saddles)
  double k1_out = 0.0;  // principal curvatures w.r.t. the outward normal,
  double k2_out = 0.0;  // positive where convex along it
  int face = 0;
};

// Roots of A t^2 + B t + C = 0, ascending; returns count.
int solve_quadratic(double a, double b, double c, double& t0, double& t1) {
  if (std::abs(a) < 1e-300) {
    if (std::abs(b) < 1e-300) return 0;
    t0 = t1 = -c / b;
    return 1;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return 0;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  double r0 = q / a;
  double r1 = q != 0.0 ? c / q : -b / (2.0 * a);
  if (r0 > r1) std::swap(r0, r1);
  t0 = r0;
  t1 = r1;
  return 2;
}

bool intersect_plane(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const Eigen::Vector3d& size, Hit& hit) {
  if (std::abs(d.z()) < 1e-300) return false;
  const double t = -o.z() / d.z();
  if (!(t > kMinT)) return false;
  const Eigen::Vector3d p = o + t * d;
  if (std::abs(p.x()) > size.x() || std::abs(p.y()) > size.y()) return false;
  hit.t = t;
  hit.normal_local = Eigen::Vector3d::UnitZ();
  return true;
}

bool intersect_sphere(const Eigen::Vector3d& o, const Eigen::Vector3d& d, double r, Hit& hit) {
  double t0 = 0.0;
  double t1 = 0.0;
  if (solve_quadratic(d.squaredNorm(), 2.0 * o.dot(d), o.squaredNorm() - r * r, t0, t1) == 0) return false;
  const double t = t0 > kMinT ? t0 : t1;
  if (!(t > kMinT)) return false;
  hit.t = t;
  hit.normal_local = (o + t * d) / r;
  hit.k1_out = hit.k2_out = 1.0 / r;
  return true;
}

bool intersect_cylinder(const Eigen::Vector3d& o, const Eigen::Vector3d& d, double r, double h, Hit& hit) {
  bool found = false;
  double t0 = 0.0;
  double t1 = 0.0;
  const double a = d.x() * d.x() + d.y() * d.y();
  const double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
  const double c = o.x() * o.x() + o.y() * o.y() - r * r;
  const int roots = a > 1e-300 ? solve_quadratic(a, b, c, t0, t1) : 0;
  for (int k = 0; k < roots; ++k) {
    const double t = k == 0 ? t0 : t1;
    if (!(t > kMinT) || t >= hit.t) continue;
    const Eigen::Vector3d p = o + t * d;
    if (std::abs(p.z()) > h) continue;
    hit.t = t;
    hit.normal_local = Eigen::Vector3d(p.x(), p.y(), 0.0) / r;
    hit.k1_out = 1.0 / r;
    hit.k2_out = 0.0;
    hit.face = 0;
    found = true;
  }
  if (std::abs(d.z()) > 1e-300) {
    for (int side = 0; side < 2; ++side) {
      const double zc = side == 0 ? h : -h;
      const double t = (zc - o.z()) / d.z();
      if (!(t > kMinT) || t >= hit.t) continue;
      const Eigen::Vector3d p = o + t * d;
      if (p.x() * p.x() + p.y() * p.y() > r * r) continue;
      hit.t = t;
      hit.normal_local = Eigen::Vector3d(0.0, 0.0, side == 0 ? 1.0 : -1.0);
      hit.k1_out = hit.k2_out = 0.0;
      hit.face = 1 + side;
      found = true;
    }
  }
  return found;
}

bool intersect_saddle(const Eigen::Vector3d& o, const Eigen::Vector3d& d, double a, double extent, Hit& hit) {
  const double qa = -(d.x() * d.x() - d.y() * d.y()) / (2.0 * a);
  const double qb = d.z() - (o.x() * d.x() - o.y() * d.y()) / a;
  const double qc = o.z() - (o.x() * o.x() - o.y() * o.y()) / (2.0 * a);
  double t0 = 0.0;
  double t1 = 0.0;
  const int roots = solve_quadratic(qa, qb, qc, t0, t1);
  for (int k = 0; k < roots; ++k) {
    const double t = k == 0 ? t0 : t1;
    if (!(t > kMinT)) continue;
    const Eigen::Vector3d p = o + t * d;
    if (p.x() * p.x() + p.y() * p.y() > extent * extent) continue;
    const double fx = p.x() / a;
    const double fy = -p.y() / a;
    Eigen::Matrix2d first;
    first << 1.0 + fx * fx, fx * fy, fx * fy, 1.0 + fy * fy;
    const double w = std::sqrt(1.0 + fx * fx + fy * fy);
    Eigen::Matrix2d second;
    second << 1.0 / a, 0.0, 0.0, -1.0 / a;
    second /= w;
    // Eigenvalues of I^-1 II with the +z normal; curvature w.r.t. +z is their negation.
    const Eigen::Matrix2d shape = first.inverse() * second;
    const double ht = 0.5 * shape.trace();
    const double root = std::sqrt(std::max(0.0, ht * ht - shape.determinant()));
    hit.t = t;
    hit.normal_local = Eigen::Vector3d(-fx, -fy, 1.0) / w;
    hit.k1_out = -(ht - root);
    hit.k2_out = -(ht + root);
    return true;
  }
  return false;
}

bool intersect_box(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const Eigen::Vector3d& half, Hit& hit) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis_near = 0;
  int axis_far = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-300) {
      if (std::abs(o[i]) > half[i]) return false;
      continue;
    }
    double ta = (-half[i] - o[i]) / d[i];
    double tb = (half[i] - o[i]) / d[i];
    if (ta > tb) std::swap(ta, tb);
    if (ta > t_near) {
      t_near = ta;
      axis_near = i;
    }
    if (tb < t_far) {
      t_far = tb;
      axis_far = i;
    }
    if (t_near > t_far) return false;
  }
  double t = t_near;
  int axis = axis_near;
  if (!(t > kMinT)) {
    t = t_far;
    axis = axis_far;
  }
  if (!(t > kMinT)) return false;
  const Eigen::Vector3d p = o + t * d;
  hit.t = t;
  hit.normal_local = Eigen::Vector3d::Zero();
  hit.normal_local[axis] = p[axis] > 0.0 ? 1.0 : -1.0;
  hit.face = 2 * axis + (p[axis] > 0.0 ? 1 : 0);
  hit.k1_out = hit.k2_out = 0.0;
  return true;
}

bool intersect(const Primitive& prim, const Eigen::Vector3d& dir, Hit& hit) {
  const Eigen::Vector3d o = prim.pose.to_local(Eigen::Vector3d::Zero());
  const Eigen::Vector3d d = prim.pose.rotation.transpose() * dir;
  switch (prim.shape) {
    case Shape::kPlane: return intersect_plane(o, d, prim.size, hit);
    case Shape::kSphere: return intersect_sphere(o, d, prim.size.x(), hit);
    case Shape::kCylinder: return intersect_cylinder(o, d, prim.size.x(), prim.size.y(), hit);
    case Shape::kSaddle: return intersect_saddle(o, d, prim.size.x(), prim.size.y(), hit);
    case Shape::kBox: return intersect_box(o, d, prim.size, hit);
  }
  return false;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return splitmix64(splitmix64(seed) ^ index); }

Eigen::Matrix3d rot_x(double deg) {
  return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
Eigen::Matrix3d rot_y(double deg) {
  return Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

}  // namespace

RenderOutput render(const SceneSpec& spec, const CameraIntrinsics& intr) {
  spec.validate();
  intr.validate();
  const int w = intr.width;
  const int h = intr.height;
  RenderOutput out{RgbImage(w, h), DepthMap(w, h), NormalMap(w, h), CurvatureMap(w, h), Grid<int>(w, h, -1)};
  const Eigen::Vector3d light = light_direction();
  const int background_id = static_cast<int>(spec.primitives.size()) * 8;

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Eigen::Vector3d dir = intr.ray(u, v);
      Hit best;
      int best_prim = -1;
      for (std::size_t i = 0; i < spec.primitives.size(); ++i) {
        Hit hit;
        hit.t = best.t;
        if (intersect(spec.primitives[i], dir, hit) && hit.t < best.t) {
          best = hit;
          best_prim = static_cast<int>(i);
        }
      }
      Eigen::Vector3d normal;
      Eigen::Vector3d albedo;
      double k1 = 0.0;
      double k2 = 0.0;
      int id = -1;
      if (best_prim >= 0) {
        const Primitive& prim = spec.primitives[static_cast<std::size_t>(best_prim)];
        normal = (prim.pose.rotation * best.normal_local).normalized();
        k1 = best.k1_out;
        k2 = best.k2_out;
        if (normal.dot(dir) > 0.0) {
          // Seen from the other side of the outward normal.
          normal = -normal;
          k1 = -k1;
          k2 = -k2;
        }
        albedo = prim.albedo;
        id = best_prim * 8 + best.face;
      } else if (spec.background_depth > 0.0) {
        best.t = spec.background_depth;
        normal = Eigen::Vector3d(0.0, 0.0, -1.0);
        albedo = spec.background_albedo;
        id = background_id;
      } else {
        continue;
      }
      canonicalize_curvature(k1, k2);
      // dir.z() == 1, so the ray parameter is the depth.
      out.depth.depth(u, v) = best.t;
      out.depth.valid(u, v) = 1;
      out.normals.normal(u, v) = normal;
      out.normals.valid(u, v) = 1;
      out.curvature.k1(u, v) = k1;
      out.curvature.k2(u, v) = k2;
      out.curvature.valid(u, v) = 1;
      out.surface_id(u, v) = id;
      const double shade = 0.3 + 0.7 * std::max(0.0, normal.dot(light));
      out.rgb.rgb(u, v) = (albedo * shade).cwiseMax(0.0).cwiseMin(1.0);
    }
  }

  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (std::size_t i = 0; i < out.depth.depth.size(); ++i) {
      if (!out.depth.valid[i]) continue;
      out.depth.depth[i] = std::max(out.depth.depth[i] + noise(rng), 1e-3);
    }
  }
  return out;
}

Mask interior_mask(const RenderOutput& r, double radius_px, double jump_m) {
  const int w = r.depth.width();
  const int h = r.depth.height();
  Grid<int> edge(w, h, 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!r.depth.valid(u, v)) {
        edge(u, v) = 1;
        continue;
      }
      const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& o : nb) {
        const int su = u + o[0];
        const int sv = v + o[1];
        if (!r.depth.depth.contains(su, sv)) continue;
        if (!r.depth.valid(su, sv) || r.surface_id(su, sv) != r.surface_id(u, v) ||
            std::abs(r.depth.depth(su, sv) - r.depth.depth(u, v)) > jump_m) {
          edge(u, v) = 1;
          break;
        }
      }
    }
  }
  // Square dilation via a summed-area table.
  const int rad = static_cast<int>(std::ceil(radius_px)) + 1;
  std::vector<long long> sat(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(h + 1), 0);
  const auto at = [&](int x, int y) -> long long& { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      at(u + 1, v + 1) = edge(u, v) + at(u, v + 1) + at(u + 1, v) - at(u, v);
    }
  }
  Mask interior(w, h, 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int x0 = u - rad;
      const int y0 = v - rad;
      const int x1 = u + rad + 1;
      const int y1 = v + rad + 1;
      if (x0 < 0 || y0 < 0 || x1 > w || y1 > h) continue;  // window leaves the frame
      const long long count = at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
      interior(u, v) = count == 0 ? 1 : 0;
    }
  }
  return interior;
}

SceneSpec sphere_scene(double radius, double distance) {
  SceneSpec s;
  s.primitives.push_back(Primitive::sphere({0.0, 0.0, distance}, radius, {0.8, 0.3, 0.3}));
  s.background_depth = distance + 3.0 * radius + 1.0;
  return s;
}

SceneSpec cylinder_scene(double radius, double distance) {
  SceneSpec s;
  // Axis horizontal (camera x).
  const Pose pose{rot_y(90.0), {0.0, 0.0, distance}};
  s.primitives.push_back(Primitive::cylinder(pose, radius, 2.0, {0.3, 0.7, 0.3}));
  s.background_depth = distance + 3.0 * radius + 1.0;
  return s;
}

SceneSpec plane_scene(double distance) {
  SceneSpec s;
  s.primitives.push_back(Primitive::plane(Pose{rot_x(180.0), {0.0, 0.0, distance}}, 10.0, 10.0, {0.6, 0.6, 0.6}));
  return s;
}

SceneSpec saddle_scene(double a, double distance) {
  SceneSpec s;
  // Local +z faces the camera.
  s.primitives.push_back(Primitive::saddle(Pose{rot_x(180.0), {0.0, 0.0, distance}}, a, 0.6, {0.3, 0.3, 0.8}));
  s.background_depth = distance + 1.5;
  return s;
}

SceneSpec box_scene() {
  SceneSpec s;
  const Pose pose{rot_y(30.0) * rot_x(-20.0), {0.05, 0.0, 2.0}};
  s.primitives.push_back(Primitive::box(pose, {0.3, 0.25, 0.3}, {0.85, 0.55, 0.2}));
  s.background_depth = 3.0;
  s.background_albedo = {0.5, 0.5, 0.5};
  return s;
}

namespace {
constexpr double kCameraHeight = 1.1;
constexpr double kCameraPitchDeg = 15.0;
}  // namespace

SceneSpec random_scene(std::uint64_t seed, double noise_sigma) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const auto colour = [&]() { return Eigen::Vector3d(uniform(0.15, 0.95), uniform(0.15, 0.95), uniform(0.15, 0.95)); };

  SceneSpec s;
  s.seed = seed;
  s.noise_sigma = noise_sigma;
  // Back wall as a plane so that it tilts with the camera below.
  const double wall_z = uniform(2.9, 3.3);
  const double g = uniform(0.35, 0.7);
  s.primitives.push_back(Primitive::plane(Pose{rot_x(180.0), {0.0, 0.0, wall_z}}, 8.0, 8.0, {g, g, g}));
  s.background_depth = 10.0;
  s.background_albedo = Eigen::Vector3d(g, g, g);

  // Floor below the camera (camera y points down); local +z faces up. The
  // camera height is fixed, as on a rig.
  const double floor_y = kCameraHeight;
  const double half_depth = 0.5 * wall_z;
  s.primitives.push_back(
      Primitive::plane(Pose{rot_x(90.0), {0.0, floor_y, half_depth}}, 6.0, half_depth, colour()));

  const int objects = 1 + static_cast<int>(unit(rng) * 2.0);
  for (int k = 0; k < objects; ++k) {
    const double x = uniform(-0.7, 0.7);
    const double z = uniform(1.3, 2.4);
    const int kind = static_cast<int>(unit(rng) * 4.0);
    const Eigen::Vector3d albedo = colour();
    switch (kind) {
      case 0: {
        const double r = uniform(0.15, 0.4);
        s.primitives.push_back(Primitive::sphere({x, floor_y - r, z}, r, albedo));
        break;
      }
      case 1: {
        const double r = uniform(0.1, 0.3);
        const double hl = uniform(0.25, 0.6);
        s.primitives.push_back(
            Primitive::cylinder(Pose{rot_x(90.0), {x, floor_y - hl, z}}, r, hl, albedo));
        break;
      }
      case 2: {
        const Eigen::Vector3d half(uniform(0.1, 0.35), uniform(0.1, 0.35), uniform(0.1, 0.35));
        const Pose pose{rot_y(uniform(-45.0, 45.0)), {x, floor_y - half.y(), z}};
        s.primitives.push_back(Primitive::box(pose, half, albedo));
        break;
      }
      default: {
        // Stands on the floor: the lower rim of the patch touches it.
        const double extent = uniform(0.2, 0.4);
        const Pose pose{rot_y(uniform(-20.0, 20.0)) * rot_x(180.0 + uniform(-20.0, 20.0)),
                        {x, floor_y - extent, z}};
        s.primitives.push_back(Primitive::saddle(pose, uniform(0.3, 1.0), extent, albedo));
        break;
      }
    }
  }
  // The scene is laid out for a level camera; pitch it down.
  const Eigen::Matrix3d pitch = rot_x(kCameraPitchDeg);
  for (auto& p : s.primitives) {
    p.pose.rotation = pitch * p.pose.rotation;
    p.pose.translation = pitch * p.pose.translation;
  }
  return s;
}

CameraIntrinsics dataset_camera() {
  CameraIntrinsics c;
  c.width = 128;
  c.height = 128;
  c.fx = c.fy = 580.0 * 128.0 / 640.0;
  c.cx = c.cy = 63.5;
  return c;
}

void quantize_rgb(RgbImage& image) {
  for (std::size_t i = 0; i < image.rgb.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double q = std::round(std::clamp(image.rgb[i][c], 0.0, 1.0) * 255.0);
      image.rgb[i][c] = q / 255.0;
    }
  }
}

std::vector<TrainingSample> make_dataset(int n_scenes, const CameraIntrinsics& intr, double noise_sigma,
                                         std::uint64_t seed, const DatasetLayout& layout) {
  if (n_scenes < 1) throw std::invalid_argument("make_dataset: n_scenes must be >= 1");
  std::vector<TrainingSample> samples;
  samples.reserve(static_cast<std::size_t>(n_scenes));
  for (int i = 0; i < n_scenes; ++i) {
    const std::uint64_t scene_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    const RenderOutput r = render(random_scene(scene_seed, noise_sigma), intr);
    TrainingSample s;
    char id[32];
    std::snprintf(id, sizeof(id), "scene_%04d", i);
    s.id = id;
    s.seed = scene_seed;
    s.rgb = resample_bicubic(r.rgb, layout.input_width, layout.input_height);
    quantize_rgb(s.rgb);
    s.depth = resample_bicubic(r.depth, layout.target_width, layout.target_height);
    s.normals = resample_bicubic(r.normals, layout.target_width, layout.target_height);
    s.curvature = resample_bicubic(r.curvature, layout.target_width, layout.target_height);
    for (std::size_t p = 0; p < s.curvature.k1.size(); ++p) {
      s.curvature.k1[p] *= s.curvature_scale;
      s.curvature.k2[p] *= s.curvature_scale;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<TrainingSample> expand_with_augmentation(const std::vector<TrainingSample>& samples, int copies,
                                                     std::uint64_t seed) {
  if (copies < 0) throw std::invalid_argument("expand_with_augmentation: copies must be >= 0");
  std::vector<TrainingSample> out = samples;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int k = 0; k < copies; ++k) {
      const auto spec = augment::random_spec(derive_seed(seed, i * static_cast<std::size_t>(copies) + k));
      const auto& src = samples[i];
      const augment::Sample warped = augment::apply({src.rgb, src.depth, src.normals, src.curvature}, spec);
      TrainingSample s;
      s.id = src.id + "_aug" + std::to_string(k);
      s.rgb = warped.rgb;
      quantize_rgb(s.rgb);
      s.depth = warped.depth;
      s.normals = warped.normals;
      s.curvature = warped.curvature;
      s.curvature_scale = src.curvature_scale;
      s.seed = src.seed;
      s.augmentation = spec;
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace curvkit::synth
