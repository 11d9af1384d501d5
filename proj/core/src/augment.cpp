#include "curvkit/augment.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace curvkit::augment {

bool AugmentSpec::is_identity() const {
  return !flip_h && rotation_deg == 0.0 && translate_x == 0 && translate_y == 0 &&
         color_scale == Eigen::Vector3d::Ones();
}

namespace {

// Inverse warp for one raster: destination pixel centre -> source position.
class Warp {
 public:
  Warp(const AugmentSpec& spec, int width, int height, double ref_scale)
      : width_(width), height_(height), scale_(ref_scale), flip_(spec.flip_h) {
    const double theta = spec.rotation_deg * std::numbers::pi / 180.0;
    cos_ = std::cos(theta);
    sin_ = std::sin(theta);
    tx_ = spec.translate_x;
    ty_ = spec.translate_y;
  }

  Eigen::Vector2d source(int u, int v) const {
    // Centred coordinates in reference (RGB) pixels.
    const double x = (u + 0.5 - 0.5 * width_) * scale_ - tx_;
    const double y = (v + 0.5 - 0.5 * height_) * scale_ - ty_;
    double sx = cos_ * x + sin_ * y;
    const double sy = -sin_ * x + cos_ * y;
    if (flip_) sx = -sx;
    return {sx / scale_ + 0.5 * width_ - 0.5, sy / scale_ + 0.5 * height_ - 0.5};
  }

  bool nearest(int u, int v, int& su, int& sv) const {
    const Eigen::Vector2d s = source(u, v);
    su = static_cast<int>(std::floor(s.x() + 0.5));
    sv = static_cast<int>(std::floor(s.y() + 0.5));
    return su >= 0 && sv >= 0 && su < width_ && sv < height_;
  }

 private:
  int width_;
  int height_;
  double scale_;
  bool flip_;
  double cos_ = 1.0;
  double sin_ = 0.0;
  double tx_ = 0.0;
  double ty_ = 0.0;
};

Eigen::Vector3d transform_normal(const Eigen::Vector3d& n, const AugmentSpec& spec) {
  const double theta = spec.rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double nx = spec.flip_h ? -n.x() : n.x();
  return {c * nx - s * n.y(), s * nx + c * n.y(), n.z()};
}

}  // namespace

Sample apply(const Sample& in, const AugmentSpec& spec) {
  const int gw = in.depth.width();
  const int gh = in.depth.height();
  require_shape(gw, gh, in.normals.width(), in.normals.height(), "augment normals");
  require_shape(gw, gh, in.curvature.width(), in.curvature.height(), "augment curvature");
  const int rw = in.rgb.width();
  const int rh = in.rgb.height();
  if (rw <= 0 || rh <= 0 || gw <= 0 || gh <= 0) {
    throw std::invalid_argument("augment: empty sample");
  }
  if (static_cast<long long>(rw) * gh != static_cast<long long>(rh) * gw) {
    throw std::invalid_argument("augment: RGB and geometry aspect ratios differ");
  }

  Sample out;
  out.rgb = RgbImage(rw, rh);
  {
    const Warp warp(spec, rw, rh, 1.0);
    const auto pixel = [&](int x, int y) -> Eigen::Vector3d {
      if (x < 0 || y < 0 || x >= rw || y >= rh) return Eigen::Vector3d::Zero();
      return in.rgb.rgb(x, y);
    };
    for (int v = 0; v < rh; ++v) {
      for (int u = 0; u < rw; ++u) {
        const Eigen::Vector2d s = warp.source(u, v);
        if (s.x() <= -1.0 || s.y() <= -1.0 || s.x() >= rw || s.y() >= rh) continue;
        const int x0 = static_cast<int>(std::floor(s.x()));
        const int y0 = static_cast<int>(std::floor(s.y()));
        const double fx = s.x() - x0;
        const double fy = s.y() - y0;
        Eigen::Vector3d c = (1.0 - fy) * ((1.0 - fx) * pixel(x0, y0) + fx * pixel(x0 + 1, y0)) +
                            fy * ((1.0 - fx) * pixel(x0, y0 + 1) + fx * pixel(x0 + 1, y0 + 1));
        c = c.cwiseProduct(spec.color_scale);
        out.rgb.rgb(u, v) = c.cwiseMax(0.0).cwiseMin(1.0);
      }
    }
  }

  out.depth = DepthMap(gw, gh);
  out.normals = NormalMap(gw, gh);
  out.curvature = CurvatureMap(gw, gh);
  const Warp warp(spec, gw, gh, static_cast<double>(rw) / gw);
  for (int v = 0; v < gh; ++v) {
    for (int u = 0; u < gw; ++u) {
      int su = 0;
      int sv = 0;
      if (!warp.nearest(u, v, su, sv)) continue;
      if (in.depth.valid(su, sv)) {
        out.depth.depth(u, v) = in.depth.depth(su, sv);
        out.depth.valid(u, v) = 1;
      }
      if (in.normals.valid(su, sv)) {
        out.normals.normal(u, v) = transform_normal(in.normals.normal(su, sv), spec);
        out.normals.valid(u, v) = 1;
      }
      if (in.curvature.valid(su, sv)) {
        out.curvature.k1(u, v) = in.curvature.k1(su, sv);
        out.curvature.k2(u, v) = in.curvature.k2(su, sv);
        out.curvature.valid(u, v) = 1;
      }
    }
  }
  return out;
}

AugmentSpec random_spec(std::uint64_t seed, const AugmentRanges& ranges) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AugmentSpec spec;
  spec.seed = seed;
  spec.flip_h = unit(rng) < ranges.flip_probability;
  spec.rotation_deg = -ranges.max_rotation_deg + 2.0 * ranges.max_rotation_deg * unit(rng);
  std::uniform_int_distribution<int> shift(-ranges.max_translation_px, ranges.max_translation_px);
  spec.translate_x = shift(rng);
  spec.translate_y = shift(rng);
  for (int c = 0; c < 3; ++c) {
    spec.color_scale[c] = ranges.color_scale_min + (ranges.color_scale_max - ranges.color_scale_min) * unit(rng);
  }
  return spec;
}

}  // namespace curvkit::augment
