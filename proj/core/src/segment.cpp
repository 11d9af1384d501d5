#include "curvkit/segment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace curvkit::segment {

void BorderWeights::validate() const {
  if (!(w_intensity >= 0.0) || !(w_depth >= 0.0) || !(w_curvature >= 0.0)) {
    throw std::invalid_argument("BorderWeights: weights must be non-negative");
  }
  if (!(w_intensity > 0.0 || w_depth > 0.0 || w_curvature > 0.0)) {
    throw std::invalid_argument("BorderWeights: at least one weight must be positive");
  }
}

double luminance(const Eigen::Vector3d& rgb) { return 0.2126 * rgb.x() + 0.7152 * rgb.y() + 0.0722 * rgb.z(); }

namespace {

double reduce(double k1, double k2, CurvatureReduction r) {
  switch (r) {
    case CurvatureReduction::kMeanAbs: return 0.5 * (std::abs(k1) + std::abs(k2));
    case CurvatureReduction::kMaxAbs: return std::max(std::abs(k1), std::abs(k2));
    case CurvatureReduction::kAbsMean: return std::abs(0.5 * (k1 + k2));
  }
  return 0.0;
}

}  // namespace

Grid<double> border_function(const RgbImage& rgb, const DepthMap& depth, const CurvatureMap& curv,
                             const BorderWeights& w, CurvatureReduction reduction) {
  w.validate();
  const int width = rgb.width();
  const int height = rgb.height();
  require_shape(width, height, depth.width(), depth.height(), "border_function depth");
  require_shape(width, height, curv.width(), curv.height(), "border_function curvature");

  Grid<double> intensity(width, height, 0.0);
  for (std::size_t i = 0; i < intensity.size(); ++i) intensity[i] = luminance(rgb.rgb[i]);

  Grid<double> b(width, height, 0.0);
  for (int v = 0; v < height; ++v) {
    const int vp = std::min(v + 1, height - 1);
    const int vm = std::max(v - 1, 0);
    for (int u = 0; u < width; ++u) {
      const int up = std::min(u + 1, width - 1);
      const int um = std::max(u - 1, 0);
      const double iu = 0.5 * (intensity(up, v) - intensity(um, v));
      const double iv = 0.5 * (intensity(u, vp) - intensity(u, vm));
      double value = w.w_intensity * std::sqrt(iu * iu + iv * iv);

      if (depth.valid(u, v)) {
        const double c = depth.depth(u, v);
        const auto sample = [&](int x, int y) { return depth.valid(x, y) ? depth.depth(x, y) : c; };
        const double du = 0.5 * (sample(up, v) - sample(um, v));
        const double dv = 0.5 * (sample(u, vp) - sample(u, vm));
        value += w.w_depth * std::sqrt(du * du + dv * dv);
      }
      if (curv.valid(u, v)) {
        value += w.w_curvature * reduce(curv.k1(u, v), curv.k2(u, v), reduction);
      }
      b(u, v) = value;
    }
  }
  return b;
}

BorderMap threshold(const Grid<double>& b, double delta_thresh) {
  BorderMap out(b.width(), b.height(), 0);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = b[i] >= delta_thresh ? 1 : 0;
  return out;
}

BorderMap segment_scene(const SceneMaps& maps, Source depth_source, Source curvature_source, const BorderWeights& w,
                        CurvatureReduction reduction) {
  const DepthMap* depth = &maps.gt_depth;
  if (depth_source == Source::kPredicted) {
    if (!maps.pred_depth) throw std::invalid_argument("segment_scene: predicted depth requested but absent");
    depth = &*maps.pred_depth;
  }
  const CurvatureMap* curv = &maps.gt_curvature;
  if (curvature_source == Source::kPredicted) {
    if (!maps.pred_curvature) throw std::invalid_argument("segment_scene: predicted curvature requested but absent");
    curv = &*maps.pred_curvature;
  }
  return threshold(border_function(maps.rgb, *depth, *curv, w, reduction), w.delta_thresh);
}

}  // namespace curvkit::segment
