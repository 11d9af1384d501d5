#include "curvkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace curvkit::metrics {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

DepthMetrics eval_depth(const DepthMap& pred, const DepthMap& gt, const Mask& mask) {
  require_shape(gt.width(), gt.height(), pred.width(), pred.height(), "eval_depth");
  require_shape(gt.width(), gt.height(), mask.width(), mask.height(), "eval_depth mask");
  DepthMetrics m;
  double abs_rel = 0.0;
  double sq = 0.0;
  double sq_log = 0.0;
  std::array<std::size_t, 3> hits{};
  const std::array<double, 3> bounds{kDeltaBase, kDeltaBase * kDeltaBase, kDeltaBase * kDeltaBase * kDeltaBase};
  for (std::size_t i = 0; i < gt.depth.size(); ++i) {
    if (!mask[i] || !gt.valid[i] || !pred.valid[i]) continue;
    const double p = pred.depth[i];
    const double g = gt.depth[i];
    if (!(p > 0.0) || !(g > 0.0)) continue;
    abs_rel += std::abs(p - g) / g;
    sq += (p - g) * (p - g);
    const double dl = std::log(p) - std::log(g);
    sq_log += dl * dl;
    const double ratio = std::max(p / g, g / p);
    for (std::size_t k = 0; k < 3; ++k) {
      if (ratio < bounds[k]) ++hits[k];
    }
    ++m.count;
  }
  if (m.count == 0) throw std::invalid_argument("eval_depth: empty mask");
  const double n = static_cast<double>(m.count);
  m.rel_abs = abs_rel / n;
  m.rms_lin = std::sqrt(sq / n);
  m.rms_log = std::sqrt(sq_log / n);
  m.delta1 = static_cast<double>(hits[0]) / n;
  m.delta2 = static_cast<double>(hits[1]) / n;
  m.delta3 = static_cast<double>(hits[2]) / n;
  return m;
}

NormalMetrics eval_normals(const NormalMap& pred, const NormalMap& gt, const Mask& mask) {
  require_shape(gt.width(), gt.height(), pred.width(), pred.height(), "eval_normals");
  require_shape(gt.width(), gt.height(), mask.width(), mask.height(), "eval_normals mask");
  std::vector<double> angles;
  angles.reserve(gt.normal.size());
  for (std::size_t i = 0; i < gt.normal.size(); ++i) {
    if (!mask[i] || !gt.valid[i] || !pred.valid[i]) continue;
    const double len = pred.normal[i].norm();
    if (!(len > 0.0)) continue;
    const double cosine = std::clamp(pred.normal[i].dot(gt.normal[i].normalized()) / len, -1.0, 1.0);
    angles.push_back(std::acos(cosine) * 180.0 / std::numbers::pi);
  }
  if (angles.empty()) throw std::invalid_argument("eval_normals: empty mask");
  NormalMetrics m;
  m.count = angles.size();
  const double n = static_cast<double>(m.count);
  std::array<std::size_t, 3> hits{};
  double sum = 0.0;
  for (const double a : angles) {
    sum += a;
    for (std::size_t k = 0; k < 3; ++k) {
      if (a < kAngleThresholdsDeg[k]) ++hits[k];
    }
  }
  m.mean_deg = sum / n;
  m.median_deg = median(std::move(angles));
  m.within_11_25 = static_cast<double>(hits[0]) / n;
  m.within_22_5 = static_cast<double>(hits[1]) / n;
  m.within_30 = static_cast<double>(hits[2]) / n;
  return m;
}

CurvatureMetrics eval_curvature(const CurvatureMap& pred, const CurvatureMap& gt, const Mask& mask,
                                CurvatureThresholdMode mode) {
  require_shape(gt.width(), gt.height(), pred.width(), pred.height(), "eval_curvature");
  require_shape(gt.width(), gt.height(), mask.width(), mask.height(), "eval_curvature mask");
  CurvatureMetrics m;
  double sq1 = 0.0;
  double sq2 = 0.0;
  std::array<std::size_t, 3> hits{};
  std::vector<double> planar;
  std::vector<double> nonplanar;
  for (std::size_t i = 0; i < gt.k1.size(); ++i) {
    if (!mask[i] || !gt.valid[i] || !pred.valid[i]) continue;
    const double e1 = pred.k1[i] - gt.k1[i];
    const double e2 = pred.k2[i] - gt.k2[i];
    sq1 += e1 * e1;
    sq2 += e2 * e2;
    const double gt_mean = 0.5 * (gt.k1[i] + gt.k2[i]);
    const double mean_err = std::abs(0.5 * (pred.k1[i] + pred.k2[i]) - gt_mean);
    (std::abs(gt_mean) < kPlanarMeanCurvature ? planar : nonplanar).push_back(mean_err);
    const double e = mode == CurvatureThresholdMode::kMeanCurvature ? mean_err : std::max(std::abs(e1), std::abs(e2));
    for (std::size_t k = 0; k < 3; ++k) {
      if (e < kCurvatureThresholds[k]) ++hits[k];
    }
    ++m.count;
  }
  if (m.count == 0) throw std::invalid_argument("eval_curvature: empty mask");
  const double n = static_cast<double>(m.count);
  m.rms_k1 = std::sqrt(sq1 / n);
  m.rms_k2 = std::sqrt(sq2 / n);
  if (!planar.empty()) m.median_planar = median(std::move(planar));
  if (!nonplanar.empty()) m.median_nonplanar = median(std::move(nonplanar));
  m.within_s1 = static_cast<double>(hits[0]) / n;
  m.within_s2 = static_cast<double>(hits[1]) / n;
  m.within_s3 = static_cast<double>(hits[2]) / n;
  return m;
}

CurvatureMap curvature_from_predicted_depth(const DepthMap& pred_depth, const CameraIntrinsics& intr,
                                            const quadric::PatchSpec& spec) {
  return quadric::dense_geometry(pred_depth, intr, spec).curvature;
}

}  // namespace curvkit::metrics
