#include "curvkit/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace curvkit::losses {

LossResult depth_loss(const Grid<double>& pred, const Grid<double>& gt, const Mask& mask) {
  const int w = pred.width();
  const int h = pred.height();
  require_shape(w, h, gt.width(), gt.height(), "depth_loss gt");
  require_shape(w, h, mask.width(), mask.height(), "depth_loss mask");

  Grid<double> d(w, h, 0.0);
  std::size_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!mask[i]) continue;
    d[i] = pred[i] - gt[i];
    sum += d[i];
    sum_sq += d[i] * d[i];
    ++n;
  }
  if (n < 2) throw std::invalid_argument("depth_loss: need at least two valid pixels");
  const double nn = static_cast<double>(n);

  LossResult r;
  r.grad.emplace_back(w, h, 0.0);
  Grid<double>& g = r.grad.front();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (mask[i]) g[i] = 2.0 * d[i] - sum / (nn * nn);
  }

  double grad_term = 0.0;
  const double inv_n = 1.0 / nn;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!mask(u, v)) continue;
      if (u + 1 < w && mask(u + 1, v)) {
        const double gx = d(u + 1, v) - d(u, v);
        grad_term += gx * gx;
        g(u + 1, v) += 2.0 * inv_n * gx;
        g(u, v) -= 2.0 * inv_n * gx;
      }
      if (v + 1 < h && mask(u, v + 1)) {
        const double gy = d(u, v + 1) - d(u, v);
        grad_term += gy * gy;
        g(u, v + 1) += 2.0 * inv_n * gy;
        g(u, v) -= 2.0 * inv_n * gy;
      }
    }
  }
  r.value = sum_sq - sum * sum / (2.0 * nn * nn) + grad_term * inv_n;
  return r;
}

LossResult normal_loss(const std::vector<Grid<double>>& pred, const NormalMap& gt, const Mask& mask) {
  if (pred.size() != 3) throw std::invalid_argument("normal_loss: prediction needs three channels");
  const int w = gt.width();
  const int h = gt.height();
  for (const auto& c : pred) require_shape(w, h, c.width(), c.height(), "normal_loss prediction");
  require_shape(w, h, mask.width(), mask.height(), "normal_loss mask");

  LossResult r;
  for (int c = 0; c < 3; ++c) r.grad.emplace_back(w, h, 0.0);
  for (std::size_t i = 0; i < gt.normal.size(); ++i) {
    if (!mask[i]) continue;
    const Eigen::Vector3d p(pred[0][i], pred[1][i], pred[2][i]);
    const Eigen::Vector3d& g = gt.normal[i];
    const Eigen::Vector3d diff = p - g;
    double value = diff.squaredNorm();
    Eigen::Vector3d grad = 2.0 * diff;
    const double len = p.norm();
    if (len >= 1e-12) {
      const Eigen::Vector3d unit = p / len;
      const double dot = unit.dot(g);
      value -= dot;
      grad -= (g - dot * unit) / len;
    }
    r.value += value;
    for (int c = 0; c < 3; ++c) r.grad[static_cast<std::size_t>(c)][i] = grad[c];
  }
  return r;
}

LossResult curvature_loss(const Grid<double>& pred_k1, const Grid<double>& pred_k2, const Grid<double>& gt_k1,
                          const Grid<double>& gt_k2, const Grid<double>& depth, const Mask& mask,
                          double weight_exponent) {
  const int w = pred_k1.width();
  const int h = pred_k1.height();
  require_shape(w, h, pred_k2.width(), pred_k2.height(), "curvature_loss pred k2");
  require_shape(w, h, gt_k1.width(), gt_k1.height(), "curvature_loss gt k1");
  require_shape(w, h, gt_k2.width(), gt_k2.height(), "curvature_loss gt k2");
  require_shape(w, h, depth.width(), depth.height(), "curvature_loss depth");
  require_shape(w, h, mask.width(), mask.height(), "curvature_loss mask");

  LossResult r;
  r.grad.emplace_back(w, h, 0.0);
  r.grad.emplace_back(w, h, 0.0);
  for (std::size_t i = 0; i < pred_k1.size(); ++i) {
    if (!mask[i]) continue;
    const double weight = std::pow(1.0 + depth[i], weight_exponent);
    const double e1 = pred_k1[i] - gt_k1[i];
    const double e2 = pred_k2[i] - gt_k2[i];
    r.value += weight * (e1 * e1 + e2 * e2);
    r.grad[0][i] = 2.0 * weight * e1;
    r.grad[1][i] = 2.0 * weight * e2;
  }
  return r;
}

}  // namespace curvkit::losses
