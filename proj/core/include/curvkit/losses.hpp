#pragma once

#include "curvkit/geom.hpp"

#include <vector>

namespace curvkit::losses {

/// Scalar loss plus its gradient with respect to every prediction channel.
/// Gradients are exactly zero at masked pixels.
struct LossResult {
  double value = 0.0;
  std::vector<Grid<double>> grad;
};

/// Scale-invariant log-depth loss with a gradient-matching term:
///   sum d^2 - (1 / 2n^2) (sum d)^2 + (1/n) sum ((dx d)^2 + (dy d)^2)
/// with d = pred - gt over the n valid pixels. Image gradients are forward
/// differences; a pair with an invalid member (or off the image) contributes 0.
/// Throws std::invalid_argument when fewer than two pixels are valid.
LossResult depth_loss(const Grid<double>& pred_log_depth, const Grid<double>& gt_log_depth, const Mask& mask);

/// Per pixel: -normalize(pred) . gt + |pred - gt|^2, summed over valid pixels.
/// `pred` holds three raw channels (x, y, z). A prediction shorter than 1e-12
/// drops the dot term (value and gradient) and keeps the Euclidean term.
LossResult normal_loss(const std::vector<Grid<double>>& pred, const NormalMap& gt, const Mask& mask);

/// Depth-weighted Euclidean curvature loss
///   sum w_i ((k1 - k1*)^2 + (k2 - k2*)^2),  w_i = (1 + D_i)^weight_exponent.
/// The default exponent -2 down-weights distant pixels; +2 gives the
/// up-weighting reading of the printed formula.
LossResult curvature_loss(const Grid<double>& pred_k1, const Grid<double>& pred_k2, const Grid<double>& gt_k1,
                          const Grid<double>& gt_k2, const Grid<double>& depth, const Mask& mask,
                          double weight_exponent = -2.0);

}  // namespace curvkit::losses
