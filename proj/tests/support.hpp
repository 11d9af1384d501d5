#pragma once

#include "curvkit/geom.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace curvkit::testing {

inline Grid<double> random_grid(int w, int h, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Grid<double> g(w, h);
  for (auto& x : g.values()) x = dist(rng);
  return g;
}

/// Each pixel valid with probability `p`.
inline Mask random_mask(int w, int h, std::mt19937_64& rng, double p = 0.8) {
  std::bernoulli_distribution coin(p);
  Mask m(w, h);
  for (auto& x : m.values()) x = coin(rng) ? 1 : 0;
  return m;
}

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-3);
  return v.normalized();
}

/// Unit vector facing the camera (negative z).
inline Eigen::Vector3d random_facing_unit(std::mt19937_64& rng) {
  Eigen::Vector3d v = random_unit(rng);
  if (v.z() > 0.0) v.z() = -v.z();
  if (v.z() > -0.05) v.z() = -0.05;
  return v.normalized();
}

inline double angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0);
  return std::acos(c) * 180.0 / 3.14159265358979323846;
}

inline double rel_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

/// max(2%, 0.05 m^-1) around the analytic value.
inline double curvature_tolerance(double analytic) { return std::max(0.02 * std::abs(analytic), 0.05); }

/// Central difference of `f` with respect to `x`, restoring `x` afterwards.
inline double central_difference(const std::function<double()>& f, double& x, double h = 1e-5) {
  const double x0 = x;
  x = x0 + h;
  const double fp = f();
  x = x0 - h;
  const double fm = f();
  x = x0;
  return (fp - fm) / (2.0 * h);
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_vector_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

}  // namespace curvkit::testing
