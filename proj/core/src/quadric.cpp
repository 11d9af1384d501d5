#include "curvkit/quadric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace curvkit::quadric {

PatchSpec PatchSpec::rings(double radius_px, int min_samples) {
  if (!(radius_px > 0.0)) {
    throw std::invalid_argument("PatchSpec: radius must be positive");
  }
  PatchSpec spec;
  spec.radius_px = radius_px;
  spec.min_samples = min_samples;
  spec.sample_offsets.push_back({0, 0});
  const std::array<int, 4> counts{8, 12, 16, 20};
  const double r2 = radius_px * radius_px;
  for (int ring = 0; ring < 4; ++ring) {
    const double r = radius_px * (ring + 1) / 4.0;
    const int n = counts[static_cast<std::size_t>(ring)];
    for (int k = 0; k < n; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / n;
      const double x = r * std::cos(theta);
      const double y = r * std::sin(theta);
      PixelOffset o{static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))};
      if (o.du * o.du + o.dv * o.dv > r2) {
        o = {static_cast<int>(std::trunc(x)), static_cast<int>(std::trunc(y))};
      }
      spec.sample_offsets.push_back(o);
    }
  }
  spec.validate();
  return spec;
}

void PatchSpec::validate() const {
  if (!(radius_px > 0.0)) throw std::invalid_argument("PatchSpec: radius must be positive");
  if (min_samples < 6) throw std::invalid_argument("PatchSpec: min_samples must be at least 6");
  const double r2 = radius_px * radius_px;
  for (const auto& o : sample_offsets) {
    if (o.du * o.du + o.dv * o.dv > r2) {
      throw std::invalid_argument("PatchSpec: offset outside the patch radius");
    }
  }
}

namespace {

constexpr double kRankTolerance = 1e-12;

Eigen::Matrix3d tangent_frame(const Eigen::Vector3d& n0) {
  const Eigen::Vector3d seed = std::abs(n0.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d t1 = (seed - seed.dot(n0) * n0).normalized();
  const Eigen::Vector3d t2 = n0.cross(t1);
  Eigen::Matrix3d frame;
  frame.col(0) = t1;
  frame.col(1) = t2;
  frame.col(2) = n0;
  return frame;
}

}  // namespace

std::optional<LocalQuadric> fit_patch(const PointCloudGrid& points, int u, int v, const PatchSpec& spec) {
  if (!points.points.contains(u, v) || !points.valid(u, v)) return std::nullopt;

  const std::size_t max_samples = spec.sample_offsets.size() + 1;
  Eigen::Matrix<double, Eigen::Dynamic, 3> samples(static_cast<Eigen::Index>(max_samples), 3);
  Eigen::Index n = 0;
  bool centre_listed = false;
  for (const auto& o : spec.sample_offsets) {
    const int su = u + o.du;
    const int sv = v + o.dv;
    if (o.du == 0 && o.dv == 0) centre_listed = true;
    if (!points.points.contains(su, sv) || !points.valid(su, sv)) continue;
    samples.row(n++) = points.points(su, sv).transpose();
  }
  if (!centre_listed) samples.row(n++) = points.points(u, v).transpose();
  if (n < spec.min_samples) return std::nullopt;
  samples.conservativeResize(n, 3);

  // Pass 1: plane through the centroid.
  const Eigen::RowVector3d centroid = samples.colwise().mean();
  const Eigen::MatrixX3d centred = samples.rowwise() - centroid;
  const Eigen::Matrix3d cov = centred.transpose() * centred / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Eigen::Vector3d n0 = eig.eigenvectors().col(0);
  const Eigen::Vector3d& centre = points.points(u, v);
  if (n0.dot(centre) > 0.0) n0 = -n0;

  LocalQuadric q;
  q.origin = centre;
  q.frame = tangent_frame(n0);
  q.sample_count = static_cast<int>(n);

  // Pass 2: height field over the tangent plane.
  Eigen::MatrixX3d local = (samples.rowwise() - centre.transpose()) * q.frame;
  const double extent = std::max(local.col(0).cwiseAbs().maxCoeff(), local.col(1).cwiseAbs().maxCoeff());
  if (!(extent > 0.0)) return std::nullopt;
  const double inv = 1.0 / extent;

  Eigen::Matrix<double, Eigen::Dynamic, 6> design(n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double su = local(i, 0) * inv;
    const double sv = local(i, 1) * inv;
    design(i, 0) = su * su;
    design(i, 1) = su * sv;
    design(i, 2) = sv * sv;
    design(i, 3) = su;
    design(i, 4) = sv;
    design(i, 5) = 1.0;
  }
  const Eigen::VectorXd heights = local.col(2);

  Eigen::HouseholderQR<Eigen::Matrix<double, Eigen::Dynamic, 6>> qr(design);
  const Eigen::Matrix<double, 6, 6> r = qr.matrixQR().topRows<6>().triangularView<Eigen::Upper>();
  const Eigen::Matrix<double, 6, 1> sv = Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>>(r).singularValues();
  if (!(sv(5) > kRankTolerance * sv(0))) return std::nullopt;

  const Eigen::Matrix<double, 6, 1> scaled = qr.solve(heights);
  const double inv2 = inv * inv;
  q.coeffs = {scaled(0) * inv2, scaled(1) * inv2, scaled(2) * inv2, scaled(3) * inv, scaled(4) * inv, scaled(5)};
  q.residual_rms = std::sqrt((design * scaled - heights).squaredNorm() / static_cast<double>(n));
  return q;
}

Eigen::Vector3d normal_from_quadric(const LocalQuadric& q) {
  const Eigen::Vector3d local(-q.d(), -q.e(), 1.0);
  Eigen::Vector3d n = (q.frame * local).normalized();
  if (n.dot(q.origin) > 0.0) n = -n;
  return n;
}

std::pair<double, double> curvature_from_quadric(const LocalQuadric& q) {
  const double d = q.d();
  const double e = q.e();
  Eigen::Matrix2d first;
  first << 1.0 + d * d, d * e, d * e, 1.0 + e * e;
  Eigen::Matrix2d second;
  second << 2.0 * q.a(), q.b(), q.b(), 2.0 * q.c();
  second /= std::sqrt(1.0 + d * d + e * e);
  const Eigen::Matrix2d shape = first.inverse() * second;

  // Real eigenvalues: `shape` is similar to a symmetric matrix.
  const double half_trace = 0.5 * shape.trace();
  const double disc = std::max(0.0, half_trace * half_trace - shape.determinant());
  const double root = std::sqrt(disc);
  // The local w axis faces the camera; a surface bulging toward the camera
  // bends away from it, so convex-toward-camera has negative eigenvalues.
  double k1 = -(half_trace - root);
  double k2 = -(half_trace + root);
  canonicalize_curvature(k1, k2);
  return {k1, k2};
}

DenseGeometry dense_geometry(const DepthMap& depth, const CameraIntrinsics& intr, const PatchSpec& spec) {
  intr.validate();
  spec.validate();
  const PointCloudGrid cloud = backproject(depth, intr);
  DenseGeometry out{NormalMap(depth.width(), depth.height()), CurvatureMap(depth.width(), depth.height())};
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      if (!cloud.valid(u, v)) continue;
      const auto q = fit_patch(cloud, u, v, spec);
      if (!q) continue;
      const Eigen::Vector3d n = normal_from_quadric(*q);
      const auto [k1, k2] = curvature_from_quadric(*q);
      if (!n.allFinite() || !std::isfinite(k1) || !std::isfinite(k2)) continue;
      out.normals.normal(u, v) = n;
      out.normals.valid(u, v) = 1;
      out.curvature.k1(u, v) = k1;
      out.curvature.k2(u, v) = k2;
      out.curvature.valid(u, v) = 1;
    }
  }
  return out;
}

}  // namespace curvkit::quadric
