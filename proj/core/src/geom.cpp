#include "curvkit/geom.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace curvkit {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("intrinsics: image size must be positive");
  }
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    throw std::invalid_argument("intrinsics: principal point must lie inside the image");
  }
}

CameraIntrinsics CameraIntrinsics::rescaled(int new_width, int new_height) const {
  if (new_width <= 0 || new_height <= 0) {
    throw std::invalid_argument("intrinsics: rescale target must be positive");
  }
  const double sx = static_cast<double>(new_width) / width;
  const double sy = static_cast<double>(new_height) / height;
  CameraIntrinsics out;
  out.fx = fx * sx;
  out.fy = fy * sy;
  // Half-pixel-centred mapping, matching resample_bicubic.
  out.cx = (cx + 0.5) * sx - 0.5;
  out.cy = (cy + 0.5) * sy - 0.5;
  out.width = new_width;
  out.height = new_height;
  return out;
}

DepthMap DepthMap::from_raw(Grid<double> raw) {
  DepthMap out;
  out.valid = Mask(raw.width(), raw.height(), 0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double d = raw[i];
    if (std::isfinite(d) && d > 0.0) {
      out.valid[i] = 1;
    } else {
      raw[i] = 0.0;
    }
  }
  out.depth = std::move(raw);
  return out;
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.values().begin(), valid.values().end(), std::uint8_t{1}));
}

void canonicalize_curvature(double& k1, double& k2) {
  if (k2 > k1) std::swap(k1, k2);
  k1 = std::clamp(k1, -kCurvatureBound, kCurvatureBound);
  k2 = std::clamp(k2, -kCurvatureBound, kCurvatureBound);
}

void require_shape(int width, int height, int other_width, int other_height, const std::string& what) {
  if (width != other_width || height != other_height) {
    throw std::invalid_argument(what + ": dimension mismatch (" + std::to_string(width) + "x" +
                                std::to_string(height) + " vs " + std::to_string(other_width) + "x" +
                                std::to_string(other_height) + ")");
  }
}

PointCloudGrid backproject(const DepthMap& depth, const CameraIntrinsics& intr) {
  require_shape(depth.width(), depth.height(), intr.width, intr.height, "backproject");
  require_shape(depth.width(), depth.height(), depth.valid.width(), depth.valid.height(), "backproject mask");
  PointCloudGrid cloud;
  cloud.points = Grid<Eigen::Vector3d>(depth.width(), depth.height(), Eigen::Vector3d::Zero());
  cloud.valid = Mask(depth.width(), depth.height(), 0);
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double z = depth.depth(u, v);
      if (!depth.valid(u, v) || !(z > 0.0)) continue;
      cloud.points(u, v) = intr.backproject(u, v, z);
      cloud.valid(u, v) = 1;
    }
  }
  return cloud;
}

namespace {

// One output coordinate's filter, expressed over real source indices.
struct AxisFilter {
  std::array<int, 4> support{};  // source indices touched (for the mask rule)
  int support_count = 0;
  std::array<int, 4> index{};
  std::array<double, 4> weight{};
  int count = 0;

  void add(int i, double w) {
    for (int k = 0; k < count; ++k) {
      if (index[k] == i) {
        weight[k] += w;
        return;
      }
    }
    index[count] = i;
    weight[count] = w;
    ++count;
  }
  void touch(int i) {
    for (int k = 0; k < support_count; ++k) {
      if (support[k] == i) return;
    }
    support[support_count++] = i;
  }
};

std::array<double, 4> catmull_rom_weights(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t),
          0.5 * (t3 - t2)};
}

std::vector<AxisFilter> build_axis_filters(int src_n, int dst_n) {
  std::vector<AxisFilter> filters(static_cast<std::size_t>(dst_n));
  const double scale = static_cast<double>(src_n) / dst_n;
  for (int o = 0; o < dst_n; ++o) {
    const double x = (o + 0.5) * scale - 0.5;
    const int base = static_cast<int>(std::floor(x));
    const auto w = catmull_rom_weights(x - base);
    AxisFilter& f = filters[static_cast<std::size_t>(o)];
    for (int k = 0; k < 4; ++k) {
      const int i = base - 1 + k;
      if (i < 0) {
        // p_i = p_0 + i * (p_1 - p_0)
        f.add(0, w[k] * (1.0 - i));
        f.add(1, w[k] * i);
        f.touch(0);
        f.touch(1);
      } else if (i >= src_n) {
        const int last = src_n - 1;
        const double s = i - last;
        f.add(last, w[k] * (1.0 + s));
        f.add(last - 1, -w[k] * s);
        f.touch(last);
        f.touch(last - 1);
      } else {
        f.add(i, w[k]);
        f.touch(i);
      }
    }
  }
  return filters;
}

}  // namespace

void resample_bicubic(const Grid<double>& src, const Mask& src_valid, int new_width, int new_height,
                      Grid<double>& dst, Mask& dst_valid) {
  if (new_width <= 0 || new_height <= 0) {
    throw std::invalid_argument("resample_bicubic: target size must be positive");
  }
  if (src.width() < 4 || src.height() < 4) {
    throw std::invalid_argument("resample_bicubic: source must be at least 4x4");
  }
  require_shape(src.width(), src.height(), src_valid.width(), src_valid.height(), "resample_bicubic mask");

  const auto fx = build_axis_filters(src.width(), new_width);
  const auto fy = build_axis_filters(src.height(), new_height);
  dst = Grid<double>(new_width, new_height, 0.0);
  dst_valid = Mask(new_width, new_height, 0);

  for (int v = 0; v < new_height; ++v) {
    const AxisFilter& ry = fy[static_cast<std::size_t>(v)];
    for (int u = 0; u < new_width; ++u) {
      const AxisFilter& rx = fx[static_cast<std::size_t>(u)];
      bool ok = true;
      for (int j = 0; j < ry.support_count && ok; ++j) {
        for (int i = 0; i < rx.support_count; ++i) {
          if (!src_valid(rx.support[i], ry.support[j])) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;
      double acc = 0.0;
      for (int j = 0; j < ry.count; ++j) {
        double row = 0.0;
        for (int i = 0; i < rx.count; ++i) {
          row += rx.weight[i] * src(rx.index[i], ry.index[j]);
        }
        acc += ry.weight[j] * row;
      }
      dst(u, v) = acc;
      dst_valid(u, v) = 1;
    }
  }
}

DepthMap resample_bicubic(const DepthMap& map, int new_width, int new_height) {
  DepthMap out;
  resample_bicubic(map.depth, map.valid, new_width, new_height, out.depth, out.valid);
  for (std::size_t i = 0; i < out.depth.size(); ++i) {
    if (out.valid[i] && !(out.depth[i] > 0.0)) {
      out.valid[i] = 0;
    }
    if (!out.valid[i]) out.depth[i] = 0.0;
  }
  return out;
}

namespace {

Grid<double> channel(const Grid<Eigen::Vector3d>& g, int c) {
  Grid<double> out(g.width(), g.height(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i][c];
  return out;
}

}  // namespace

NormalMap resample_bicubic(const NormalMap& map, int new_width, int new_height) {
  NormalMap out(new_width, new_height);
  std::array<Grid<double>, 3> ch;
  Mask m;
  for (int c = 0; c < 3; ++c) {
    resample_bicubic(channel(map.normal, c), map.valid, new_width, new_height, ch[static_cast<std::size_t>(c)], m);
  }
  out.valid = m;
  for (std::size_t i = 0; i < out.normal.size(); ++i) {
    if (!out.valid[i]) continue;
    Eigen::Vector3d n(ch[0][i], ch[1][i], ch[2][i]);
    const double len = n.norm();
    if (len < 1e-12) {
      out.valid[i] = 0;
      continue;
    }
    out.normal[i] = n / len;
  }
  return out;
}

CurvatureMap resample_bicubic(const CurvatureMap& map, int new_width, int new_height) {
  CurvatureMap out;
  Mask m2;
  resample_bicubic(map.k1, map.valid, new_width, new_height, out.k1, out.valid);
  resample_bicubic(map.k2, map.valid, new_width, new_height, out.k2, m2);
  for (std::size_t i = 0; i < out.k1.size(); ++i) {
    if (out.valid[i]) {
      canonicalize_curvature(out.k1[i], out.k2[i]);
    } else {
      out.k1[i] = 0.0;
      out.k2[i] = 0.0;
    }
  }
  return out;
}

RgbImage resample_bicubic(const RgbImage& image, int new_width, int new_height) {
  RgbImage out(new_width, new_height);
  const Mask all(image.width(), image.height(), 1);
  Mask m;
  for (int c = 0; c < 3; ++c) {
    Grid<double> ch;
    resample_bicubic(channel(image.rgb, c), all, new_width, new_height, ch, m);
    for (std::size_t i = 0; i < ch.size(); ++i) out.rgb[i][c] = std::clamp(ch[i], 0.0, 1.0);
  }
  return out;
}

}  // namespace curvkit
