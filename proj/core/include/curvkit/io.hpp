#pragma once

#include "curvkit/augment.hpp"
#include "curvkit/geom.hpp"
#include "curvkit/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvkit::io {

inline constexpr int kManifestVersion = 1;

/// Raised for malformed or unreadable files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interleaved float raster, top row first. 1 or 3 channels.
struct FloatImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  float& at(int u, int v, int c) {
    return data[(static_cast<std::size_t>(v) * width + u) * channels + c];
  }
  float at(int u, int v, int c) const {
    return data[(static_cast<std::size_t>(v) * width + u) * channels + c];
  }
};

/// Portable Float Map. "Pf" for one channel, "PF" for three. Written
/// little-endian (scale -1.0); big-endian input (positive scale) is byte-swapped
/// on read. Scanlines are stored bottom-to-top as the format requires.
FloatImage read_pfm(const std::filesystem::path& path);
void write_pfm(const FloatImage& image, const std::filesystem::path& path);

FloatImage decode_pfm(const std::string& bytes);
std::string encode_pfm(const FloatImage& image);

// NaN marks an invalid pixel in every conversion below.
FloatImage to_float_image(const DepthMap& depth);
FloatImage to_float_image(const NormalMap& normals);
/// Channels (k1, k2, 0).
FloatImage to_float_image(const CurvatureMap& curvature);
FloatImage to_float_image(const RgbImage& rgb);
FloatImage to_float_image(const Grid<double>& values, const Mask* mask = nullptr);

DepthMap depth_from_float_image(const FloatImage& image);
NormalMap normals_from_float_image(const FloatImage& image);
CurvatureMap curvature_from_float_image(const FloatImage& image);
RgbImage rgb_from_float_image(const FloatImage& image);
Mask mask_from_float_image(const FloatImage& image);

/// 8-bit PNG. Grey images are expanded to RGB on read.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& image, const std::filesystem::path& path);
/// Writes 0 / 255 greyscale.
void write_mask_png(const Grid<std::uint8_t>& mask, const std::filesystem::path& path);

/// Binary PPM (P6), 8-bit.
RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);

/// PNG or PPM chosen by extension.
RgbImage read_rgb(const std::filesystem::path& path);
void write_rgb(const RgbImage& image, const std::filesystem::path& path);

/// Key-value text: fx=..., fy=..., cx=..., cy=..., width=..., height=...
/// '#' starts a comment. Missing width/height default to 640x480.
CameraIntrinsics read_intrinsics(const std::filesystem::path& path);
CameraIntrinsics parse_intrinsics(const std::string& text);
std::string format_intrinsics(const CameraIntrinsics& intr);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string id;
  std::map<std::string, std::string> paths;  // channel -> path relative to the manifest
  double curvature_scale = synth::kCurvatureStorageScale;
  std::optional<augment::AugmentSpec> augmentation;
  std::uint64_t seed = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&);
};

struct Manifest {
  int version = kManifestVersion;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  int scenes = 0;
  std::vector<ManifestEntry> entries;

  friend bool operator==(const Manifest&, const Manifest&);
};

/// JSON lines: a header object, then one object per sample.
std::string format_manifest(const Manifest& manifest);
Manifest parse_manifest(const std::string& text);
/// `check_files` verifies every referenced file exists relative to `path`'s directory.
Manifest read_manifest(const std::filesystem::path& path, bool check_files = true);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.jsonl";

/// Writes RGB as PNG and geometry as PFM next to a manifest.
Manifest save_dataset(const std::vector<synth::TrainingSample>& samples, const std::filesystem::path& dir,
                      std::uint64_t seed, double noise_sigma, int scenes);
std::vector<synth::TrainingSample> load_dataset(const std::filesystem::path& dir);

}  // namespace curvkit::io
