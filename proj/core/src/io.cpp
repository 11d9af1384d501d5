#include "curvkit/io.hpp"

#include <png.h>

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace curvkit::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

// --- PFM ---------------------------------------------------------------------

namespace {

std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0x0000FF00u) | ((x << 8) & 0x00FF0000u) | (x << 24);
}

// Reads one whitespace-delimited token starting at `pos`.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

int parse_dim(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0 || v > (1 << 20)) throw FormatError("");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw FormatError(std::string("PFM: bad ") + what + " '" + tok + "'");
  }
}

}  // namespace

FloatImage decode_pfm(const std::string& bytes) {
  std::size_t pos = 0;
  const std::string magic = next_token(bytes, pos);
  FloatImage img;
  if (magic == "Pf") {
    img.channels = 1;
  } else if (magic == "PF") {
    img.channels = 3;
  } else {
    throw FormatError("PFM: bad magic '" + magic.substr(0, 8) + "'");
  }
  img.width = parse_dim(next_token(bytes, pos), "width");
  img.height = parse_dim(next_token(bytes, pos), "height");
  const std::string scale_tok = next_token(bytes, pos);
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_tok, &used);
    if (used != scale_tok.size()) throw FormatError("");
  } catch (const std::exception&) {
    throw FormatError("PFM: bad scale '" + scale_tok + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw FormatError("PFM: scale must be non-zero");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("PFM: header not terminated");
  }
  ++pos;  // single whitespace byte before the payload
  const bool big_endian = scale > 0.0;
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height * img.channels;
  if (bytes.size() - pos < count * 4) {
    throw FormatError("PFM: truncated payload (" + std::to_string(bytes.size() - pos) + " of " +
                      std::to_string(count * 4) + " bytes)");
  }
  img.data.resize(count);
  const bool swap = big_endian != (std::endian::native == std::endian::big);
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  for (int r = 0; r < img.height; ++r) {
    // File row r is image row height-1-r.
    const std::size_t dst = static_cast<std::size_t>(img.height - 1 - r) * row;
    for (std::size_t k = 0; k < row; ++k) {
      std::uint32_t word = 0;
      std::memcpy(&word, bytes.data() + pos + (static_cast<std::size_t>(r) * row + k) * 4, 4);
      if (swap) word = byteswap32(word);
      img.data[dst + k] = std::bit_cast<float>(word);
    }
  }
  return img;
}

std::string encode_pfm(const FloatImage& img) {
  if (img.channels != 1 && img.channels != 3) throw FormatError("PFM: only 1 or 3 channels");
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  if (img.data.size() != row * img.height) throw FormatError("PFM: data size does not match dimensions");
  std::string out = (img.channels == 1 ? "Pf\n" : "PF\n") + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + img.data.size() * 4);
  const bool swap = std::endian::native == std::endian::big;
  for (int r = 0; r < img.height; ++r) {
    const std::size_t src = static_cast<std::size_t>(img.height - 1 - r) * row;
    for (std::size_t k = 0; k < row; ++k) {
      std::uint32_t word = std::bit_cast<std::uint32_t>(img.data[src + k]);
      if (swap) word = byteswap32(word);
      std::memcpy(out.data() + header + (static_cast<std::size_t>(r) * row + k) * 4, &word, 4);
    }
  }
  return out;
}

FloatImage read_pfm(const fs::path& path) {
  try {
    return decode_pfm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_pfm(const FloatImage& image, const fs::path& path) { write_file_atomic(path, encode_pfm(image)); }

namespace {

constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

FloatImage blank(int w, int h, int c) {
  FloatImage img;
  img.width = w;
  img.height = h;
  img.channels = c;
  img.data.assign(static_cast<std::size_t>(w) * h * c, kNaN);
  return img;
}

void require_channels(const FloatImage& img, int c, const char* what) {
  if (img.channels != c) {
    throw FormatError(std::string(what) + ": expected " + std::to_string(c) + " channel(s), got " +
                      std::to_string(img.channels));
  }
}

}  // namespace

FloatImage to_float_image(const Grid<double>& values, const Mask* mask) {
  FloatImage img = blank(values.width(), values.height(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask == nullptr || (*mask)[i]) img.data[i] = static_cast<float>(values[i]);
  }
  return img;
}

FloatImage to_float_image(const DepthMap& depth) { return to_float_image(depth.depth, &depth.valid); }

FloatImage to_float_image(const NormalMap& normals) {
  FloatImage img = blank(normals.width(), normals.height(), 3);
  for (std::size_t i = 0; i < normals.normal.size(); ++i) {
    if (!normals.valid[i]) continue;
    for (int c = 0; c < 3; ++c) img.data[i * 3 + c] = static_cast<float>(normals.normal[i][c]);
  }
  return img;
}

FloatImage to_float_image(const CurvatureMap& curv) {
  FloatImage img = blank(curv.width(), curv.height(), 3);
  for (std::size_t i = 0; i < curv.k1.size(); ++i) {
    if (!curv.valid[i]) continue;
    img.data[i * 3] = static_cast<float>(curv.k1[i]);
    img.data[i * 3 + 1] = static_cast<float>(curv.k2[i]);
    img.data[i * 3 + 2] = 0.0f;
  }
  return img;
}

FloatImage to_float_image(const RgbImage& rgb) {
  FloatImage img = blank(rgb.width(), rgb.height(), 3);
  for (std::size_t i = 0; i < rgb.rgb.size(); ++i) {
    for (int c = 0; c < 3; ++c) img.data[i * 3 + c] = static_cast<float>(rgb.rgb[i][c]);
  }
  return img;
}

DepthMap depth_from_float_image(const FloatImage& img) {
  require_channels(img, 1, "depth");
  Grid<double> raw(img.width, img.height, 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = img.data[i];
  return DepthMap::from_raw(std::move(raw));
}

NormalMap normals_from_float_image(const FloatImage& img) {
  require_channels(img, 3, "normals");
  NormalMap out(img.width, img.height);
  for (std::size_t i = 0; i < out.normal.size(); ++i) {
    const Eigen::Vector3d n(img.data[i * 3], img.data[i * 3 + 1], img.data[i * 3 + 2]);
    if (!n.allFinite() || n.norm() < 1e-12) continue;
    out.normal[i] = n.normalized();
    out.valid[i] = 1;
  }
  return out;
}

CurvatureMap curvature_from_float_image(const FloatImage& img) {
  if (img.channels != 1 && img.channels != 3) throw FormatError("curvature: expected 3 channels");
  require_channels(img, 3, "curvature");
  CurvatureMap out(img.width, img.height);
  for (std::size_t i = 0; i < out.k1.size(); ++i) {
    const double k1 = img.data[i * 3];
    const double k2 = img.data[i * 3 + 1];
    if (!std::isfinite(k1) || !std::isfinite(k2)) continue;
    out.k1[i] = k1;
    out.k2[i] = k2;
    out.valid[i] = 1;
  }
  return out;
}

RgbImage rgb_from_float_image(const FloatImage& img) {
  require_channels(img, 3, "rgb");
  RgbImage out(img.width, img.height);
  for (std::size_t i = 0; i < out.rgb.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double x = img.data[i * 3 + c];
      out.rgb[i][c] = std::isfinite(x) ? std::clamp(x, 0.0, 1.0) : 0.0;
    }
  }
  return out;
}

Mask mask_from_float_image(const FloatImage& img) {
  Mask m(img.width, img.height, 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    bool ok = true;
    for (int c = 0; c < img.channels; ++c) {
      const float x = img.data[i * static_cast<std::size_t>(img.channels) + c];
      ok = ok && std::isfinite(x) && x != 0.0f;
    }
    m[i] = ok ? 1 : 0;
  }
  return m;
}

// --- PNG / PPM ------------------------------------------------------------

namespace {

std::uint8_t to_byte(double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); }

void write_png_bytes(const std::vector<std::uint8_t>& pixels, int w, int h, bool grey, const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = grey ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw FormatError("PNG: sizing failed for " + path.string() + ": " + image.message);
  }
  std::string buffer(size, '\0');
  if (!png_image_write_to_memory(&image, buffer.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw FormatError("PNG: encoding failed for " + path.string() + ": " + image.message);
  }
  buffer.resize(size);
  write_file_atomic(path, buffer);
}

}  // namespace

RgbImage read_png(const fs::path& path) {
  const std::string bytes = read_file(path);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError("PNG: cannot decode " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw FormatError("PNG: cannot decode " + path.string() + ": " + image.message);
  }
  RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < out.rgb.size(); ++i) {
    for (int c = 0; c < 3; ++c) out.rgb[i][c] = pixels[i * 3 + c] / 255.0;
  }
  return out;
}

void write_png(const RgbImage& image, const fs::path& path) {
  std::vector<std::uint8_t> pixels(image.rgb.size() * 3);
  for (std::size_t i = 0; i < image.rgb.size(); ++i) {
    for (int c = 0; c < 3; ++c) pixels[i * 3 + c] = to_byte(image.rgb[i][c]);
  }
  write_png_bytes(pixels, image.width(), image.height(), false, path);
}

void write_mask_png(const Grid<std::uint8_t>& mask, const fs::path& path) {
  std::vector<std::uint8_t> pixels(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) pixels[i] = mask[i] ? 255 : 0;
  write_png_bytes(pixels, mask.width(), mask.height(), true, path);
}

RgbImage read_ppm(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  const auto token = [&]() {
    // Skip whitespace and comments.
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    return next_token(bytes, pos);
  };
  if (token() != "P6") throw FormatError("PPM: " + path.string() + " is not binary P6");
  const int w = parse_dim(token(), "width");
  const int h = parse_dim(token(), "height");
  const int maxval = parse_dim(token(), "maxval");
  if (maxval > 255) throw FormatError("PPM: only 8-bit files are supported");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() < pos + need) throw FormatError("PPM: truncated payload in " + path.string());
  RgbImage out(w, h);
  for (std::size_t i = 0; i < out.rgb.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      out.rgb[i][c] = static_cast<unsigned char>(bytes[pos + i * 3 + c]) / static_cast<double>(maxval);
    }
  }
  return out;
}

void write_ppm(const RgbImage& image, const fs::path& path) {
  std::string out = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  for (std::size_t i = 0; i < image.rgb.size(); ++i) {
    for (int c = 0; c < 3; ++c) out.push_back(static_cast<char>(to_byte(image.rgb[i][c])));
  }
  write_file_atomic(path, out);
}

RgbImage read_rgb(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".ppm" || ext == ".PPM") return read_ppm(path);
  if (ext == ".pfm" || ext == ".PFM") return rgb_from_float_image(read_pfm(path));
  return read_png(path);
}

void write_rgb(const RgbImage& image, const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".ppm" || ext == ".PPM") {
    write_ppm(image, path);
  } else {
    write_png(image, path);
  }
}

// --- intrinsics -------------------------------------------------------------

CameraIntrinsics parse_intrinsics(const std::string& text) {
  CameraIntrinsics intr;
  std::map<std::string, double> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    const auto blank = line.find_first_not_of(" \t\r");
    if (blank == std::string::npos) continue;
    if (eq == std::string::npos) throw FormatError("intrinsics line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(key);
    trim(val);
    try {
      std::size_t used = 0;
      kv[key] = std::stod(val, &used);
      if (used != val.size()) throw FormatError("");
    } catch (const std::exception&) {
      throw FormatError("intrinsics line " + std::to_string(lineno) + ": bad number '" + val + "'");
    }
  }
  for (const char* required : {"fx", "fy", "cx", "cy"}) {
    if (!kv.count(required)) throw FormatError(std::string("intrinsics: missing ") + required);
  }
  for (const auto& [k, v] : kv) {
    if (k == "fx") intr.fx = v;
    else if (k == "fy") intr.fy = v;
    else if (k == "cx") intr.cx = v;
    else if (k == "cy") intr.cy = v;
    else if (k == "width") intr.width = static_cast<int>(v);
    else if (k == "height") intr.height = static_cast<int>(v);
    else throw FormatError("intrinsics: unknown key '" + k + "'");
  }
  try {
    intr.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return intr;
}

CameraIntrinsics read_intrinsics(const fs::path& path) { return parse_intrinsics(read_file(path)); }

std::string format_intrinsics(const CameraIntrinsics& intr) {
  std::ostringstream out;
  out.precision(17);
  out << "fx=" << intr.fx << "\nfy=" << intr.fy << "\ncx=" << intr.cx << "\ncy=" << intr.cy
      << "\nwidth=" << intr.width << "\nheight=" << intr.height << "\n";
  return out.str();
}

// --- manifest ----------------------------------------------------------------

bool operator==(const ManifestEntry& a, const ManifestEntry& b) {
  const auto spec_eq = [](const std::optional<augment::AugmentSpec>& x, const std::optional<augment::AugmentSpec>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->flip_h == y->flip_h && x->rotation_deg == y->rotation_deg && x->translate_x == y->translate_x &&
           x->translate_y == y->translate_y && x->color_scale == y->color_scale && x->seed == y->seed;
  };
  return a.id == b.id && a.paths == b.paths && a.curvature_scale == b.curvature_scale && a.seed == b.seed &&
         spec_eq(a.augmentation, b.augmentation);
}

bool operator==(const Manifest& a, const Manifest& b) {
  return a.version == b.version && a.seed == b.seed && a.noise_sigma == b.noise_sigma && a.scenes == b.scenes &&
         a.entries == b.entries;
}

std::string format_manifest(const Manifest& m) {
  std::string out;
  json header = {{"kind", "header"}, {"version", m.version}, {"seed", m.seed}, {"noise_sigma", m.noise_sigma},
                 {"scenes", m.scenes}};
  out += header.dump() + "\n";
  for (const auto& e : m.entries) {
    json j = {{"kind", "sample"}, {"id", e.id}, {"paths", e.paths}, {"curvature_scale", e.curvature_scale},
              {"seed", e.seed}};
    if (e.augmentation) {
      const auto& s = *e.augmentation;
      j["augment"] = {{"flip_h", s.flip_h},
                      {"rotation_deg", s.rotation_deg},
                      {"translate", {s.translate_x, s.translate_y}},
                      {"color_scale", {s.color_scale.x(), s.color_scale.y(), s.color_scale.z()}},
                      {"seed", s.seed}};
    }
    out += j.dump() + "\n";
  }
  return out;
}

Manifest parse_manifest(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string kind = j.at("kind");
      if (kind == "header") {
        m.version = j.at("version");
        if (m.version != kManifestVersion) {
          throw FormatError("unsupported manifest version " + std::to_string(m.version));
        }
        m.seed = j.at("seed");
        m.noise_sigma = j.at("noise_sigma");
        m.scenes = j.at("scenes");
        have_header = true;
      } else if (kind == "sample") {
        ManifestEntry e;
        e.id = j.at("id");
        e.paths = j.at("paths").get<std::map<std::string, std::string>>();
        e.curvature_scale = j.at("curvature_scale");
        e.seed = j.at("seed");
        if (j.contains("augment")) {
          const json& a = j["augment"];
          augment::AugmentSpec s;
          s.flip_h = a.at("flip_h");
          s.rotation_deg = a.at("rotation_deg");
          s.translate_x = a.at("translate").at(0);
          s.translate_y = a.at("translate").at(1);
          for (int c = 0; c < 3; ++c) s.color_scale[c] = a.at("color_scale").at(static_cast<std::size_t>(c));
          s.seed = a.at("seed");
          e.augmentation = s;
        }
        m.entries.push_back(std::move(e));
      } else {
        throw FormatError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& ex) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const FormatError& ex) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  if (!have_header) throw FormatError("manifest: missing header record");
  return m;
}

Manifest read_manifest(const fs::path& path, bool check_files) {
  Manifest m = parse_manifest(read_file(path));
  if (check_files) {
    const fs::path dir = path.parent_path();
    for (const auto& e : m.entries) {
      for (const auto& [channel, rel] : e.paths) {
        if (!fs::exists(dir / rel)) {
          throw FormatError("manifest: " + e.id + " " + channel + " file missing: " + (dir / rel).string());
        }
      }
    }
  }
  return m;
}

void write_manifest(const Manifest& m, const fs::path& path) { write_file_atomic(path, format_manifest(m)); }

Manifest save_dataset(const std::vector<synth::TrainingSample>& samples, const fs::path& dir, std::uint64_t seed,
                      double noise_sigma, int scenes) {
  fs::create_directories(dir);
  Manifest m;
  m.seed = seed;
  m.noise_sigma = noise_sigma;
  m.scenes = scenes;
  for (const auto& s : samples) {
    ManifestEntry e;
    e.id = s.id;
    e.curvature_scale = s.curvature_scale;
    e.seed = s.seed;
    e.augmentation = s.augmentation;
    e.paths = {{"rgb", s.id + "_rgb.png"},
               {"depth", s.id + "_depth.pfm"},
               {"normals", s.id + "_normals.pfm"},
               {"curvature", s.id + "_curv.pfm"}};
    write_png(s.rgb, dir / e.paths["rgb"]);
    write_pfm(to_float_image(s.depth), dir / e.paths["depth"]);
    write_pfm(to_float_image(s.normals), dir / e.paths["normals"]);
    write_pfm(to_float_image(s.curvature), dir / e.paths["curvature"]);
    m.entries.push_back(std::move(e));
  }
  write_manifest(m, dir / kManifestName);
  return m;
}

std::vector<synth::TrainingSample> load_dataset(const fs::path& dir) {
  const Manifest m = read_manifest(dir / kManifestName);
  std::vector<synth::TrainingSample> out;
  out.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    const auto path_of = [&](const char* channel) {
      const auto it = e.paths.find(channel);
      if (it == e.paths.end()) throw FormatError("manifest: " + e.id + " lacks a " + channel + " path");
      return dir / it->second;
    };
    synth::TrainingSample s;
    s.id = e.id;
    s.seed = e.seed;
    s.curvature_scale = e.curvature_scale;
    s.augmentation = e.augmentation;
    s.rgb = read_rgb(path_of("rgb"));
    s.depth = depth_from_float_image(read_pfm(path_of("depth")));
    s.normals = normals_from_float_image(read_pfm(path_of("normals")));
    s.curvature = curvature_from_float_image(read_pfm(path_of("curvature")));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace curvkit::io
