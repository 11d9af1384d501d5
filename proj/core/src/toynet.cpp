#include "curvkit/toynet.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "curvkit/io.hpp"
#include "curvkit/losses.hpp"

namespace curvkit::nn {

int task_channels(Task t) {
  switch (t) {
    case Task::kDepth: return 1;
    case Task::kNormals: return 3;
    case Task::kCurvature: return 2;
  }
  return 0;
}

const char* task_name(Task t) {
  switch (t) {
    case Task::kDepth: return "depth";
    case Task::kNormals: return "normals";
    case Task::kCurvature: return "curvature";
  }
  return "unknown";
}

Task parse_task(const std::string& name) {
  for (const Task t : kAllTasks) {
    if (name == task_name(t)) return t;
  }
  throw std::invalid_argument("unknown task '" + name + "'");
}

std::vector<Task> parse_task_list(const std::string& text) {
  std::vector<Task> tasks;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const Task t = parse_task(item);
    if (std::find(tasks.begin(), tasks.end(), t) == tasks.end()) tasks.push_back(t);
  }
  if (tasks.empty()) throw std::invalid_argument("empty task list");
  std::sort(tasks.begin(), tasks.end());
  return tasks;
}

std::string format_task_list(const std::vector<Task>& tasks) {
  std::string out;
  for (const Task t : tasks) {
    if (!out.empty()) out += "+";
    out += task_name(t);
  }
  return out;
}

bool TensorBuffer::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double x) { return std::isfinite(x); });
}

// --- convolution ----------------------------------------------------------

Conv2d::Conv2d(int in, int out, int kernel_size, int stride_, int pad_, bool relu_)
    : in_channels(in),
      out_channels(out),
      kernel(kernel_size),
      stride(stride_),
      pad(pad_),
      relu(relu_),
      weight(out, in, kernel_size * kernel_size),
      bias(out, 1, 1) {}

namespace {

// Output columns [lo, hi] whose tap kx lands inside the input row.
struct TapRange {
  int lo = 0;
  int hi = -1;
};

TapRange tap_range(int tap, int stride, int pad, int in_size, int out_size) {
  TapRange r{0, out_size - 1};
  while (r.lo < out_size && r.lo * stride + tap - pad < 0) ++r.lo;
  while (r.hi >= 0 && r.hi * stride + tap - pad > in_size - 1) --r.hi;
  return r;
}

}  // namespace

void Conv2d::forward(const TensorBuffer& in, TensorBuffer& out, bool activations) const {
  if (in.channels != in_channels) throw std::invalid_argument("Conv2d: input channel mismatch");
  const int oh = output_size(in.height);
  const int ow = output_size(in.width);
  if (out.channels != out_channels || out.height != oh || out.width != ow) {
    out = TensorBuffer(out_channels, oh, ow);
  } else {
    out.zero_grad();
  }
  const int kk = kernel * kernel;
  std::vector<TapRange> cols(static_cast<std::size_t>(kernel));
  std::vector<TapRange> rows(static_cast<std::size_t>(kernel));
  for (int k = 0; k < kernel; ++k) {
    cols[static_cast<std::size_t>(k)] = tap_range(k, stride, pad, in.width, ow);
    rows[static_cast<std::size_t>(k)] = tap_range(k, stride, pad, in.height, oh);
  }
  for (int co = 0; co < out_channels; ++co) {
    double* const o = out.data.data() + static_cast<std::size_t>(co) * oh * ow;
    std::fill(o, o + static_cast<std::size_t>(oh) * ow, bias.data[static_cast<std::size_t>(co)]);
    for (int ci = 0; ci < in_channels; ++ci) {
      const double* const src = in.data.data() + static_cast<std::size_t>(ci) * in.height * in.width;
      const double* const wk = weight.data.data() + (static_cast<std::size_t>(co) * in_channels + ci) * kk;
      for (int ky = 0; ky < kernel; ++ky) {
        const TapRange ry = rows[static_cast<std::size_t>(ky)];
        for (int kx = 0; kx < kernel; ++kx) {
          const double wv = wk[ky * kernel + kx];
          const TapRange rx = cols[static_cast<std::size_t>(kx)];
          for (int oy = ry.lo; oy <= ry.hi; ++oy) {
            const double* irow = src + static_cast<std::size_t>(oy * stride + ky - pad) * in.width + (kx - pad);
            double* orow = o + static_cast<std::size_t>(oy) * ow;
            if (stride == 1) {
              for (int ox = rx.lo; ox <= rx.hi; ++ox) orow[ox] += wv * irow[ox];
            } else {
              for (int ox = rx.lo; ox <= rx.hi; ++ox) orow[ox] += wv * irow[ox * stride];
            }
          }
        }
      }
    }
  }
  if (relu && activations) {
    for (double& x : out.data) x = x > 0.0 ? x : 0.0;
  }
}

void Conv2d::backward(TensorBuffer& in, TensorBuffer& out, bool activations, bool in_grad) {
  const int oh = out.height;
  const int ow = out.width;
  if (relu && activations) {
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
      if (!(out.data[i] > 0.0)) out.grad[i] = 0.0;
    }
  }
  const int kk = kernel * kernel;
  std::vector<TapRange> cols(static_cast<std::size_t>(kernel));
  std::vector<TapRange> rows(static_cast<std::size_t>(kernel));
  for (int k = 0; k < kernel; ++k) {
    cols[static_cast<std::size_t>(k)] = tap_range(k, stride, pad, in.width, ow);
    rows[static_cast<std::size_t>(k)] = tap_range(k, stride, pad, in.height, oh);
  }
  for (int co = 0; co < out_channels; ++co) {
    const double* const g = out.grad.data() + static_cast<std::size_t>(co) * oh * ow;
    bias.grad[static_cast<std::size_t>(co)] += std::accumulate(g, g + static_cast<std::size_t>(oh) * ow, 0.0);
    for (int ci = 0; ci < in_channels; ++ci) {
      const std::size_t in_off = static_cast<std::size_t>(ci) * in.height * in.width;
      const double* const src = in.data.data() + in_off;
      double* const dsrc = in.grad.data() + in_off;
      const std::size_t w_off = (static_cast<std::size_t>(co) * in_channels + ci) * kk;
      for (int ky = 0; ky < kernel; ++ky) {
        const TapRange ry = rows[static_cast<std::size_t>(ky)];
        for (int kx = 0; kx < kernel; ++kx) {
          const double wv = weight.data[w_off + ky * kernel + kx];
          const TapRange rx = cols[static_cast<std::size_t>(kx)];
          double acc = 0.0;
          for (int oy = ry.lo; oy <= ry.hi; ++oy) {
            const std::size_t row_off = static_cast<std::size_t>(oy * stride + ky - pad) * in.width + (kx - pad);
            const double* irow = src + row_off;
            const double* grow = g + static_cast<std::size_t>(oy) * ow;
            if (stride == 1) {
              for (int ox = rx.lo; ox <= rx.hi; ++ox) acc += grow[ox] * irow[ox];
              if (in_grad) {
                double* drow = dsrc + row_off;
                for (int ox = rx.lo; ox <= rx.hi; ++ox) drow[ox] += wv * grow[ox];
              }
            } else {
              for (int ox = rx.lo; ox <= rx.hi; ++ox) acc += grow[ox] * irow[ox * stride];
              if (in_grad) {
                double* drow = dsrc + row_off;
                for (int ox = rx.lo; ox <= rx.hi; ++ox) drow[ox * stride] += wv * grow[ox];
              }
            }
          }
          weight.grad[w_off + ky * kernel + kx] += acc;
        }
      }
    }
  }
}

// --- configuration ----------------------------------------------------------

void NetworkConfig::validate() const {
  if (input_height < 8 || input_width < 8 || input_height % 4 != 0 || input_width % 4 != 0) {
    throw std::invalid_argument("NetworkConfig: input size must be a multiple of 4 and at least 8");
  }
  for (const int c : trunk_channels) {
    if (c <= 0) throw std::invalid_argument("NetworkConfig: trunk channels must be positive");
  }
  if (coarse_channels <= 0 || fine_channels <= 0) {
    throw std::invalid_argument("NetworkConfig: stack channels must be positive");
  }
  if (global_channels < 0) throw std::invalid_argument("NetworkConfig: global_channels must be >= 0");
  if (global_channels > 0) {
    if (global_grid < 1 || global_hidden < 1 || (input_height / 4) % global_grid != 0 ||
        (input_width / 4) % global_grid != 0) {
      throw std::invalid_argument("NetworkConfig: global grid must divide the coarse resolution");
    }
  }
  if (task_set.empty()) throw std::invalid_argument("NetworkConfig: task_set is empty");
  if (!(learning_rate >= 0.0) || !(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("NetworkConfig: bad optimizer parameters");
  }
  if (epochs < 0 || batch_size < 1) throw std::invalid_argument("NetworkConfig: bad epochs / batch size");
  for (const double w : task_weights) {
    if (!(w > 0.0)) throw std::invalid_argument("NetworkConfig: task weights must be positive");
  }
  if (!(coarse_weight > 0.0)) throw std::invalid_argument("NetworkConfig: coarse weight must be positive");
}

bool NetworkConfig::trains(Task t) const { return std::find(task_set.begin(), task_set.end(), t) != task_set.end(); }

std::vector<Task> NetworkConfig::built_tasks() const {
  std::vector<Task> out;
  for (const Task t : kAllTasks) {
    if (heads_always_present || trains(t)) out.push_back(t);
  }
  return out;
}

// --- examples ---------------------------------------------------------------

TensorBuffer input_tensor(const RgbImage& rgb) {
  TensorBuffer t(kInputChannels, rgb.height(), rgb.width());
  const double sx = 2.0 / rgb.width();
  const double sy = 2.0 / rgb.height();
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = rgb.rgb(x, y)[c] - 0.5;
      t.at(3, y, x) = (x + 0.5) * sx - 1.0;
      t.at(4, y, x) = (y + 0.5) * sy - 1.0;
    }
  }
  return t;
}

namespace {

ScaleTargets fine_targets(const synth::TrainingSample& s) {
  const int w = s.depth.width();
  const int h = s.depth.height();
  require_shape(w, h, s.normals.width(), s.normals.height(), "sample normals");
  require_shape(w, h, s.curvature.width(), s.curvature.height(), "sample curvature");
  ScaleTargets t;
  t.depth = s.depth.depth;
  t.depth_mask = s.depth.valid;
  t.log_depth = Grid<double>(w, h, 0.0);
  for (std::size_t i = 0; i < t.depth.size(); ++i) {
    if (t.depth_mask[i]) t.log_depth[i] = std::log(t.depth[i]) - kLogDepthOffset;
  }
  t.normals = s.normals;
  t.k1 = s.curvature.k1;
  t.k2 = s.curvature.k2;
  t.curvature_mask = Mask(w, h, 0);
  for (std::size_t i = 0; i < t.k1.size(); ++i) {
    t.curvature_mask[i] = (s.curvature.valid[i] && s.depth.valid[i]) ? 1 : 0;
  }
  return t;
}

// 2x2 block average; a coarse pixel is valid only if all four children are.
ScaleTargets pool_targets(const ScaleTargets& f) {
  const int w = f.depth.width() / 2;
  const int h = f.depth.height() / 2;
  ScaleTargets c;
  c.depth = Grid<double>(w, h, 0.0);
  c.log_depth = Grid<double>(w, h, 0.0);
  c.depth_mask = Mask(w, h, 0);
  c.normals = NormalMap(w, h);
  c.k1 = Grid<double>(w, h, 0.0);
  c.k2 = Grid<double>(w, h, 0.0);
  c.curvature_mask = Mask(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xs[4] = {2 * x, 2 * x + 1, 2 * x, 2 * x + 1};
      const int ys[4] = {2 * y, 2 * y, 2 * y + 1, 2 * y + 1};
      bool depth_ok = true;
      bool normal_ok = true;
      bool curv_ok = true;
      for (int k = 0; k < 4; ++k) {
        depth_ok = depth_ok && f.depth_mask(xs[k], ys[k]);
        normal_ok = normal_ok && f.normals.valid(xs[k], ys[k]);
        curv_ok = curv_ok && f.curvature_mask(xs[k], ys[k]);
      }
      if (depth_ok) {
        double d = 0.0;
        double ld = 0.0;
        for (int k = 0; k < 4; ++k) {
          d += f.depth(xs[k], ys[k]);
          ld += f.log_depth(xs[k], ys[k]);
        }
        c.depth(x, y) = 0.25 * d;
        c.log_depth(x, y) = 0.25 * ld;
        c.depth_mask(x, y) = 1;
      }
      if (normal_ok) {
        Eigen::Vector3d n = Eigen::Vector3d::Zero();
        for (int k = 0; k < 4; ++k) n += f.normals.normal(xs[k], ys[k]);
        if (n.norm() > 1e-12) {
          c.normals.normal(x, y) = n.normalized();
          c.normals.valid(x, y) = 1;
        }
      }
      if (curv_ok && depth_ok) {
        double k1 = 0.0;
        double k2 = 0.0;
        for (int k = 0; k < 4; ++k) {
          k1 += f.k1(xs[k], ys[k]);
          k2 += f.k2(xs[k], ys[k]);
        }
        c.k1(x, y) = 0.25 * k1;
        c.k2(x, y) = 0.25 * k2;
        c.curvature_mask(x, y) = 1;
      }
    }
  }
  return c;
}

}  // namespace

Example make_example(const synth::TrainingSample& sample, const NetworkConfig& config) {
  if (sample.rgb.width() != config.input_width || sample.rgb.height() != config.input_height) {
    throw std::invalid_argument("make_example: RGB does not match the network input size");
  }
  if (sample.depth.width() != config.input_width / 2 || sample.depth.height() != config.input_height / 2) {
    throw std::invalid_argument("make_example: targets must be at half the input resolution");
  }
  Example ex;
  ex.input = input_tensor(sample.rgb);
  ex.fine = fine_targets(sample);
  ex.coarse = pool_targets(ex.fine);
  return ex;
}

// --- network ----------------------------------------------------------------

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& tc = config_.trunk_channels;
  trunk_[0] = Conv2d(kInputChannels, tc[0], 5, 2, 2, true);
  trunk_[1] = Conv2d(tc[0], tc[1], 5, 2, 2, true);
  trunk_[2] = Conv2d(tc[1], tc[2], 5, 1, 2, true);
  concat_skip_channels_ = tc[0];
  const int g = config_.global_grid;
  if (has_global()) {
    global_[0] = Conv2d(tc[2] * g * g, config_.global_hidden, 1, 1, 0, true);
    global_[1] = Conv2d(config_.global_hidden, config_.global_channels * g * g, 1, 1, 0, true);
  }
  int coarse_total = 0;
  const auto built = config_.built_tasks();
  for (const Task t : built) coarse_total += task_channels(t);
  const int fine_in = concat_skip_channels_ + coarse_total;
  for (const Task t : built) {
    Stack s;
    const int k = config_.coarse_channels;
    const int f = config_.fine_channels;
    s.coarse = {Conv2d(tc[2] + config_.global_channels, k, 5, 1, 2, true), Conv2d(k, k, 5, 1, 2, true),
                Conv2d(k, task_channels(t), 5, 1, 2, false)};
    s.fine = {Conv2d(fine_in, f, 5, 1, 2, true), Conv2d(f, f, 5, 1, 2, true),
              Conv2d(f, task_channels(t), 5, 1, 2, false)};
    stacks_[static_cast<std::size_t>(t)] = std::move(s);
  }
}

const Conv2d& Network::coarse(Task t, int i) const {
  if (!has_stack(t)) throw std::invalid_argument(std::string("no stack for ") + task_name(t));
  return stacks_[static_cast<std::size_t>(t)]->coarse[static_cast<std::size_t>(i)];
}

const Conv2d& Network::fine(Task t, int i) const {
  if (!has_stack(t)) throw std::invalid_argument(std::string("no stack for ") + task_name(t));
  return stacks_[static_cast<std::size_t>(t)]->fine[static_cast<std::size_t>(i)];
}

std::vector<Conv2d*> Network::layers() {
  std::vector<Conv2d*> out;
  for (auto& l : trunk_) out.push_back(&l);
  if (has_global()) {
    for (auto& l : global_) out.push_back(&l);
  }
  for (auto& s : stacks_) {
    if (!s) continue;
    for (auto& l : s->coarse) out.push_back(&l);
  }
  for (auto& s : stacks_) {
    if (!s) continue;
    for (auto& l : s->fine) out.push_back(&l);
  }
  return out;
}

std::vector<TensorBuffer*> Network::parameters() {
  std::vector<TensorBuffer*> out;
  for (Conv2d* l : layers()) {
    out.push_back(&l->weight);
    out.push_back(&l->bias);
  }
  return out;
}

std::vector<const TensorBuffer*> Network::parameters() const {
  std::vector<const TensorBuffer*> out;
  for (TensorBuffer* p : const_cast<Network*>(this)->parameters()) out.push_back(p);
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const TensorBuffer* p : parameters()) n += p->size();
  return n;
}

void Network::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Conv2d* l : layers()) {
    const double fan_in = static_cast<double>(l->in_channels) * l->kernel * l->kernel;
    const double stddev = std::sqrt(2.0 / fan_in);
    for (double& w : l->weight.data) w = stddev * normal(rng);
    std::fill(l->bias.data.begin(), l->bias.data.end(), 0.0);
  }
}

void Network::zero_parameters() {
  for (TensorBuffer* p : parameters()) std::fill(p->data.begin(), p->data.end(), 0.0);
}

void Network::zero_grad() {
  for (TensorBuffer* p : parameters()) p->zero_grad();
}

TensorBuffer& Network::head_output(Task t, bool fine_scale) {
  if (!has_stack(t)) throw std::invalid_argument(std::string("no stack for ") + task_name(t));
  auto& a = acts_[static_cast<std::size_t>(t)];
  return fine_scale ? a.fine[2] : a.coarse[2];
}

Predictions Network::forward(const TensorBuffer& input) {
  if (input.channels != kInputChannels || input.height != config_.input_height || input.width != config_.input_width) {
    throw std::invalid_argument("Network::forward: input must be 5x" + std::to_string(config_.input_height) + "x" +
                                std::to_string(config_.input_width));
  }
  const bool act = config_.activations;
  input_ = input;
  input_.zero_grad();
  trunk_[0].forward(input_, trunk_out_[0], act);
  trunk_[1].forward(trunk_out_[0], trunk_out_[1], act);
  trunk_[2].forward(trunk_out_[1], trunk_out_[2], act);

  const TensorBuffer& features = trunk_out_[2];
  coarse_in_ = TensorBuffer(features.channels + config_.global_channels, features.height, features.width);
  std::copy(features.data.begin(), features.data.end(), coarse_in_.data.begin());
  if (has_global()) {
    const int g = config_.global_grid;
    const int bh = features.height / g;
    const int bw = features.width / g;
    pooled_ = TensorBuffer(features.channels * g * g, 1, 1);
    const double inv = 1.0 / (bh * bw);
    for (int c = 0; c < features.channels; ++c) {
      for (int y = 0; y < features.height; ++y) {
        for (int x = 0; x < features.width; ++x) {
          pooled_.data[(static_cast<std::size_t>(c) * g + y / bh) * g + x / bw] += inv * features.at(c, y, x);
        }
      }
    }
    global_[0].forward(pooled_, global_out_[0], act);
    global_[1].forward(global_out_[0], global_out_[1], act);
    for (int c = 0; c < config_.global_channels; ++c) {
      for (int y = 0; y < features.height; ++y) {
        for (int x = 0; x < features.width; ++x) {
          coarse_in_.at(features.channels + c, y, x) =
              global_out_[1].data[(static_cast<std::size_t>(c) * g + y / bh) * g + x / bw];
        }
      }
    }
  }

  const auto built = config_.built_tasks();
  for (const Task t : built) {
    auto& s = *stacks_[static_cast<std::size_t>(t)];
    auto& a = acts_[static_cast<std::size_t>(t)];
    s.coarse[0].forward(coarse_in_, a.coarse[0], act);
    s.coarse[1].forward(a.coarse[0], a.coarse[1], act);
    s.coarse[2].forward(a.coarse[1], a.coarse[2], act);
  }

  // Skip features followed by every coarse prediction, upsampled 2x (nearest).
  const TensorBuffer& skip = trunk_out_[0];
  int channels = concat_skip_channels_;
  for (const Task t : built) channels += task_channels(t);
  concat_ = TensorBuffer(channels, skip.height, skip.width);
  std::copy(skip.data.begin(), skip.data.end(), concat_.data.begin());
  int c0 = concat_skip_channels_;
  for (const Task t : built) {
    const TensorBuffer& coarse_pred = acts_[static_cast<std::size_t>(t)].coarse[2];
    for (int c = 0; c < coarse_pred.channels; ++c) {
      for (int y = 0; y < concat_.height; ++y) {
        for (int x = 0; x < concat_.width; ++x) {
          concat_.at(c0 + c, y, x) = coarse_pred.at(c, y / 2, x / 2);
        }
      }
    }
    c0 += coarse_pred.channels;
  }

  Predictions out;
  for (const Task t : built) {
    auto& s = *stacks_[static_cast<std::size_t>(t)];
    auto& a = acts_[static_cast<std::size_t>(t)];
    s.fine[0].forward(concat_, a.fine[0], act);
    s.fine[1].forward(a.fine[0], a.fine[1], act);
    s.fine[2].forward(a.fine[1], a.fine[2], act);
    out.coarse[static_cast<std::size_t>(t)] = a.coarse[2];
    out.fine[static_cast<std::size_t>(t)] = a.fine[2];
  }
  return out;
}

void Network::backward() {
  const bool act = config_.activations;
  const auto built = config_.built_tasks();
  concat_.zero_grad();
  for (const Task t : built) {
    auto& s = *stacks_[static_cast<std::size_t>(t)];
    auto& a = acts_[static_cast<std::size_t>(t)];
    a.fine[1].zero_grad();
    a.fine[0].zero_grad();
    s.fine[2].backward(a.fine[1], a.fine[2], act, true);
    s.fine[1].backward(a.fine[0], a.fine[1], act, true);
    s.fine[0].backward(concat_, a.fine[0], act, true);
  }

  TensorBuffer& skip = trunk_out_[0];
  skip.zero_grad();
  std::copy(concat_.grad.begin(), concat_.grad.begin() + static_cast<std::ptrdiff_t>(skip.size()), skip.grad.begin());
  int c0 = concat_skip_channels_;
  for (const Task t : built) {
    TensorBuffer& coarse_pred = acts_[static_cast<std::size_t>(t)].coarse[2];
    for (int c = 0; c < coarse_pred.channels; ++c) {
      for (int y = 0; y < concat_.height; ++y) {
        for (int x = 0; x < concat_.width; ++x) {
          coarse_pred.grad[coarse_pred.index(c, y / 2, x / 2)] += concat_.grad[concat_.index(c0 + c, y, x)];
        }
      }
    }
    c0 += coarse_pred.channels;
  }

  coarse_in_.zero_grad();
  for (const Task t : built) {
    auto& s = *stacks_[static_cast<std::size_t>(t)];
    auto& a = acts_[static_cast<std::size_t>(t)];
    a.coarse[1].zero_grad();
    a.coarse[0].zero_grad();
    s.coarse[2].backward(a.coarse[1], a.coarse[2], act, true);
    s.coarse[1].backward(a.coarse[0], a.coarse[1], act, true);
    s.coarse[0].backward(coarse_in_, a.coarse[0], act, true);
  }
  TensorBuffer& features = trunk_out_[2];
  std::copy(coarse_in_.grad.begin(), coarse_in_.grad.begin() + static_cast<std::ptrdiff_t>(features.size()),
            features.grad.begin());
  if (has_global()) {
    const int g = config_.global_grid;
    const int bh = features.height / g;
    const int bw = features.width / g;
    global_out_[1].zero_grad();
    for (int c = 0; c < config_.global_channels; ++c) {
      for (int y = 0; y < features.height; ++y) {
        for (int x = 0; x < features.width; ++x) {
          global_out_[1].grad[(static_cast<std::size_t>(c) * g + y / bh) * g + x / bw] +=
              coarse_in_.grad[coarse_in_.index(features.channels + c, y, x)];
        }
      }
    }
    global_out_[0].zero_grad();
    pooled_.zero_grad();
    global_[1].backward(global_out_[0], global_out_[1], act, true);
    global_[0].backward(pooled_, global_out_[0], act, true);
    const double inv = 1.0 / (bh * bw);
    for (int c = 0; c < features.channels; ++c) {
      for (int y = 0; y < features.height; ++y) {
        for (int x = 0; x < features.width; ++x) {
          features.grad[features.index(c, y, x)] +=
              inv * pooled_.grad[(static_cast<std::size_t>(c) * g + y / bh) * g + x / bw];
        }
      }
    }
  }
  trunk_out_[1].zero_grad();
  trunk_[2].backward(trunk_out_[1], trunk_out_[2], act, true);
  trunk_[1].backward(trunk_out_[0], trunk_out_[1], act, true);
  trunk_[0].backward(input_, trunk_out_[0], act, false);
}

// --- optimisation -------------------------------------------------------------

OptimizerState make_optimizer(const Network& net) {
  OptimizerState s;
  s.learning_rate = net.config().learning_rate;
  s.momentum = net.config().momentum;
  for (const TensorBuffer* p : net.parameters()) s.velocity.emplace_back(p->size(), 0.0);
  return s;
}

void nesterov_step(Network& net, OptimizerState& state) {
  auto params = net.parameters();
  if (state.velocity.size() != params.size()) throw std::invalid_argument("nesterov_step: optimizer state mismatch");
  const double lr = state.learning_rate;
  const double mu = state.momentum;
  for (std::size_t k = 0; k < params.size(); ++k) {
    TensorBuffer& p = *params[k];
    std::vector<double>& v = state.velocity[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double step = lr * p.grad[i];
      v[i] = mu * v[i] - step;
      p.data[i] += mu * v[i] - step;
    }
  }
}

NonFiniteLoss::NonFiniteLoss(Task t, const char* s, double value)
    : std::runtime_error(std::string("non-finite ") + task_name(t) + " loss at " + s + " scale (" +
                         std::to_string(value) + ")"),
      task(t),
      scale(s) {}

std::vector<TaskSolver> default_solvers(const NetworkConfig& config) {
  std::vector<TaskSolver> out;
  for (const Task t : config.task_set) out.push_back({t, config.task_weights[static_cast<std::size_t>(t)]});
  return out;
}

namespace {

Grid<double> plane_grid(const TensorBuffer& t, int c) {
  Grid<double> g(t.width, t.height, 0.0);
  const auto p = t.plane(c);
  std::copy(p.begin(), p.end(), g.values().begin());
  return g;
}

std::size_t count_valid(const Mask& m) {
  return static_cast<std::size_t>(std::count(m.values().begin(), m.values().end(), std::uint8_t{1}));
}

// Evaluates one solver on one head and writes the scaled gradient into it.
// Returns the scaled loss, or nothing when the targets have too few pixels.
std::optional<double> apply_solver(const NetworkConfig& cfg, const TaskSolver& solver, TensorBuffer& head,
                                   const ScaleTargets& targets, double scale) {
  losses::LossResult r;
  std::size_t n = 0;
  switch (solver.task) {
    case Task::kDepth: {
      n = count_valid(targets.depth_mask);
      if (n < 2) return std::nullopt;
      r = losses::depth_loss(plane_grid(head, 0), targets.log_depth, targets.depth_mask);
      break;
    }
    case Task::kNormals: {
      n = count_valid(targets.normals.valid);
      if (n == 0) return std::nullopt;
      r = losses::normal_loss({plane_grid(head, 0), plane_grid(head, 1), plane_grid(head, 2)}, targets.normals,
                              targets.normals.valid);
      break;
    }
    case Task::kCurvature: {
      n = count_valid(targets.curvature_mask);
      if (n == 0) return std::nullopt;
      r = losses::curvature_loss(plane_grid(head, 0), plane_grid(head, 1), targets.k1, targets.k2, targets.depth,
                                 targets.curvature_mask, cfg.curvature_weight_exponent);
      break;
    }
  }
  const double factor = scale / static_cast<double>(n);
  for (int c = 0; c < head.channels; ++c) {
    const Grid<double>& g = r.grad[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < g.size(); ++i) head.grad[static_cast<std::size_t>(c) * head.plane_size() + i] += factor * g[i];
  }
  return factor * r.value;
}

}  // namespace

std::vector<TaskLoss> compute_gradients(Network& net, std::span<const Example> batch,
                                        std::span<const TaskSolver> solvers) {
  if (batch.empty()) throw std::invalid_argument("compute_gradients: empty batch");
  for (const auto& s : solvers) {
    if (!net.has_stack(s.task)) {
      throw std::invalid_argument(std::string("solver attached to missing head: ") + task_name(s.task));
    }
    if (!(s.weight > 0.0)) throw std::invalid_argument("solver weight must be positive");
  }
  const NetworkConfig& cfg = net.config();
  net.zero_grad();
  std::vector<TaskLoss> totals;
  for (const auto& s : solvers) totals.push_back({s.task, 0.0, 0.0});
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  for (const Example& ex : batch) {
    net.forward(ex.input);
    for (std::size_t k = 0; k < solvers.size(); ++k) {
      const TaskSolver& s = solvers[k];
      for (const bool fine : {false, true}) {
        TensorBuffer& head = net.head_output(s.task, fine);
        const double scale = s.weight * (fine ? 1.0 : cfg.coarse_weight) * inv_batch;
        const auto value = apply_solver(cfg, s, head, fine ? ex.fine : ex.coarse, scale);
        if (!value) continue;
        if (!std::isfinite(*value)) throw NonFiniteLoss(s.task, fine ? "fine" : "coarse", *value);
        (fine ? totals[k].fine : totals[k].coarse) += *value;
      }
    }
    net.backward();
  }
  return totals;
}

std::vector<TaskLoss> backward_and_step(Network& net, std::span<const Example> batch,
                                        std::span<const TaskSolver> solvers, OptimizerState& state) {
  auto losses = compute_gradients(net, batch, solvers);
  nesterov_step(net, state);
  return losses;
}

TrainingHistory train(Network& net, std::span<const Example> train_set) {
  const NetworkConfig& cfg = net.config();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  TrainingHistory history;
  OptimizerState state = make_optimizer(net);
  const auto solvers = default_solvers(cfg);
  std::vector<std::size_t> order(train_set.size());
  std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = state.learning_rate;
    for (const auto& s : solvers) rec.losses.push_back({s.task, 0.0, 0.0});
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Example> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      std::vector<TaskLoss> step;
      try {
        step = backward_and_step(net, batch, solvers, state);
      } catch (const NonFiniteLoss& e) {
        history.diverged = true;
        history.failure = e.what();
        return history;
      }
      for (std::size_t k = 0; k < step.size(); ++k) {
        rec.losses[k].coarse += step[k].coarse;
        rec.losses[k].fine += step[k].fine;
        if (std::abs(step[k].coarse) > cfg.divergence_limit || std::abs(step[k].fine) > cfg.divergence_limit) {
          history.diverged = true;
          history.failure = std::string("diverged: ") + task_name(step[k].task) + " loss exceeded " +
                            std::to_string(cfg.divergence_limit) + " in epoch " + std::to_string(epoch);
        }
      }
      ++batches;
      if (history.diverged) break;
    }
    for (auto& l : rec.losses) {
      l.coarse /= batches;
      l.fine /= batches;
      rec.total += l.coarse + l.fine;
    }
    history.epochs.push_back(rec);
    if (history.diverged) return history;

    if (rec.total < best) {
      best = rec.total;
      stale = 0;
    } else if (++stale >= cfg.plateau_patience) {
      state.learning_rate *= cfg.lr_decay;
      stale = 0;
    }
  }
  return history;
}

PredictedMaps predict(Network& net, const RgbImage& rgb, double curvature_scale) {
  const Predictions p = net.forward(rgb);
  const int w = net.config().input_width / 2;
  const int h = net.config().input_height / 2;
  PredictedMaps out{DepthMap(w, h), NormalMap(w, h), CurvatureMap(w, h)};
  if (const auto& d = p.fine[static_cast<std::size_t>(Task::kDepth)]) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double z = std::exp(d->at(0, y, x) + kLogDepthOffset);
        if (std::isfinite(z) && z > 0.0) {
          out.depth.depth(x, y) = z;
          out.depth.valid(x, y) = 1;
        }
      }
    }
  }
  if (const auto& n = p.fine[static_cast<std::size_t>(Task::kNormals)]) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Eigen::Vector3d v(n->at(0, y, x), n->at(1, y, x), n->at(2, y, x));
        if (v.norm() > 1e-12 && v.allFinite()) {
          out.normals.normal(x, y) = v.normalized();
          out.normals.valid(x, y) = 1;
        }
      }
    }
  }
  if (const auto& k = p.fine[static_cast<std::size_t>(Task::kCurvature)]) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double k1 = k->at(0, y, x) / curvature_scale;
        double k2 = k->at(1, y, x) / curvature_scale;
        if (!std::isfinite(k1) || !std::isfinite(k2)) continue;
        canonicalize_curvature(k1, k2);
        out.curvature.k1(x, y) = k1;
        out.curvature.k2(x, y) = k2;
        out.curvature.valid(x, y) = 1;
      }
    }
  }
  return out;
}

namespace {

// Stacks equally sized maps vertically so pooled metrics see every pixel once.
template <typename T>
Grid<T> stack_rows(const std::vector<const Grid<T>*>& parts) {
  const int w = parts.front()->width();
  int h = 0;
  for (const auto* p : parts) h += p->height();
  Grid<T> out(w, h);
  std::size_t off = 0;
  for (const auto* p : parts) {
    std::copy(p->values().begin(), p->values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(off));
    off += p->size();
  }
  return out;
}

bool any_valid(const Mask& m) {
  return std::any_of(m.values().begin(), m.values().end(), [](std::uint8_t v) { return v != 0; });
}

}  // namespace

HeldOutMetrics evaluate(Network& net, std::span<const synth::TrainingSample> samples) {
  if (samples.empty()) throw std::invalid_argument("evaluate: no samples");
  const NetworkConfig& cfg = net.config();
  std::vector<PredictedMaps> preds;
  preds.reserve(samples.size());
  for (const auto& s : samples) preds.push_back(predict(net, s.rgb, s.curvature_scale));

  HeldOutMetrics out;
  std::vector<const Grid<std::uint8_t>*> masks;
  if (cfg.trains(Task::kDepth)) {
    std::vector<const Grid<double>*> pd, gd;
    std::vector<const Mask*> pm, gm;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      pd.push_back(&preds[i].depth.depth);
      pm.push_back(&preds[i].depth.valid);
      gd.push_back(&samples[i].depth.depth);
      gm.push_back(&samples[i].depth.valid);
    }
    DepthMap p;
    p.depth = stack_rows(pd);
    p.valid = stack_rows(pm);
    DepthMap g;
    g.depth = stack_rows(gd);
    g.valid = stack_rows(gm);
    if (any_valid(p.valid)) out.depth = metrics::eval_depth(p, g, Mask(g.width(), g.height(), 1));
  }
  if (cfg.trains(Task::kNormals)) {
    std::vector<const Grid<Eigen::Vector3d>*> pn, gn;
    std::vector<const Mask*> pm, gm;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      pn.push_back(&preds[i].normals.normal);
      pm.push_back(&preds[i].normals.valid);
      gn.push_back(&samples[i].normals.normal);
      gm.push_back(&samples[i].normals.valid);
    }
    NormalMap p;
    p.normal = stack_rows(pn);
    p.valid = stack_rows(pm);
    NormalMap g;
    g.normal = stack_rows(gn);
    g.valid = stack_rows(gm);
    if (any_valid(p.valid)) out.normals = metrics::eval_normals(p, g, Mask(g.width(), g.height(), 1));
  }
  if (cfg.trains(Task::kCurvature)) {
    std::vector<CurvatureMap> unscaled;
    unscaled.reserve(samples.size());
    for (const auto& s : samples) {
      CurvatureMap c = s.curvature;
      for (std::size_t i = 0; i < c.k1.size(); ++i) {
        c.k1[i] /= s.curvature_scale;
        c.k2[i] /= s.curvature_scale;
      }
      unscaled.push_back(std::move(c));
    }
    std::vector<const Grid<double>*> p1, p2, g1, g2;
    std::vector<const Mask*> pm, gm;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      p1.push_back(&preds[i].curvature.k1);
      p2.push_back(&preds[i].curvature.k2);
      pm.push_back(&preds[i].curvature.valid);
      g1.push_back(&unscaled[i].k1);
      g2.push_back(&unscaled[i].k2);
      gm.push_back(&unscaled[i].valid);
    }
    CurvatureMap p;
    p.k1 = stack_rows(p1);
    p.k2 = stack_rows(p2);
    p.valid = stack_rows(pm);
    CurvatureMap g;
    g.k1 = stack_rows(g1);
    g.k2 = stack_rows(g2);
    g.valid = stack_rows(gm);
    if (any_valid(p.valid)) out.curvature = metrics::eval_curvature(p, g, Mask(g.width(), g.height(), 1));
  }
  return out;
}

std::pair<std::vector<synth::TrainingSample>, std::vector<synth::TrainingSample>> split_dataset(
    const std::vector<synth::TrainingSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("split_dataset: empty dataset");
  if (samples.size() == 1) return {samples, samples};
  const std::size_t held = std::max<std::size_t>(1, samples.size() / 8);
  const auto cut = samples.end() - static_cast<std::ptrdiff_t>(held);
  return {std::vector<synth::TrainingSample>(samples.begin(), cut), std::vector<synth::TrainingSample>(cut, samples.end())};
}

std::vector<std::vector<Task>> capacity_task_sets() {
  return {{Task::kDepth},
          {Task::kNormals},
          {Task::kDepth, Task::kNormals},
          {Task::kDepth, Task::kNormals, Task::kCurvature}};
}

CapacityReport run_capacity_experiment(const std::vector<synth::TrainingSample>& dataset,
                                       const NetworkConfig& base_config, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw std::invalid_argument("run_capacity_experiment: no seeds");
  const auto [train_samples, test_samples] = split_dataset(dataset);
  std::vector<Example> examples;
  examples.reserve(train_samples.size());
  for (const auto& s : train_samples) examples.push_back(make_example(s, base_config));

  CapacityReport report;
  for (const std::uint64_t seed : seeds) {
    for (const auto& tasks : capacity_task_sets()) {
      NetworkConfig cfg = base_config;
      cfg.task_set = tasks;
      cfg.seed = seed;
      cfg.heads_always_present = true;
      Network net(cfg);
      net.initialize(seed);
      ConfigurationRun run;
      run.name = format_task_list(tasks);
      run.tasks = tasks;
      run.seed = seed;
      run.parameter_count = net.parameter_count();
      run.history = train(net, examples);
      if (!run.history.diverged) run.metrics = evaluate(net, test_samples);
      report.runs.push_back(std::move(run));
    }
  }
  return report;
}

// --- reporting ----------------------------------------------------------------

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json metrics_json(const HeldOutMetrics& m) {
  nlohmann::json j = nlohmann::json::object();
  if (m.depth) {
    const auto& d = *m.depth;
    j["depth"] = {{"rel_abs", d.rel_abs}, {"rms_lin", d.rms_lin}, {"rms_log", d.rms_log},
                  {"delta1", d.delta1},   {"delta2", d.delta2},   {"delta3", d.delta3},
                  {"count", d.count}};
  }
  if (m.normals) {
    const auto& n = *m.normals;
    j["normals"] = {{"mean_deg", n.mean_deg},       {"median_deg", n.median_deg}, {"within_11_25", n.within_11_25},
                    {"within_22_5", n.within_22_5}, {"within_30", n.within_30},   {"count", n.count}};
  }
  if (m.curvature) {
    const auto& c = *m.curvature;
    j["curvature"] = {{"rms_k1", c.rms_k1},
                      {"rms_k2", c.rms_k2},
                      {"median_planar", optional_json(c.median_planar)},
                      {"median_nonplanar", optional_json(c.median_nonplanar)},
                      {"within_s1", c.within_s1},
                      {"within_s2", c.within_s2},
                      {"within_s3", c.within_s3},
                      {"count", c.count}};
  }
  return j;
}

nlohmann::json run_json(const ConfigurationRun& run) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& e : run.history.epochs) {
    nlohmann::json losses = nlohmann::json::object();
    for (const auto& l : e.losses) losses[task_name(l.task)] = {{"coarse", l.coarse}, {"fine", l.fine}};
    curve.push_back({{"epoch", e.epoch}, {"learning_rate", e.learning_rate}, {"total", e.total}, {"losses", losses}});
  }
  nlohmann::json tasks = nlohmann::json::array();
  for (const Task t : run.tasks) tasks.push_back(task_name(t));
  return {{"name", run.name},
          {"tasks", tasks},
          {"seed", run.seed},
          {"parameter_count", run.parameter_count},
          {"diverged", run.history.diverged},
          {"failure", run.history.failure},
          {"convergence", curve},
          {"held_out", metrics_json(run.metrics)}};
}

}  // namespace

std::string run_to_json(const ConfigurationRun& run) { return run_json(run).dump(2) + "\n"; }

std::string report_to_json(const CapacityReport& report) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) runs.push_back(run_json(r));
  return nlohmann::json{{"runs", runs}}.dump(2) + "\n";
}

// --- model file ---------------------------------------------------------------

namespace {

constexpr char kModelMagic[4] = {'C', 'K', 'T', 'N'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    if constexpr (std::is_same_v<T, double>) {
      put(std::bit_cast<std::uint64_t>(value));
    } else {
      using U = std::make_unsigned_t<T>;
      auto u = static_cast<U>(value);
      for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes.push_back(static_cast<char>(u & 0xFFu));
        if constexpr (sizeof(T) > 1) u = static_cast<U>(u >> 8);
      }
    }
  }
  std::string bytes;
};

class Reader {
 public:
  explicit Reader(std::string b) : bytes_(std::move(b)) {}
  template <typename T>
  T get() {
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(get<std::uint64_t>());
    } else {
      using U = std::make_unsigned_t<T>;
      if (pos_ + sizeof(T) > bytes_.size()) throw io::FormatError("model file truncated");
      U u = 0;
      for (std::size_t i = 0; i < sizeof(T); ++i) {
        u = static_cast<U>(u | (static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i)));
      }
      pos_ += sizeof(T);
      return static_cast<T>(u);
    }
  }
  const std::string& bytes() const { return bytes_; }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const Network& net, const std::filesystem::path& path) {
  const NetworkConfig& c = net.config();
  Writer w;
  for (const char ch : kModelMagic) w.bytes.push_back(ch);
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::int32_t>(c.input_height);
  w.put<std::int32_t>(c.input_width);
  for (const int t : c.trunk_channels) w.put<std::int32_t>(t);
  w.put<std::int32_t>(c.coarse_channels);
  w.put<std::int32_t>(c.fine_channels);
  w.put<std::int32_t>(c.global_grid);
  w.put<std::int32_t>(c.global_hidden);
  w.put<std::int32_t>(c.global_channels);
  std::uint32_t mask = 0;
  for (const Task t : c.task_set) mask |= 1u << static_cast<unsigned>(t);
  w.put<std::uint32_t>(mask);
  w.put<std::uint8_t>(c.heads_always_present ? 1 : 0);
  w.put<std::uint8_t>(c.activations ? 1 : 0);
  w.put<double>(c.learning_rate);
  w.put<double>(c.momentum);
  w.put<std::int32_t>(c.epochs);
  w.put<std::int32_t>(c.batch_size);
  w.put<std::uint64_t>(c.seed);
  w.put<double>(c.lr_decay);
  w.put<std::int32_t>(c.plateau_patience);
  w.put<double>(c.divergence_limit);
  for (const double tw : c.task_weights) w.put<double>(tw);
  w.put<double>(c.coarse_weight);
  w.put<double>(c.curvature_weight_exponent);
  const auto params = net.parameters();
  w.put<std::uint64_t>(params.size());
  for (const TensorBuffer* p : params) {
    w.put<std::int32_t>(p->channels);
    w.put<std::int32_t>(p->height);
    w.put<std::int32_t>(p->width);
    for (const double x : p->data) w.put<double>(x);
  }
  io::write_file_atomic(path, w.bytes);
}

Network load_model(const std::filesystem::path& path) {
  Reader r(io::read_file(path));
  if (r.bytes().size() < 8 || std::memcmp(r.bytes().data(), kModelMagic, 4) != 0) {
    throw io::FormatError(path.string() + ": not a curvkit model file");
  }
  r.skip(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw io::FormatError(path.string() + ": unsupported model version " + std::to_string(version));
  }
  NetworkConfig c;
  c.input_height = r.get<std::int32_t>();
  c.input_width = r.get<std::int32_t>();
  for (int& t : c.trunk_channels) t = r.get<std::int32_t>();
  c.coarse_channels = r.get<std::int32_t>();
  c.fine_channels = r.get<std::int32_t>();
  c.global_grid = r.get<std::int32_t>();
  c.global_hidden = r.get<std::int32_t>();
  c.global_channels = r.get<std::int32_t>();
  const auto mask = r.get<std::uint32_t>();
  c.task_set.clear();
  for (const Task t : kAllTasks) {
    if (mask & (1u << static_cast<unsigned>(t))) c.task_set.push_back(t);
  }
  c.heads_always_present = r.get<std::uint8_t>() != 0;
  c.activations = r.get<std::uint8_t>() != 0;
  c.learning_rate = r.get<double>();
  c.momentum = r.get<double>();
  c.epochs = r.get<std::int32_t>();
  c.batch_size = r.get<std::int32_t>();
  c.seed = r.get<std::uint64_t>();
  c.lr_decay = r.get<double>();
  c.plateau_patience = r.get<std::int32_t>();
  c.divergence_limit = r.get<double>();
  for (double& tw : c.task_weights) tw = r.get<double>();
  c.coarse_weight = r.get<double>();
  c.curvature_weight_exponent = r.get<double>();
  Network net(c);
  auto params = net.parameters();
  if (r.get<std::uint64_t>() != params.size()) throw io::FormatError(path.string() + ": parameter tensor count mismatch");
  for (TensorBuffer* p : params) {
    const int ch = r.get<std::int32_t>();
    const int h = r.get<std::int32_t>();
    const int wd = r.get<std::int32_t>();
    if (ch != p->channels || h != p->height || wd != p->width) {
      throw io::FormatError(path.string() + ": parameter shape mismatch");
    }
    for (double& x : p->data) x = r.get<double>();
  }
  if (r.pos() != r.bytes().size()) throw io::FormatError(path.string() + ": trailing bytes");
  return net;
}

}  // namespace curvkit::nn
