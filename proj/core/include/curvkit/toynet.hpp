#pragma once

#include "curvkit/geom.hpp"
#include "curvkit/metrics.hpp"
#include "curvkit/synth.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvkit::nn {

enum class Task { kDepth = 0, kNormals = 1, kCurvature = 2 };
inline constexpr std::array<Task, 3> kAllTasks{Task::kDepth, Task::kNormals, Task::kCurvature};

/// Output channels of a task head: log depth (1), normal xyz (3), k1 k2 (2).
int task_channels(Task t);
const char* task_name(Task t);
Task parse_task(const std::string& name);
std::vector<Task> parse_task_list(const std::string& comma_separated);
std::string format_task_list(const std::vector<Task>& tasks);

/// Dense (channels, height, width) buffer with a same-shaped gradient accumulator.
struct TensorBuffer {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;
  std::vector<double> grad;

  TensorBuffer() = default;
  TensorBuffer(int c, int h, int w) : channels(c), height(h), width(w), data(size(), 0.0), grad(size(), 0.0) {}

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  double& at(int c, int y, int x) { return data[index(c, y, x)]; }
  double at(int c, int y, int x) const { return data[index(c, y, x)]; }
  std::span<double> plane(int c) { return {data.data() + static_cast<std::size_t>(c) * height * width, plane_size()}; }
  std::span<const double> plane(int c) const {
    return {data.data() + static_cast<std::size_t>(c) * height * width, plane_size()};
  }
  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
  bool all_finite() const;
};

/// 2-D convolution, square kernel, optional ReLU on the output.
struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 5;
  int stride = 1;
  int pad = 2;
  bool relu = true;
  TensorBuffer weight;  // (out_channels, in_channels, kernel * kernel)
  TensorBuffer bias;    // (out_channels, 1, 1)

  Conv2d() = default;
  Conv2d(int in, int out, int kernel_size, int stride_, int pad_, bool relu_);

  int output_size(int input) const { return (input + 2 * pad - kernel) / stride + 1; }
  std::size_t parameter_count() const { return weight.size() + bias.size(); }
  double w(int o, int i, int ky, int kx) const {
    return weight.data[(static_cast<std::size_t>(o) * in_channels + i) * kernel * kernel + ky * kernel + kx];
  }

  /// `out` is resized as needed. With `activations` false the ReLU is skipped.
  void forward(const TensorBuffer& in, TensorBuffer& out, bool activations) const;
  /// Reads out.grad (gradient w.r.t. the activated output), accumulates
  /// parameter gradients and, when `in_grad` is true, in.grad.
  void backward(TensorBuffer& in, TensorBuffer& out, bool activations, bool in_grad);
};

/// Hyperparameters. The full-scale reference setup used 74x55 coarse
/// and 147x109 fine resolutions, VGG16 trunk, lr 0.1, momentum 0.95, 50 epochs,
/// batch 16.
struct NetworkConfig {
  int input_height = 64;
  int input_width = 64;
  std::array<int, 3> trunk_channels{8, 16, 16};
  int coarse_channels = 16;
  int fine_channels = 8;
  /// Global path: trunk output average-pooled to global_grid x global_grid,
  /// two fully connected layers, reshaped to global_channels maps and
  /// broadcast back over the coarse grid. global_channels = 0 disables it.
  int global_grid = 4;
  int global_hidden = 128;
  int global_channels = 8;
  std::vector<Task> task_set{Task::kDepth, Task::kNormals, Task::kCurvature};
  bool heads_always_present = true;
  bool activations = true;

  double learning_rate = 0.008;
  double momentum = 0.95;
  int epochs = 50;
  int batch_size = 1;
  std::uint64_t seed = 1;
  double lr_decay = 0.5;       // applied on plateau
  int plateau_patience = 4;    // epochs without a new best total loss
  double divergence_limit = 1e6;

  std::array<double, 3> task_weights{1.0, 1.0, 1.0};  // indexed by Task
  double coarse_weight = 1.0;
  double curvature_weight_exponent = -2.0;

  void validate() const;
  bool trains(Task t) const;
  /// Tasks with a prediction stack in the graph.
  std::vector<Task> built_tasks() const;
};

struct TaskSolver {
  Task task = Task::kDepth;
  double weight = 1.0;
};

/// The depth head regresses log(depth) - kLogDepthOffset, which keeps the
/// coarse depth map roughly zero-mean where it re-enters the fine stage.
inline constexpr double kLogDepthOffset = 0.9162907318741551;  // log(2.5 m)

/// Per-sample training targets at one scale.
struct ScaleTargets {
  Grid<double> log_depth;  // offset by kLogDepthOffset
  Grid<double> depth;
  Mask depth_mask;
  NormalMap normals;
  Grid<double> k1;  // stored (scaled) curvature units
  Grid<double> k2;
  Mask curvature_mask;
};

struct Example {
  TensorBuffer input;
  ScaleTargets fine;
  ScaleTargets coarse;
};

/// Converts a dataset sample; targets are 2x2-averaged for the coarse scale.
Example make_example(const synth::TrainingSample& sample, const NetworkConfig& config);

/// Centred RGB planes (value - 0.5) followed by pixel-centre x and y in [-1, 1].
/// A purely convolutional trunk has no other way to know where a pixel is.
inline constexpr int kInputChannels = 5;
TensorBuffer input_tensor(const RgbImage& rgb);

struct Predictions {
  std::array<std::optional<TensorBuffer>, 3> coarse;
  std::array<std::optional<TensorBuffer>, 3> fine;
};

class Network {
 public:
  explicit Network(NetworkConfig config);

  const NetworkConfig& config() const { return config_; }
  std::size_t parameter_count() const;
  std::vector<TensorBuffer*> parameters();
  std::vector<const TensorBuffer*> parameters() const;
  bool has_stack(Task t) const { return stacks_[static_cast<std::size_t>(t)].has_value(); }

  /// Trunk, global layers, then per-task coarse stacks, then per-task fine
  /// stacks; each stack is (conv, conv, head).
  std::vector<Conv2d*> layers();
  const Conv2d& trunk(int i) const { return trunk_[static_cast<std::size_t>(i)]; }
  bool has_global() const { return config_.global_channels > 0; }
  const Conv2d& coarse(Task t, int i) const;
  const Conv2d& fine(Task t, int i) const;

  /// Gaussian fan-in initialisation (variance 2 / fan_in), zero biases.
  void initialize(std::uint64_t seed);
  void zero_parameters();
  void zero_grad();

  Predictions forward(const TensorBuffer& input);
  Predictions forward(const RgbImage& rgb) { return forward(input_tensor(rgb)); }

  /// Backpropagates the gradients written into the most recent forward pass'
  /// head outputs (see head_output) into parameter gradients.
  void backward();
  /// Head output of the last forward pass; write loss gradients into its `grad`.
  TensorBuffer& head_output(Task t, bool fine);

 private:
  struct Stack {
    std::array<Conv2d, 3> coarse;
    std::array<Conv2d, 3> fine;
  };
  struct StackActivations {
    std::array<TensorBuffer, 3> coarse;
    std::array<TensorBuffer, 3> fine;
  };

  NetworkConfig config_;
  std::array<Conv2d, 3> trunk_;
  std::array<Conv2d, 2> global_;  // fully connected, as 1x1 convolutions on a 1x1 raster
  std::array<std::optional<Stack>, 3> stacks_;

  TensorBuffer input_;
  std::array<TensorBuffer, 3> trunk_out_;
  TensorBuffer pooled_;
  std::array<TensorBuffer, 2> global_out_;
  TensorBuffer coarse_in_;
  std::array<StackActivations, 3> acts_;
  TensorBuffer concat_;
  int concat_skip_channels_ = 0;
};

struct OptimizerState {
  double learning_rate = 0.008;
  double momentum = 0.95;
  std::vector<std::vector<double>> velocity;  // one per parameter tensor
};

OptimizerState make_optimizer(const Network& net);

/// Nesterov momentum in the form
///   v <- mu v - lr g;   w <- w + mu v - lr g
void nesterov_step(Network& net, OptimizerState& state);

struct TaskLoss {
  Task task = Task::kDepth;
  double coarse = 0.0;
  double fine = 0.0;
};

/// Raised when a solver produces a NaN/inf loss.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(Task task, const char* scale, double value);
  Task task;
  std::string scale;
};

/// Zeroes gradients, runs every example through forward/backward and
/// accumulates the weighted, per-pixel-normalised, batch-averaged losses.
std::vector<TaskLoss> compute_gradients(Network& net, std::span<const Example> batch,
                                        std::span<const TaskSolver> solvers);

std::vector<TaskLoss> backward_and_step(Network& net, std::span<const Example> batch,
                                        std::span<const TaskSolver> solvers, OptimizerState& state);

/// Solvers for every trained task with the configured weights.
std::vector<TaskSolver> default_solvers(const NetworkConfig& config);

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  std::vector<TaskLoss> losses;  // mean over batches
  double total = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  bool diverged = false;
  std::string failure;
};

/// Single-threaded, deterministic in config.seed.
TrainingHistory train(Network& net, std::span<const Example> train_set);

struct PredictedMaps {
  DepthMap depth;
  NormalMap normals;
  CurvatureMap curvature;  // unscaled, m^-1
};

/// Fine-scale predictions as metric maps; curvature is divided by `curvature_scale`.
PredictedMaps predict(Network& net, const RgbImage& rgb, double curvature_scale = synth::kCurvatureStorageScale);

struct HeldOutMetrics {
  std::optional<metrics::DepthMetrics> depth;
  std::optional<metrics::NormalMetrics> normals;
  std::optional<metrics::CurvatureMetrics> curvature;
};

/// Pools every held-out pixel into one metric table per trained task. A task
/// whose prediction is invalid everywhere (e.g. after divergence) stays unset.
HeldOutMetrics evaluate(Network& net, std::span<const synth::TrainingSample> samples);

/// Held-out split: the last max(1, n / 8) samples.
std::pair<std::vector<synth::TrainingSample>, std::vector<synth::TrainingSample>> split_dataset(
    const std::vector<synth::TrainingSample>& samples);

struct ConfigurationRun {
  std::string name;
  std::vector<Task> tasks;
  std::uint64_t seed = 0;
  std::size_t parameter_count = 0;
  TrainingHistory history;
  HeldOutMetrics metrics;
};

struct CapacityReport {
  std::vector<ConfigurationRun> runs;
};

/// The four task sets used for the fixed-capacity comparison.
std::vector<std::vector<Task>> capacity_task_sets();

/// Trains depth / normals / depth+normals / depth+normals+curvature with the
/// same capacity and seeds, evaluating each on the held-out split.
CapacityReport run_capacity_experiment(const std::vector<synth::TrainingSample>& dataset,
                                       const NetworkConfig& base_config, std::span<const std::uint64_t> seeds);

std::string report_to_json(const CapacityReport& report);
std::string run_to_json(const ConfigurationRun& run);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

}  // namespace curvkit::nn
