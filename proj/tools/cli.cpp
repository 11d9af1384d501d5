#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "curvkit/io.hpp"
#include "curvkit/metrics.hpp"
#include "curvkit/quadric.hpp"
#include "curvkit/segment.hpp"
#include "curvkit/synth.hpp"
#include "curvkit/toynet.hpp"

namespace curvkit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::array<const char*, 6> kSubcommands{"synth", "geometry", "train", "capacity-experiment", "eval",
                                                  "segment"};

void write_json(const json& j, const fs::path& path) { io::write_file_atomic(path, j.dump(2) + "\n"); }

std::pair<int, int> parse_size(const std::string& text) {
  int w = 0;
  int h = 0;
  char x = 0;
  std::istringstream in(text);
  if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || w <= 0 || h <= 0 || !in.eof()) {
    throw std::invalid_argument("expected WIDTHxHEIGHT, got '" + text + "'");
  }
  return {w, h};
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const unsigned long long s = std::stoull(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad seed '" + item + "'");
    seeds.push_back(s);
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  return seeds;
}

json depth_json(const metrics::DepthMetrics& d) {
  return {{"rel_abs", d.rel_abs}, {"rms_lin", d.rms_lin}, {"rms_log", d.rms_log}, {"delta1", d.delta1},
          {"delta2", d.delta2},   {"delta3", d.delta3},   {"count", d.count}};
}

json normals_json(const metrics::NormalMetrics& n) {
  return {{"mean_deg", n.mean_deg},       {"median_deg", n.median_deg}, {"within_11_25", n.within_11_25},
          {"within_22_5", n.within_22_5}, {"within_30", n.within_30},   {"count", n.count}};
}

json curvature_json(const metrics::CurvatureMetrics& c) {
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"rms_k1", c.rms_k1},
          {"rms_k2", c.rms_k2},
          {"median_planar", opt(c.median_planar)},
          {"median_nonplanar", opt(c.median_nonplanar)},
          {"within_s1", c.within_s1},
          {"within_s2", c.within_s2},
          {"within_s3", c.within_s3},
          {"count", c.count}};
}

CurvatureMap unscale(CurvatureMap c, double scale) {
  for (std::size_t i = 0; i < c.k1.size(); ++i) {
    c.k1[i] /= scale;
    c.k2[i] /= scale;
  }
  return c;
}

// --- subcommands --------------------------------------------------------------

struct SynthArgs {
  int scenes = 64;
  std::uint64_t seed = 7;
  double noise = 0.004;
  int augment = 0;
  fs::path out;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  const auto intr = synth::dataset_camera();
  auto samples = synth::make_dataset(a.scenes, intr, a.noise, a.seed);
  if (a.augment > 0) samples = synth::expand_with_augmentation(samples, a.augment, a.seed);
  fs::create_directories(a.out);
  const auto manifest = io::save_dataset(samples, a.out, a.seed, a.noise, a.scenes);
  const synth::DatasetLayout layout;
  io::write_file_atomic(a.out / "camera.cfg",
                        io::format_intrinsics(intr.rescaled(layout.target_width, layout.target_height)));
  out << "wrote " << manifest.entries.size() << " samples to " << a.out.string() << "\n";
  return 0;
}

struct GeometryArgs {
  fs::path depth;
  fs::path intrinsics;
  fs::path out_normals;
  fs::path out_curv;
  double radius = 18.0;
  std::string downsample;
};

int run_geometry(const GeometryArgs& a, std::ostream& out) {
  const DepthMap depth = io::depth_from_float_image(io::read_pfm(a.depth));
  const CameraIntrinsics intr = io::read_intrinsics(a.intrinsics);
  if (intr.width != depth.width() || intr.height != depth.height()) {
    throw std::invalid_argument("intrinsics are for " + std::to_string(intr.width) + "x" +
                                std::to_string(intr.height) + " but the depth map is " +
                                std::to_string(depth.width()) + "x" + std::to_string(depth.height()));
  }
  auto geo = quadric::dense_geometry(depth, intr, quadric::PatchSpec::rings(a.radius));
  if (!a.downsample.empty()) {
    const auto [w, h] = parse_size(a.downsample);
    geo.normals = resample_bicubic(geo.normals, w, h);
    geo.curvature = resample_bicubic(geo.curvature, w, h);
  }
  if (!a.out_normals.empty()) io::write_pfm(io::to_float_image(geo.normals), a.out_normals);
  if (!a.out_curv.empty()) io::write_pfm(io::to_float_image(geo.curvature), a.out_curv);
  out << "geometry " << geo.normals.width() << "x" << geo.normals.height() << "\n";
  return 0;
}

struct TrainArgs {
  fs::path data;
  std::string tasks = "depth,normals,curvature";
  std::uint64_t seed = 1;
  fs::path out;
  fs::path report;
  int epochs = 50;
  int batch = 1;
  double lr = 0.008;
};

nn::NetworkConfig train_config(const TrainArgs& a) {
  nn::NetworkConfig cfg;
  cfg.task_set = nn::parse_task_list(a.tasks);
  cfg.seed = a.seed;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  return cfg;
}

int run_train(const TrainArgs& a, std::ostream& out) {
  const auto samples = io::load_dataset(a.data);
  const auto cfg = train_config(a);
  const auto [train_samples, test_samples] = nn::split_dataset(samples);
  std::vector<nn::Example> examples;
  for (const auto& s : train_samples) examples.push_back(nn::make_example(s, cfg));

  nn::Network net(cfg);
  net.initialize(cfg.seed);
  nn::ConfigurationRun run;
  run.name = nn::format_task_list(cfg.task_set);
  run.tasks = cfg.task_set;
  run.seed = cfg.seed;
  run.parameter_count = net.parameter_count();
  run.history = nn::train(net, examples);
  if (!run.history.diverged) run.metrics = nn::evaluate(net, test_samples);
  if (!a.out.empty()) nn::save_model(net, a.out);
  if (!a.report.empty()) io::write_file_atomic(a.report, nn::run_to_json(run));
  if (run.history.diverged) throw std::runtime_error(run.history.failure);
  out << "trained " << run.name << " for " << run.history.epochs.size() << " epochs\n";
  return 0;
}

struct CapacityArgs {
  fs::path data;
  std::string seeds = "1,2,3";
  fs::path out;
  int epochs = 50;
  int batch = 1;
  double lr = 0.008;
};

int run_capacity(const CapacityArgs& a, std::ostream& out) {
  const auto samples = io::load_dataset(a.data);
  nn::NetworkConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  const auto seeds = parse_seeds(a.seeds);
  const auto report = nn::run_capacity_experiment(samples, cfg, seeds);
  io::write_file_atomic(a.out, nn::report_to_json(report));
  out << "capacity experiment: " << report.runs.size() << " runs\n";
  return 0;
}

struct EvalArgs {
  std::string task;
  fs::path pred;
  fs::path gt;
  fs::path mask;
  fs::path json_out;
  double pred_scale = 1.0;
  double gt_scale = 1.0;
  bool per_channel = false;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const auto task = nn::parse_task(a.task);
  const io::FloatImage pred = io::read_pfm(a.pred);
  const io::FloatImage gt = io::read_pfm(a.gt);
  Mask mask(gt.width, gt.height, 1);
  if (!a.mask.empty()) mask = io::mask_from_float_image(io::read_pfm(a.mask));
  json j;
  j["task"] = a.task;
  switch (task) {
    case nn::Task::kDepth:
      j["metrics"] = depth_json(metrics::eval_depth(io::depth_from_float_image(pred), io::depth_from_float_image(gt), mask));
      break;
    case nn::Task::kNormals:
      j["metrics"] =
          normals_json(metrics::eval_normals(io::normals_from_float_image(pred), io::normals_from_float_image(gt), mask));
      break;
    case nn::Task::kCurvature: {
      const auto mode = a.per_channel ? metrics::CurvatureThresholdMode::kPerChannel
                                      : metrics::CurvatureThresholdMode::kMeanCurvature;
      j["metrics"] = curvature_json(metrics::eval_curvature(unscale(io::curvature_from_float_image(pred), a.pred_scale),
                                                            unscale(io::curvature_from_float_image(gt), a.gt_scale),
                                                            mask, mode));
      break;
    }
  }
  if (!a.json_out.empty()) write_json(j, a.json_out);
  out << j.dump(2) << "\n";
  return 0;
}

struct SegmentArgs {
  fs::path rgb;
  fs::path depth;
  fs::path curv;
  segment::BorderWeights w;
  double curv_scale = 1.0;
  std::string reduction = "mean-abs";
  fs::path out;
};

int run_segment(const SegmentArgs& a, std::ostream& out) {
  const DepthMap depth = io::depth_from_float_image(io::read_pfm(a.depth));
  const CurvatureMap curv = unscale(io::curvature_from_float_image(io::read_pfm(a.curv)), a.curv_scale);
  RgbImage rgb = io::read_rgb(a.rgb);
  if (rgb.width() != depth.width() || rgb.height() != depth.height()) {
    rgb = resample_bicubic(rgb, depth.width(), depth.height());
  }
  segment::CurvatureReduction r = segment::CurvatureReduction::kMeanAbs;
  if (a.reduction == "max-abs") {
    r = segment::CurvatureReduction::kMaxAbs;
  } else if (a.reduction == "abs-mean") {
    r = segment::CurvatureReduction::kAbsMean;
  } else if (a.reduction != "mean-abs") {
    throw std::invalid_argument("unknown curvature reduction '" + a.reduction + "'");
  }
  const segment::SceneMaps maps{rgb, depth, curv, std::nullopt, std::nullopt};
  const auto borders =
      segment::segment_scene(maps, segment::Source::kGroundTruth, segment::Source::kGroundTruth, a.w, r);
  io::write_mask_png(borders, a.out);
  const auto n = std::count(borders.values().begin(), borders.values().end(), std::uint8_t{1});
  out << "border pixels: " << n << "\n";
  return 0;
}

std::string version_text() {
  std::ostringstream s;
  s << "curvkit " << CURVKIT_VERSION_STRING << "\n"
    << "manifest format " << io::kManifestVersion << "\n"
    << "model format " << nn::kModelFormatVersion << "\n"
    << "pfm: little-endian write, either endianness read\n";
  return s.str();
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth-derived surface geometry, multi-task losses and metrics", "curvkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print program and file format versions");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic dataset");
  synth_cmd->add_option("--scenes", synth_args.scenes, "Number of scenes")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed");
  synth_cmd->add_option("--noise", synth_args.noise, "Depth noise std-dev (m)")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--augment", synth_args.augment, "Augmented copies per scene")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();

  GeometryArgs geo_args;
  auto* geo_cmd = app.add_subcommand("geometry", "Normals and principal curvatures from a depth map");
  geo_cmd->add_option("--depth", geo_args.depth, "Depth PFM")->required()->check(CLI::ExistingFile);
  geo_cmd->add_option("--intrinsics", geo_args.intrinsics, "Camera file")->required()->check(CLI::ExistingFile);
  geo_cmd->add_option("--out-normals", geo_args.out_normals, "Normal PFM to write");
  geo_cmd->add_option("--out-curv", geo_args.out_curv, "Curvature PFM to write");
  geo_cmd->add_option("--radius", geo_args.radius, "Patch radius in pixels")->check(CLI::PositiveNumber);
  geo_cmd->add_option("--downsample", geo_args.downsample, "Resample outputs to WxH");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the two-scale network");
  train_cmd->add_option("--data", train_args.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--tasks", train_args.tasks, "Comma separated: depth,normals,curvature");
  train_cmd->add_option("--seed", train_args.seed, "Initialisation and shuffling seed");
  train_cmd->add_option("--out", train_args.out, "Model file to write");
  train_cmd->add_option("--report", train_args.report, "JSON report to write");
  train_cmd->add_option("--epochs", train_args.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch", train_args.batch, "Batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train_args.lr, "Learning rate")->check(CLI::NonNegativeNumber);

  CapacityArgs cap_args;
  auto* cap_cmd = app.add_subcommand("capacity-experiment", "Single-task vs joint training at equal capacity");
  cap_cmd->add_option("--data", cap_args.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  cap_cmd->add_option("--seeds", cap_args.seeds, "Comma separated seeds");
  cap_cmd->add_option("--out", cap_args.out, "JSON report")->required();
  cap_cmd->add_option("--epochs", cap_args.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  cap_cmd->add_option("--batch", cap_args.batch, "Batch size")->check(CLI::PositiveNumber);
  cap_cmd->add_option("--lr", cap_args.lr, "Learning rate")->check(CLI::NonNegativeNumber);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score a prediction against ground truth");
  eval_cmd->add_option("--task", eval_args.task, "depth, normals or curvature")
      ->required()
      ->check(CLI::IsMember({"depth", "normals", "curvature"}));
  eval_cmd->add_option("--pred", eval_args.pred, "Predicted PFM")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", eval_args.gt, "Ground-truth PFM")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--mask", eval_args.mask, "Mask PFM (finite nonzero = valid)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--json", eval_args.json_out, "JSON report to write");
  eval_cmd->add_option("--pred-scale", eval_args.pred_scale, "Curvature storage scale of --pred")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--gt-scale", eval_args.gt_scale, "Curvature storage scale of --gt")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--per-channel", eval_args.per_channel, "Curvature thresholds on max per-channel error");

  SegmentArgs seg_args;
  auto* seg_cmd = app.add_subcommand("segment", "Border map from colour, depth and curvature");
  seg_cmd->add_option("--rgb", seg_args.rgb, "RGB image (png, ppm or pfm)")->required()->check(CLI::ExistingFile);
  seg_cmd->add_option("--depth", seg_args.depth, "Depth PFM")->required()->check(CLI::ExistingFile);
  seg_cmd->add_option("--curv", seg_args.curv, "Curvature PFM")->required()->check(CLI::ExistingFile);
  seg_cmd->add_option("--curv-scale", seg_args.curv_scale, "Storage scale of --curv")->check(CLI::PositiveNumber);
  seg_cmd->add_option("--wi", seg_args.w.w_intensity, "Intensity weight");
  seg_cmd->add_option("--wd", seg_args.w.w_depth, "Depth weight");
  seg_cmd->add_option("--wc", seg_args.w.w_curvature, "Curvature weight");
  seg_cmd->add_option("--thresh", seg_args.w.delta_thresh, "Border threshold");
  seg_cmd->add_option("--reduction", seg_args.reduction, "mean-abs, max-abs or abs-mean");
  seg_cmd->add_option("--out", seg_args.out, "Border PNG")->required();

  if (argc >= 2) {
    const std::string first = argv[1];
    if (first == "--version") {
      out << version_text();
      return 0;
    }
    if (!first.empty() && first[0] != '-' &&
        std::find(kSubcommands.begin(), kSubcommands.end(), first) == kSubcommands.end()) {
      err << "curvkit: unknown subcommand '" << first << "'\n\n" << app.help();
      return 2;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth_args, out);
    if (geo_cmd->parsed()) return run_geometry(geo_args, out);
    if (train_cmd->parsed()) return run_train(train_args, out);
    if (cap_cmd->parsed()) return run_capacity(cap_args, out);
    if (eval_cmd->parsed()) return run_eval(eval_args, out);
    if (seg_cmd->parsed()) return run_segment(seg_args, out);
  } catch (const std::exception& e) {
    err << "curvkit: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace curvkit::cli
