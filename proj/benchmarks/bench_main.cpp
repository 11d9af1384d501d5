#include "curvkit/losses.hpp"
#include "curvkit/quadric.hpp"
#include "curvkit/synth.hpp"
#include "curvkit/toynet.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace curvkit;

Grid<double> noise_grid(int w, int h, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Grid<double> g(w, h);
  for (auto& x : g.values()) x = d(rng);
  return g;
}

// Arg: image width; height is 3/4 of it, radius scales with it.
void BM_DenseGeometry(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const auto intr = CameraIntrinsics::default_vga().rescaled(w, w * 3 / 4);
  const auto depth = synth::render(synth::sphere_scene(0.5, 2.0), intr).depth;
  const auto spec = quadric::PatchSpec::rings(18.0 * w / 640.0);
  for (auto _ : state) benchmark::DoNotOptimize(quadric::dense_geometry(depth, intr, spec));
  state.SetItemsProcessed(state.iterations() * w * (w * 3 / 4));
}
BENCHMARK(BM_DenseGeometry)->Arg(160)->Arg(320)->Arg(640)->Unit(benchmark::kMillisecond);

void BM_ConvForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  nn::Conv2d conv(c, c, 3, 1, 1, true);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 0.1);
  for (auto& x : conv.weight.data) x = d(rng);
  nn::TensorBuffer in(c, 64, 64), out;
  for (auto& x : in.data) x = d(rng);
  for (auto _ : state) {
    conv.forward(in, out, true);
    benchmark::DoNotOptimize(out.data.data());
  }
}
BENCHMARK(BM_ConvForward)->Arg(8)->Arg(16);

void BM_TrainStep(benchmark::State& state) {
  const nn::NetworkConfig cfg;
  const auto ds = synth::make_dataset(1, synth::dataset_camera(), 0.004, 1);
  const std::vector<nn::Example> ex{nn::make_example(ds[0], cfg)};
  nn::Network net(cfg);
  net.initialize(1);
  auto opt = nn::make_optimizer(net);
  const auto solvers = nn::default_solvers(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(nn::backward_and_step(net, ex, solvers, opt));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_DepthLoss(benchmark::State& state) {
  const auto p = noise_grid(32, 32, 1, -1, 1), g = noise_grid(32, 32, 2, -1, 1);
  const Mask m(32, 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(losses::depth_loss(p, g, m));
}
BENCHMARK(BM_DepthLoss);

void BM_NormalLoss(benchmark::State& state) {
  const std::vector<Grid<double>> p{noise_grid(32, 32, 1, -1, 1), noise_grid(32, 32, 2, -1, 1),
                                    noise_grid(32, 32, 3, -1, 0)};
  NormalMap g(32, 32);
  for (auto& n : g.normal.values()) n = Eigen::Vector3d(0, 0, -1);
  for (auto& v : g.valid.values()) v = 1;
  const Mask m(32, 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(losses::normal_loss(p, g, m));
}
BENCHMARK(BM_NormalLoss);

void BM_CurvatureLoss(benchmark::State& state) {
  const auto p1 = noise_grid(32, 32, 1, -2, 2), p2 = noise_grid(32, 32, 2, -2, 2);
  const auto g1 = noise_grid(32, 32, 3, -2, 2), g2 = noise_grid(32, 32, 4, -2, 2);
  const auto d = noise_grid(32, 32, 5, 0.5, 5);
  const Mask m(32, 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(losses::curvature_loss(p1, p2, g1, g2, d, m));
}
BENCHMARK(BM_CurvatureLoss);

}  // namespace

BENCHMARK_MAIN();
