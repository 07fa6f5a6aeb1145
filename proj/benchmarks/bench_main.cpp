#include <benchmark/benchmark.h>

#include <random>

#include "resin/cvxeda.hpp"
#include "resin/imaging.hpp"
#include "resin/nn.hpp"
#include "resin/qp.hpp"
#include "resin/synth.hpp"

using namespace resin;

namespace {

qp::QpProblem random_qp(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd R(n, n), G(m, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = gauss(rng);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
  qp::QpProblem p;
  p.P = Eigen::SparseMatrix<double>(
      (R.transpose() * R + 0.1 * Eigen::MatrixXd::Identity(n, n)).sparseView());
  p.q = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
  p.G = G.sparseView();
  Eigen::VectorXd x0 =
      Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
  Eigen::VectorXd gx = p.G * x0;
  p.lower = gx.array() - 0.5;
  p.upper = gx.array() + 0.5;
  return p;
}

void bm_qp_solve(benchmark::State& state) {
  auto p = random_qp(static_cast<int>(state.range(0)),
                     static_cast<int>(state.range(0)), 42);
  for (auto _ : state) {
    auto sol = qp::solve_qp(p);
    benchmark::DoNotOptimize(sol.objective);
  }
}
BENCHMARK(bm_qp_solve)->Arg(20)->Arg(50)->Arg(100);

void bm_decompose(benchmark::State& state) {
  synth::GenConfig cfg;
  cfg.duration_s = static_cast<double>(state.range(0));
  auto [signal, gt] = synth::generate(cfg, 3);
  cvxeda::Decomposer decomposer;
  decomposer(signal);  // warm the length-keyed workspace cache
  for (auto _ : state) {
    auto d = decomposer(signal);
    benchmark::DoNotOptimize(d.driver.sum());
  }
}
BENCHMARK(bm_decompose)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void bm_image_tensor(benchmark::State& state) {
  synth::GenConfig cfg;
  cfg.duration_s = 30.0;
  auto [signal, gt] = synth::generate(cfg, 4);
  auto d = cvxeda::decompose(signal);
  imaging::ChannelStats stats;
  std::mt19937_64 rng(0);
  for (auto _ : state) {
    auto t = imaging::make_image_tensor(signal, d, stats,
                                        imaging::ImagingMode::train, rng);
    benchmark::DoNotOptimize(t.channels[0](0, 0));
  }
}
BENCHMARK(bm_image_tensor)->Unit(benchmark::kMillisecond);

void bm_subnet_forward(benchmark::State& state) {
  nn::ResSiConfig cfg;
  cfg.stage_channels = {4, 8, 16, 32};
  cfg.blocks_per_stage = 1;
  std::mt19937_64 rng(7);
  nn::Subnet net(cfg, rng);
  nn::Vol x(3, imaging::kImageSize, imaging::kImageSize);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (double& v : x.data) v = dist(rng);
  for (auto _ : state) {
    auto out = net.forward(x);
    benchmark::DoNotOptimize(out.sum());
  }
}
BENCHMARK(bm_subnet_forward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
