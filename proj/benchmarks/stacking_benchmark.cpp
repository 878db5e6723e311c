#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include <fastpaint/bench.hpp>
#include <fastpaint/compositor.hpp>
#include <fastpaint/grad.hpp>
#include <fastpaint/rasterizer.hpp>

using namespace fastpaint;

namespace {

constexpr int kCanvas = 128;

const std::vector<StrokeFrame>& frames_for(int n) {
    static std::map<int, std::vector<StrokeFrame>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, random_soft_frames(n, kCanvas, static_cast<std::uint64_t>(n))).first;
    return it->second;
}

Canvas upstream() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Canvas g(kCanvas, kCanvas);
    for (double& v : g.pixels) v = unit(rng);
    return g;
}

void BM_SequentialForward(benchmark::State& state) {
    const auto& frames = frames_for(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stack_sequential_taped(frames));
}

void BM_SequentialBackward(benchmark::State& state) {
    const auto& frames = frames_for(static_cast<int>(state.range(0)));
    const SequentialTape tape = stack_sequential_taped(frames);
    const Canvas g = upstream();
    for (auto _ : state) benchmark::DoNotOptimize(backward_sequential(frames, tape, g));
}

void BM_FssForward(benchmark::State& state) {
    const auto& frames = frames_for(static_cast<int>(state.range(0)));
    const int k = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(stack_selection(build_topk(frames, k)));
}

void BM_FssBackward(benchmark::State& state) {
    const auto& frames = frames_for(static_cast<int>(state.range(0)));
    const TopKSelection sel = build_topk(frames, static_cast<int>(state.range(1)));
    const Canvas g = upstream();
    for (auto _ : state) benchmark::DoNotOptimize(backward_layers(sel, g));
}

void BM_FssBackwardScattered(benchmark::State& state) {
    const auto& frames = frames_for(static_cast<int>(state.range(0)));
    const TopKSelection sel = build_topk(frames, static_cast<int>(state.range(1)));
    const Canvas g = upstream();
    for (auto _ : state) benchmark::DoNotOptimize(backward_fss(frames, sel, g));
}

void BM_SoftRaster(benchmark::State& state) {
    RasterConfig cfg;
    const StrokeParams s(StrokeKind::Oil, {0.5, 0.5, 0.2, 0.3, 0.25, 0.1, 0.5, 0.9});
    StrokeFrame frame;
    for (auto _ : state) {
        rasterize_into(s, cfg, RasterMode::Soft, frame);
        benchmark::DoNotOptimize(frame.alpha.data());
    }
}

}  // namespace

BENCHMARK(BM_SequentialForward)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SequentialBackward)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FssForward)->ArgsProduct({{64, 256, 1024}, {10}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FssBackward)->ArgsProduct({{64, 256, 1024}, {1, 10}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FssBackwardScattered)->ArgsProduct({{64, 256, 1024}, {10}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SoftRaster)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
