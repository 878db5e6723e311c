#include "fastpaint/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <new>
#include <random>

#include "fastpaint/compositor.hpp"
#include "fastpaint/error.hpp"
#include "fastpaint/grad.hpp"
#include "fastpaint/rasterizer.hpp"

namespace fastpaint {

std::string_view to_string(StackMode mode) { return mode == StackMode::Sequential ? "sequential" : "fss"; }

void BenchConfig::validate() const {
    if (stroke_counts.empty()) throw ConfigError("bench: no stroke counts");
    for (int n : stroke_counts)
        if (n < 1) throw ConfigError("bench: stroke counts must be >= 1");
    for (int k : k_values)
        if (k < 1 || k > kMaxTopK) throw ConfigError("bench: k must lie in [1, 10]");
    if (repeats < 3) throw ConfigError("bench: repeats must be >= 3");
    if (canvas < 1) throw ConfigError("bench: canvas must be >= 1");
}

std::vector<StrokeFrame> random_soft_frames(int n, int canvas, std::uint64_t seed, double softness_tau) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> extent(0.05, 0.3);
    RasterConfig cfg;
    cfg.h = canvas;
    cfg.w = canvas;
    cfg.softness_tau = softness_tau;
    std::vector<StrokeFrame> frames(n);
    for (int i = 0; i < n; ++i) {
        const double x = unit(rng), y = unit(rng), h = extent(rng), w = extent(rng), theta = unit(rng);
        const double r = unit(rng), g = unit(rng), b = unit(rng);
        rasterize_into(StrokeParams(StrokeKind::Oil, {x, y, h, w, theta, r, g, b}), cfg, RasterMode::Soft, frames[i]);
    }
    return frames;
}

std::uint64_t canvas_digest(const Canvas& canvas) {
    // FNV-1a over the raw doubles.
    std::uint64_t hash = 1469598103934665603ull;
    for (double v : canvas.pixels) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            hash ^= b;
            hash *= 1099511628211ull;
        }
    }
    return hash;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Canvas random_upstream(int canvas, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5bd1e995ull);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Canvas g(canvas, canvas);
    for (double& v : g.pixels) v = unit(rng);
    return g;
}

struct Timing {
    double forward_ms;
    double backward_ms;
    std::uint64_t digest;
};

Timing time_once(StackMode mode, int k, const std::vector<StrokeFrame>& frames, const Canvas& upstream) {
    volatile double sink = 0.0;
    if (mode == StackMode::Sequential) {
        const auto t0 = Clock::now();
        const SequentialTape tape = stack_sequential_taped(frames);
        const auto t1 = Clock::now();
        const CompositeAdjoint adj = backward_sequential(frames, tape, upstream);
        const auto t2 = Clock::now();
        sink = sink + adj.d_alpha.front();
        return {elapsed_ms(t0, t1), elapsed_ms(t1, t2), canvas_digest(tape.canvas)};
    }
    const auto t0 = Clock::now();
    const TopKSelection sel = build_topk(frames, k);
    const Canvas canvas = stack_selection(sel);
    const auto t1 = Clock::now();
    const LayerAdjoint layers = backward_layers(sel, upstream);
    const auto t2 = Clock::now();
    sink = sink + layers.d_alpha.front();
    return {elapsed_ms(t0, t1), elapsed_ms(t1, t2), canvas_digest(canvas)};
}

BenchRecord measure(StackMode mode, int k, const std::vector<StrokeFrame>& frames, const Canvas& upstream,
                    const BenchConfig& cfg) {
    BenchRecord rec;
    rec.n_strokes = static_cast<int>(frames.size());
    rec.mode = mode;
    rec.k = mode == StackMode::Fss ? k : 0;
    rec.canvas = cfg.canvas;
    rec.repeats = cfg.repeats;
    try {
        rec.output_digest = time_once(mode, k, frames, upstream).digest;  // warm-up
        std::vector<double> fwd, bwd, tot;
        for (int r = 0; r < cfg.repeats; ++r) {
            const Timing t = time_once(mode, k, frames, upstream);
            fwd.push_back(t.forward_ms);
            bwd.push_back(t.backward_ms);
            tot.push_back(t.forward_ms + t.backward_ms);
        }
        rec.forward_ms = median(fwd);
        rec.backward_ms = median(bwd);
        rec.total_ms = median(tot);
    } catch (const std::bad_alloc&) {
        rec.error = "out of memory";
    }
    return rec;
}

}  // namespace

std::vector<BenchRecord> run_benchmark(const BenchConfig& cfg) {
    cfg.validate();
    std::vector<BenchRecord> records;
    const Canvas upstream = random_upstream(cfg.canvas, cfg.seed);
    for (int n : cfg.stroke_counts) {
        std::vector<StrokeFrame> frames;
        try {
            frames = random_soft_frames(n, cfg.canvas, cfg.seed + static_cast<std::uint64_t>(n), cfg.softness_tau);
        } catch (const std::bad_alloc&) {
            BenchRecord rec;
            rec.n_strokes = n;
            rec.canvas = cfg.canvas;
            rec.repeats = cfg.repeats;
            rec.error = "out of memory";
            records.push_back(rec);
            continue;
        }
        records.push_back(measure(StackMode::Sequential, 0, frames, upstream, cfg));
        for (int k : cfg.k_values) records.push_back(measure(StackMode::Fss, k, frames, upstream, cfg));
    }
    return records;
}

void write_bench_csv(const std::vector<BenchRecord>& records, std::ostream& out) {
    out << "n_strokes,mode,k,canvas,repeats,forward_ms,backward_ms,total_ms\n";
    char line[256];
    for (const auto& r : records) {
        if (!r.error.empty()) continue;
        std::snprintf(line, sizeof line, "%d,%s,%d,%d,%d,%.3f,%.3f,%.3f\n", r.n_strokes,
                      std::string(to_string(r.mode)).c_str(), r.k, r.canvas, r.repeats, r.forward_ms, r.backward_ms,
                      r.total_ms);
        out << line;
    }
}

void write_bench_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_bench_csv(records, out);
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace fastpaint
