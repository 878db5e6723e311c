#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "fastpaint/types.hpp"

namespace fastpaint {

enum class StackMode { Sequential, Fss };

std::string_view to_string(StackMode mode);

struct BenchRecord {
    int n_strokes = 0;
    StackMode mode = StackMode::Sequential;
    int k = 0;  // 0 for sequential stacking
    int canvas = 0;
    int repeats = 0;
    double forward_ms = 0.0;   // median
    double backward_ms = 0.0;  // median
    double total_ms = 0.0;     // median of forward + backward per repeat
    std::uint64_t output_digest = 0;  // hash of the stacked canvas
    std::string error;                // non-empty when the record failed
};

struct BenchConfig {
    std::vector<int> stroke_counts = {64, 256, 1024};
    std::vector<int> k_values = {10};
    int canvas = 128;
    int repeats = 5;
    std::uint64_t seed = 0;
    double softness_tau = 1.0;

    void validate() const;
};

/// Random oil strokes rendered by the soft rasterizer: a reproducible
/// workload for timing and fidelity checks.
std::vector<StrokeFrame> random_soft_frames(int n, int canvas, std::uint64_t seed, double softness_tau = 1.0);

/// Times the forward pass (stacking plus whatever the backward pass needs)
/// and the backward pass of sequential and FSS stacking on identical inputs.
/// One warm-up run precedes the timed repeats; medians are reported.
std::vector<BenchRecord> run_benchmark(const BenchConfig& cfg);

// CSV header: n_strokes,mode,k,canvas,repeats,forward_ms,backward_ms,total_ms
void write_bench_csv(const std::vector<BenchRecord>& records, std::ostream& out);
void write_bench_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);

std::uint64_t canvas_digest(const Canvas& canvas);

}  // namespace fastpaint
