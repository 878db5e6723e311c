#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fastpaint/grad.hpp"
#include "fastpaint/losses.hpp"
#include "fastpaint/rasterizer.hpp"
#include "fastpaint/types.hpp"

namespace fastpaint {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam over a flat parameter vector with projection onto [0, 1] after
/// every step.
class ProjectedAdam {
public:
    ProjectedAdam(std::size_t size, double learning_rate, AdamConfig cfg = {});

    void step(std::span<double> params, std::span<const double> grad);
    int steps_taken() const { return t_; }

private:
    double lr_;
    AdamConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    int t_ = 0;
};

struct PaintConfig {
    int n_strokes = 256;  // per tile
    int steps = 500;
    double learning_rate = 0.02;
    AdamConfig adam;
    std::uint64_t seed = 0;
    bool use_fss = true;
    int k = kDefaultTopK;
    LossConfig loss;
    StrokeKind kind = StrokeKind::Oil;
    int tile_size = 128;  // square optimization canvas
    int tile_rows = 1;
    int tile_cols = 1;
    double softness_tau = 1.0;
    int bezier_samples = 32;
    std::shared_ptr<const ScalarMap> texture;
    int threads = 1;  // tiles optimized concurrently

    void validate() const;
    RasterConfig raster_config() const;
};

struct PaintResult {
    StrokeSequence sequence;
    Canvas canvas;                   // hard-mode sequential render of `sequence`
    std::vector<double> loss_trace;  // training loss per step
    double best_loss = 0.0;          // min over loss_trace
    double wall_time = 0.0;          // seconds
};

/// Jittered-grid initialization with colors sampled from the target.
StrokeSequence init_strokes(const Canvas& target, int n, StrokeKind kind, std::uint64_t seed);

/// Optimizes all strokes jointly through the soft rasterizer, compositor and
/// loss. The target is resampled to the tile size when needed. Returns the
/// best parameters seen. Throws NumericError on a non-finite loss or gradient.
PaintResult optimize(const Canvas& target, const PaintConfig& cfg);

/// Splits the target into tile_rows x tile_cols tiles (edge-replicated when the
/// size does not divide), optimizes each tile independently and remaps the
/// strokes into the normalized space of the whole image, tile-major.
PaintResult paint_tiled(const Canvas& target, const PaintConfig& cfg);

/// Renders a sequence at h x w by sequential stacking, one stroke at a time.
Canvas render_sequence(const StrokeSequence& seq, int h, int w, RasterMode mode,
                       std::shared_ptr<const ScalarMap> texture = {}, double softness_tau = 1.0,
                       int bezier_samples = 32);

}  // namespace fastpaint
