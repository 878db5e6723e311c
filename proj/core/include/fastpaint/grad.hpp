#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fastpaint/compositor.hpp"
#include "fastpaint/losses.hpp"
#include "fastpaint/rasterizer.hpp"
#include "fastpaint/types.hpp"

namespace fastpaint {

/// Gradients of a scalar loss with respect to every frame's alpha and color
/// maps, laid out frame-major like the forward frames.
struct CompositeAdjoint {
    int n = 0;
    int h = 0;
    int w = 0;
    std::vector<double> d_alpha;  // n x (h * w)
    std::vector<double> d_color;  // n x (h * w) x 3

    CompositeAdjoint() = default;
    CompositeAdjoint(int frames, int height, int width);

    std::size_t pixel_count() const { return static_cast<std::size_t>(h) * w; }
    double alpha(int frame, std::size_t pixel) const { return d_alpha[frame * pixel_count() + pixel]; }
    double color(int frame, std::size_t pixel, int c) const {
        return d_color[(frame * pixel_count() + pixel) * 3 + c];
    }
};

/// Gradients with respect to the gathered per-slot values of a TopKSelection.
/// This is the sparse form of the FSS backward: entries only exist where a
/// stroke was selected.
struct LayerAdjoint {
    int k = 0;
    int h = 0;
    int w = 0;
    std::vector<double> d_alpha;  // (h * w) x k
    std::vector<double> d_color;  // (h * w) x k x 3
};

/// Reverse sweep of sequential stacking, O(N) per pixel. The tape overload
/// reuses intermediates recorded by stack_sequential_taped.
CompositeAdjoint backward_sequential(std::span<const StrokeFrame> frames, const Canvas& d_canvas);
CompositeAdjoint backward_sequential(std::span<const StrokeFrame> frames, const SequentialTape& tape,
                                     const Canvas& d_canvas);

/// Reverse sweep of the k-step recursion over a selection, O(k) per pixel.
LayerAdjoint backward_layers(const TopKSelection& selection, const Canvas& d_canvas);

/// Scatter-adds slot gradients back to (stroke, pixel) positions; empty slots
/// are dropped and unselected entries stay zero.
CompositeAdjoint scatter_layers(const TopKSelection& selection, const LayerAdjoint& layers);

/// backward_layers followed by scatter_layers, with the selection checked
/// against the frames.
CompositeAdjoint backward_fss(std::span<const StrokeFrame> frames, const TopKSelection& selection,
                              const Canvas& d_canvas);

/// Gradient of the density term with respect to gathered alphas and areas.
struct AreaLayerAdjoint {
    std::vector<double> d_alpha;  // (h * w) x k
    std::vector<double> d_area;   // (h * w) x k
};
AreaLayerAdjoint backward_area_layers(const TopKSelection& selection, const AreaMaps& area,
                                      const ScalarMap& d_composed);

/// Per-stroke gradient vectors, each matching its stroke's arity.
struct ParamGradient {
    std::vector<std::vector<double>> per_stroke;

    std::vector<double> flatten() const;
    bool all_finite() const;
};

/// Chains compositor backward into the soft rasterizer for every stroke.
/// Binarization and top-k indices are constants of the backward pass.
/// Throws UnsupportedModeError unless mode is soft.
ParamGradient param_backward(const StrokeSequence& seq, const RasterConfig& cfg, const Canvas& d_canvas,
                             bool use_fss, int k, const BinarizeConfig& bin = {},
                             RasterMode mode = RasterMode::Soft);

struct PipelineOptions {
    RasterConfig raster;
    LossConfig loss;
    bool use_fss = true;
    int k = kDefaultTopK;
};

struct PipelineEvaluation {
    double loss = 0.0;
    double l2 = 0.0;
    double density = 0.0;
    Canvas canvas;
    ParamGradient grad;  // empty unless requested
};

/// Full training graph: soft rasterization, FSS or sequential stacking,
/// L2 plus optional stroke-density loss, and the parameter gradient.
/// Frame buffers are reused between calls.
class PipelineEvaluator {
public:
    PipelineEvaluator(PipelineOptions options, Canvas target);

    const PipelineOptions& options() const { return options_; }
    const Canvas& target() const { return target_; }
    const ScalarMap& density() const { return density_; }
    // The density term applies to oil strokes with lambda > 0.
    bool density_enabled(StrokeKind kind) const;

    PipelineEvaluation evaluate(const StrokeSequence& seq, bool with_gradient);

    // Top-k selection of the last evaluation (FSS or density path only).
    const std::optional<TopKSelection>& last_selection() const { return selection_; }

private:
    PipelineOptions options_;
    Canvas target_;
    ScalarMap density_;
    std::vector<StrokeFrame> frames_;
    std::optional<TopKSelection> selection_;
};

/// Central differences (f(x + step) - f(x - step)) / (2 step) per coordinate.
std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& loss_fn,
                                std::span<const double> params, double step);

}  // namespace fastpaint
