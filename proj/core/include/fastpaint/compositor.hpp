#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fastpaint/types.hpp"

namespace fastpaint {

constexpr int kMaxTopK = 10;
constexpr int kDefaultTopK = 10;

struct BinarizeConfig {
    // A stroke covers a pixel when its alpha is strictly above the threshold.
    double threshold = 0.5;

    void validate() const;  // 0 < threshold < 1
};

/// Per-pixel selection of the k last-painted strokes covering each pixel.
///
/// Stroke indices are 1-based; 0 marks an empty slot backed by a virtual
/// zero stroke (alpha 0, color 0). Per pixel, slots are ascending in paint
/// order with empty slots leading, so slot k - 1 is painted last.
struct TopKSelection {
    int k = 0;
    int h = 0;
    int w = 0;
    int n_strokes = 0;
    std::vector<std::int32_t> indices;     // (h * w) x k
    std::vector<double> gathered_alpha;    // (h * w) x k
    std::vector<double> gathered_color;    // (h * w) x k x 3

    std::size_t pixel_count() const { return static_cast<std::size_t>(h) * w; }
    std::int32_t index(std::size_t pixel, int slot) const { return indices[pixel * k + slot]; }
};

/// Iterative over-compositing onto a zero canvas, stroke 1 first.
Canvas stack_sequential(std::span<const StrokeFrame> frames, int h, int w);
Canvas stack_sequential(std::span<const StrokeFrame> frames);  // frames must be non-empty

/// Sequential stacking that also records the canvas under each frame, as
/// needed by the reverse sweep. `under[i]` holds the canvas before frame i
/// is applied, restricted to that frame's support.
struct SequentialTape {
    Canvas canvas;
    std::vector<std::vector<double>> under;
};
SequentialTape stack_sequential_taped(std::span<const StrokeFrame> frames);

/// Closed-form expansion: each colored frame weighted by its alpha times the
/// transmittance of every later frame. Throws ConfigError for no frames.
Canvas stack_expanded(std::span<const StrokeFrame> frames);

/// Binarize, mask the index tensor, keep the k largest covering indices per
/// pixel and gather alpha and color from the original (soft) frames.
TopKSelection build_topk(std::span<const StrokeFrame> frames, int k, const BinarizeConfig& bin = {});

/// k-step over-compositing of a selection, empty slots first.
Canvas stack_selection(const TopKSelection& selection);

Canvas stack_fss(std::span<const StrokeFrame> frames, int k, const BinarizeConfig& bin = {});

}  // namespace fastpaint
