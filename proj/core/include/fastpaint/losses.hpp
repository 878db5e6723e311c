#pragma once

#include <vector>

#include "fastpaint/compositor.hpp"
#include "fastpaint/types.hpp"

namespace fastpaint {

struct LossConfig {
    double lambda_density = 0.1;
    // Mean-pooling window and stride in pixels; 0 selects max(1, H / 16).
    int density_pool_window = 0;
    BinarizeConfig bin;

    void validate() const;
    int pool_window_for(int h) const;
};

/// Mean over all pixels and channels of (a - b)^2. Throws ShapeError.
double l2_loss(const Canvas& a, const Canvas& b);

/// Sobel-magnitude detail estimate, mean-pooled, nearest-upsampled and
/// normalized by its maximum. Constant images give an all-zero map.
ScalarMap density_map(const Canvas& target, const LossConfig& cfg = {});

/// Stroke-area images for the density loss.
///
/// per_stroke_area[i] holds the stroke's normalized area h * w on pixels its
/// binarized alpha covers; gathered_area follows the selection slots; and
/// composed runs the k-step over-compositing recursion with areas in place of
/// colors.
struct AreaMaps {
    int n = 0;
    int k = 0;
    int h = 0;
    int w = 0;
    std::vector<double> per_stroke_area;  // n x (h * w)
    std::vector<double> gathered_area;    // (h * w) x k
    ScalarMap composed;
};

// Throws ConfigError for Bezier sequences and ShapeError when the selection
// does not belong to the frames.
AreaMaps stroke_area_image(const StrokeSequence& seq, std::span<const StrokeFrame> frames,
                           const TopKSelection& selection, const BinarizeConfig& bin = {});

// Gathered and composed areas only; identical to the corresponding fields of
// stroke_area_image, without materializing the per-stroke maps.
AreaMaps selection_area_image(const StrokeSequence& seq, const TopKSelection& selection);

/// mean(composed area * density).
double density_loss(const AreaMaps& area, const ScalarMap& density);

struct TotalLoss {
    double value = 0.0;
    double l2 = 0.0;
    double density = 0.0;
    Canvas d_canvas;         // dL / d(canvas)
    ScalarMap d_composed;    // dL / d(composed area); empty when lambda = 0
};

/// L = l2(canvas, target) + lambda * density_loss(area, density).
/// `area` and `density` may be null when lambda is zero.
TotalLoss total_loss(const Canvas& target, const Canvas& canvas, const AreaMaps* area, const ScalarMap* density,
                     const LossConfig& cfg);

}  // namespace fastpaint
