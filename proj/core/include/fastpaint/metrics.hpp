#pragma once

#include "fastpaint/types.hpp"

namespace fastpaint {

struct MetricReport {
    double l2 = 0.0;
    double ssim = 0.0;
};

// Same contract and implementation as l2_loss.
double mse(const Canvas& a, const Canvas& b);

// Structural similarity: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, dynamic range 1. Averaged over valid window positions, per
// channel, then across channels. Throws ShapeError for images smaller than
// the window or of different size.
double ssim(const Canvas& a, const Canvas& b);

MetricReport compute_metrics(const Canvas& a, const Canvas& b);

}  // namespace fastpaint
