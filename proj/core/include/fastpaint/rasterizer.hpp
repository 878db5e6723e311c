#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fastpaint/types.hpp"

namespace fastpaint {

enum class RasterMode {
    Soft,  // logistic edge falloff, differentiable
    Hard,  // binary footprint for final renders
};

// Soft alpha is truncated to exactly zero beyond this many tau outside the
// footprint; the logistic factor there is below 4e-11.
constexpr double kSoftSupportMargin = 24.0;

struct RasterConfig {
    int h = 128;
    int w = 128;
    double softness_tau = 1.0;  // edge falloff, pixels
    int bezier_samples = 32;
    // Optional single-channel brush texture in [0,1]; modulates oil alpha only.
    std::shared_ptr<const ScalarMap> texture;

    void validate() const;  // throws ConfigError
};

/// A stroke with its pixel-space geometry resolved for one RasterConfig.
///
/// Evaluates alpha per pixel and the vector-Jacobian product of alpha with
/// respect to the stroke's normalized parameters. The nearest Bezier sample
/// is treated as a constant in the derivative.
class PreparedStroke {
public:
    PreparedStroke(const StrokeParams& stroke, const RasterConfig& cfg);

    StrokeKind kind() const { return kind_; }

    // Pixels outside this rectangle have alpha exactly 0 in the given mode.
    PixelRect support(RasterMode mode) const;

    double alpha(int y, int x, RasterMode mode) const;

    // grad += d_alpha * d(alpha(y, x)) / d(params), soft mode only.
    void accumulate_alpha_vjp(int y, int x, double d_alpha, std::span<double> grad) const;

    const std::array<double, 3>& color() const { return color_; }

private:
    struct Texel {
        double value;
        double d_u;  // derivative w.r.t. local x in texture units
        double d_v;
    };
    Texel sample_texture(double ux, double uy) const;

    double oil_alpha(double px, double py, RasterMode mode) const;
    double bezier_alpha(double px, double py, RasterMode mode) const;
    std::size_t nearest_sample(double px, double py) const;
    void oil_vjp(double px, double py, double d_alpha, std::span<double> grad) const;
    void bezier_vjp(double px, double py, double d_alpha, std::span<double> grad) const;

    StrokeKind kind_;
    StrokeParams params_;
    int h_;
    int w_;
    double tau_;
    std::array<double, 3> color_{};
    const ScalarMap* texture_ = nullptr;

    // Oil: center, half extents in pixels, rotation.
    double cx_ = 0, cy_ = 0, half_w_ = 0, half_h_ = 0, cos_ = 1, sin_ = 0;

    // Bezier: arc samples in pixels and their curve parameters.
    std::vector<double> sample_s_;
    std::vector<double> sample_x_;
    std::vector<double> sample_y_;
    double radius_scale_ = 0;  // min(h, w) / 2
};

StrokeFrame raster_oil(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode);
StrokeFrame raster_bezier(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode);

// Dispatches on stroke.kind.
StrokeFrame rasterize(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode);

// Same as rasterize, reusing the storage of `out`.
void rasterize_into(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode, StrokeFrame& out);

std::vector<StrokeFrame> rasterize_all(std::span<const StrokeParams> strokes, const RasterConfig& cfg,
                                       RasterMode mode);

/// Vector-Jacobian product of the soft rasterizer:
/// d(sum(upstream.alpha * alpha) + sum(upstream.color * color)) / d(params).
/// Throws UnsupportedModeError for hard mode.
std::vector<double> raster_grad(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode,
                                const StrokeFrame& upstream);

}  // namespace fastpaint
