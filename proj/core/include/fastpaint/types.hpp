#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fastpaint {

enum class StrokeKind { Oil, Bezier };

constexpr std::size_t kOilArity = 8;
constexpr std::size_t kBezierArity = 13;

constexpr std::size_t arity(StrokeKind kind) {
    return kind == StrokeKind::Oil ? kOilArity : kBezierArity;
}

std::string_view to_string(StrokeKind kind);
std::optional<StrokeKind> parse_stroke_kind(std::string_view name);

// Component offsets inside an oil parameter vector.
namespace oil {
enum : std::size_t { X, Y, H, W, Theta, R, G, B };
}

// Component offsets inside a quadratic Bezier parameter vector.
namespace bezier {
enum : std::size_t { X0, Y0, X1, Y1, X2, Y2, R0, T0, R1, T1, R, G, B };
}

std::string_view component_name(StrokeKind kind, std::size_t index);

/// One stroke's parameter vector. Every component is normalized to [0, 1];
/// pixel-space quantities are derived at render time from the canvas size.
struct StrokeParams {
    StrokeKind kind = StrokeKind::Oil;
    std::vector<double> values;

    StrokeParams() = default;
    StrokeParams(StrokeKind k, std::vector<double> v) : kind(k), values(std::move(v)) {}

    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    std::size_t size() const { return values.size(); }

    // Color occupies the last three components for both kinds.
    std::array<double, 3> color() const;

    bool operator==(const StrokeParams&) const = default;
};

struct Violation {
    std::string field;
    double value = 0.0;
    std::string message;
};

// Returns the first violated invariant, or nullopt when the stroke is valid.
std::optional<Violation> validate(const StrokeParams& stroke);

/// Ordered strokes in paint order: index i + 1 is painted over index i.
struct StrokeSequence {
    StrokeKind kind = StrokeKind::Oil;
    std::vector<StrokeParams> strokes;
    int canvas_h = 128;
    int canvas_w = 128;

    std::size_t size() const { return strokes.size(); }
    bool empty() const { return strokes.empty(); }

    bool operator==(const StrokeSequence&) const = default;
};

std::optional<Violation> validate(const StrokeSequence& seq);

/// Half-open pixel rectangle [y0, y1) x [x0, x1).
struct PixelRect {
    int y0 = 0;
    int y1 = 0;
    int x0 = 0;
    int x1 = 0;

    bool empty() const { return y1 <= y0 || x1 <= x0; }
    long area() const { return empty() ? 0 : static_cast<long>(y1 - y0) * (x1 - x0); }
    bool contains(int y, int x) const { return y >= y0 && y < y1 && x >= x0 && x < x1; }
    static PixelRect full(int h, int w) { return {0, h, 0, w}; }
};

/// H x W x 3 RGB image, row-major, channels interleaved.
struct Canvas {
    int h = 0;
    int w = 0;
    std::vector<double> pixels;

    Canvas() = default;
    Canvas(int height, int width, double fill = 0.0);

    std::size_t pixel_count() const { return static_cast<std::size_t>(h) * w; }
    double& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c]; }
    double at(int y, int x, int c) const { return pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c]; }

    bool operator==(const Canvas&) const = default;
};

/// H x W single-channel map (density, composed area, textures).
struct ScalarMap {
    int h = 0;
    int w = 0;
    std::vector<double> values;

    ScalarMap() = default;
    ScalarMap(int height, int width, double fill = 0.0);

    std::size_t pixel_count() const { return static_cast<std::size_t>(h) * w; }
    double& at(int y, int x) { return values[static_cast<std::size_t>(y) * w + x]; }
    double at(int y, int x) const { return values[static_cast<std::size_t>(y) * w + x]; }

    bool operator==(const ScalarMap&) const = default;
};

/// Rendered stroke: alpha map (H x W) and colored stroke map (H x W x 3).
///
/// `support` bounds the pixels where alpha may be nonzero; alpha is exactly
/// zero outside it. Frames built by hand default to a full-canvas support.
struct StrokeFrame {
    int h = 0;
    int w = 0;
    std::vector<double> alpha;
    std::vector<double> color;
    PixelRect support;

    StrokeFrame() = default;
    StrokeFrame(int height, int width);

    std::size_t pixel_count() const { return static_cast<std::size_t>(h) * w; }
};

// Throws ShapeError unless every frame is h x w.
void check_frames(std::span<const StrokeFrame> frames, int h, int w);

}  // namespace fastpaint
