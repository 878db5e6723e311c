#include "fastpaint/types.hpp"

#include <cmath>

#include "fastpaint/error.hpp"

namespace fastpaint {

namespace {

constexpr std::array<std::string_view, kOilArity> kOilNames = {"x", "y", "h", "w", "theta", "r", "g", "b"};
constexpr std::array<std::string_view, kBezierArity> kBezierNames = {"x0", "y0", "x1", "y1", "x2", "y2", "r0",
                                                                     "t0", "r1", "t1", "r",  "g",  "b"};

}  // namespace

std::string_view to_string(StrokeKind kind) { return kind == StrokeKind::Oil ? "oil" : "bezier"; }

std::optional<StrokeKind> parse_stroke_kind(std::string_view name) {
    if (name == "oil") return StrokeKind::Oil;
    if (name == "bezier") return StrokeKind::Bezier;
    return std::nullopt;
}

std::string_view component_name(StrokeKind kind, std::size_t index) {
    if (kind == StrokeKind::Oil) return index < kOilNames.size() ? kOilNames[index] : "?";
    return index < kBezierNames.size() ? kBezierNames[index] : "?";
}

std::array<double, 3> StrokeParams::color() const {
    const std::size_t n = values.size();
    return {values[n - 3], values[n - 2], values[n - 1]};
}

std::optional<Violation> validate(const StrokeParams& stroke) {
    const std::size_t expected = arity(stroke.kind);
    if (stroke.values.size() != expected) {
        return Violation{"arity", static_cast<double>(stroke.values.size()),
                         std::string(to_string(stroke.kind)) + " stroke needs " + std::to_string(expected) +
                             " components, got " + std::to_string(stroke.values.size())};
    }
    for (std::size_t i = 0; i < expected; ++i) {
        const double v = stroke.values[i];
        // Written so that NaN fails the check.
        if (!(v >= 0.0 && v <= 1.0)) {
            const std::string name(component_name(stroke.kind, i));
            return Violation{name, v, name + " out of range [0,1]: " + std::to_string(v)};
        }
    }
    return std::nullopt;
}

std::optional<Violation> validate(const StrokeSequence& seq) {
    if (seq.canvas_h < 1 || seq.canvas_w < 1) {
        return Violation{"canvas", static_cast<double>(std::min(seq.canvas_h, seq.canvas_w)),
                         "canvas dimensions must be positive"};
    }
    for (std::size_t i = 0; i < seq.strokes.size(); ++i) {
        if (seq.strokes[i].kind != seq.kind) {
            return Violation{"stroke_type", static_cast<double>(i),
                             "stroke " + std::to_string(i) + " does not match the sequence kind"};
        }
        if (auto v = validate(seq.strokes[i])) {
            v->message = "stroke " + std::to_string(i) + ": " + v->message;
            return v;
        }
    }
    return std::nullopt;
}

Canvas::Canvas(int height, int width, double fill)
    : h(height), w(width), pixels(static_cast<std::size_t>(height) * width * 3, fill) {}

ScalarMap::ScalarMap(int height, int width, double fill)
    : h(height), w(width), values(static_cast<std::size_t>(height) * width, fill) {}

StrokeFrame::StrokeFrame(int height, int width)
    : h(height),
      w(width),
      alpha(static_cast<std::size_t>(height) * width, 0.0),
      color(static_cast<std::size_t>(height) * width * 3, 0.0),
      support(PixelRect::full(height, width)) {}

void check_frames(std::span<const StrokeFrame> frames, int h, int w) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        const std::size_t n = static_cast<std::size_t>(h) * w;
        if (f.h != h || f.w != w || f.alpha.size() != n || f.color.size() != 3 * n) {
            throw ShapeError("frame " + std::to_string(i) + " is " + std::to_string(f.h) + "x" +
                             std::to_string(f.w) + ", expected " + std::to_string(h) + "x" + std::to_string(w));
        }
    }
}

}  // namespace fastpaint
