#include "fastpaint/compositor.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "fastpaint/error.hpp"

namespace fastpaint {

void BinarizeConfig::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("binarization threshold must lie in (0, 1)");
}

Canvas stack_sequential(std::span<const StrokeFrame> frames, int h, int w) {
    check_frames(frames, h, w);
    Canvas canvas(h, w);
    for (const StrokeFrame& f : frames) {
        const PixelRect& r = f.support;
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + x;
                const double a = f.alpha[p];
                for (int c = 0; c < 3; ++c) {
                    double& v = canvas.pixels[3 * p + c];
                    v = v * (1.0 - a) + a * f.color[3 * p + c];
                }
            }
        }
    }
    return canvas;
}

Canvas stack_sequential(std::span<const StrokeFrame> frames) {
    if (frames.empty()) throw ConfigError("stack_sequential: canvas size unknown for an empty frame list");
    return stack_sequential(frames, frames.front().h, frames.front().w);
}

SequentialTape stack_sequential_taped(std::span<const StrokeFrame> frames) {
    if (frames.empty()) throw ConfigError("stack_sequential_taped: no frames");
    const int h = frames.front().h, w = frames.front().w;
    check_frames(frames, h, w);
    SequentialTape tape{Canvas(h, w), std::vector<std::vector<double>>(frames.size())};
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const StrokeFrame& f = frames[i];
        const PixelRect& r = f.support;
        auto& under = tape.under[i];
        under.resize(static_cast<std::size_t>(r.area()) * 3);
        std::size_t t = 0;
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + x;
                const double a = f.alpha[p];
                for (int c = 0; c < 3; ++c) {
                    double& v = tape.canvas.pixels[3 * p + c];
                    under[t++] = v;
                    v = v * (1.0 - a) + a * f.color[3 * p + c];
                }
            }
        }
    }
    return tape;
}

Canvas stack_expanded(std::span<const StrokeFrame> frames) {
    if (frames.empty()) throw ConfigError("stack_expanded requires at least one frame");
    const int h = frames.front().h, w = frames.front().w;
    check_frames(frames, h, w);
    const std::size_t n = frames.size();
    Canvas canvas(h, w);
    for (std::size_t p = 0; p < canvas.pixel_count(); ++p) {
        // Last term, then earlier terms weighted by the transmittance above them.
        std::array<double, 3> acc{};
        const StrokeFrame& last = frames[n - 1];
        for (int c = 0; c < 3; ++c) acc[c] = last.alpha[p] * last.color[3 * p + c];
        double transmittance = 1.0 - last.alpha[p];
        for (std::size_t k = n - 1; k-- > 0;) {
            const StrokeFrame& f = frames[k];
            for (int c = 0; c < 3; ++c) acc[c] += f.alpha[p] * f.color[3 * p + c] * transmittance;
            transmittance *= 1.0 - f.alpha[p];
        }
        for (int c = 0; c < 3; ++c) canvas.pixels[3 * p + c] = acc[c];
    }
    return canvas;
}

TopKSelection build_topk(std::span<const StrokeFrame> frames, int k, const BinarizeConfig& bin) {
    if (k < 1 || k > kMaxTopK) {
        throw ConfigError("top-k must lie in [1, " + std::to_string(kMaxTopK) + "], got " + std::to_string(k));
    }
    bin.validate();
    if (frames.empty()) throw ConfigError("build_topk: no frames");
    const int h = frames.front().h, w = frames.front().w;
    check_frames(frames, h, w);

    TopKSelection sel;
    sel.k = k;
    sel.h = h;
    sel.w = w;
    sel.n_strokes = static_cast<int>(frames.size());
    const std::size_t n_pix = sel.pixel_count();

    // Covering indices arrive in ascending order, so a ring buffer of the
    // last k hits per pixel holds the k largest.
    std::vector<std::int32_t> ring(n_pix * k, 0);
    std::vector<std::uint32_t> hits(n_pix, 0);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const StrokeFrame& f = frames[i];
        const PixelRect& r = f.support;
        const auto stroke_index = static_cast<std::int32_t>(i + 1);
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + x;
                if (f.alpha[p] > bin.threshold) {
                    ring[p * k + hits[p] % k] = stroke_index;
                    ++hits[p];
                }
            }
        }
    }

    sel.indices.assign(n_pix * k, 0);
    sel.gathered_alpha.assign(n_pix * k, 0.0);
    sel.gathered_color.assign(n_pix * k * 3, 0.0);
    for (std::size_t p = 0; p < n_pix; ++p) {
        const std::uint32_t count = hits[p];
        std::int32_t* out = &sel.indices[p * k];
        const std::int32_t* slots = &ring[p * k];
        if (count < static_cast<std::uint32_t>(k)) {
            std::copy(slots, slots + count, out + (k - count));
        } else {
            const std::uint32_t oldest = count % k;
            for (int j = 0; j < k; ++j) out[j] = slots[(oldest + j) % k];
        }
        for (int j = 0; j < k; ++j) {
            const std::int32_t idx = out[j];
            if (idx == 0) continue;
            const StrokeFrame& f = frames[idx - 1];
            sel.gathered_alpha[p * k + j] = f.alpha[p];
            for (int c = 0; c < 3; ++c) sel.gathered_color[(p * k + j) * 3 + c] = f.color[3 * p + c];
        }
    }
    return sel;
}

Canvas stack_selection(const TopKSelection& sel) {
    Canvas canvas(sel.h, sel.w);
    const int k = sel.k;
    for (std::size_t p = 0; p < sel.pixel_count(); ++p) {
        for (int j = 0; j < k; ++j) {
            const double a = sel.gathered_alpha[p * k + j];
            for (int c = 0; c < 3; ++c) {
                double& v = canvas.pixels[3 * p + c];
                v = v * (1.0 - a) + a * sel.gathered_color[(p * k + j) * 3 + c];
            }
        }
    }
    return canvas;
}

Canvas stack_fss(std::span<const StrokeFrame> frames, int k, const BinarizeConfig& bin) {
    return stack_selection(build_topk(frames, k, bin));
}

}  // namespace fastpaint
