#include "fastpaint/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastpaint/error.hpp"

namespace fastpaint {

void LossConfig::validate() const {
    if (!(lambda_density >= 0.0)) throw ConfigError("lambda_density must be >= 0");
    if (density_pool_window < 0) throw ConfigError("density_pool_window must be >= 1 (or 0 for auto)");
    bin.validate();
}

int LossConfig::pool_window_for(int h) const {
    return density_pool_window > 0 ? density_pool_window : std::max(1, h / 16);
}

double l2_loss(const Canvas& a, const Canvas& b) {
    if (a.h != b.h || a.w != b.w || a.pixels.size() != b.pixels.size()) {
        throw ShapeError("l2_loss: " + std::to_string(a.h) + "x" + std::to_string(a.w) + " vs " +
                         std::to_string(b.h) + "x" + std::to_string(b.w));
    }
    if (a.pixels.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.pixels.size());
}

ScalarMap density_map(const Canvas& target, const LossConfig& cfg) {
    const int h = target.h, w = target.w;
    if (h < 3 || w < 3) throw ShapeError("density_map needs an image of at least 3x3");
    const int win = cfg.pool_window_for(h);

    ScalarMap gray(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            gray.at(y, x) = 0.299 * target.at(y, x, 0) + 0.587 * target.at(y, x, 1) + 0.114 * target.at(y, x, 2);

    auto g = [&](int y, int x) { return gray.at(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1)); };
    ScalarMap magnitude(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (g(y - 1, x + 1) + 2 * g(y, x + 1) + g(y + 1, x + 1)) -
                              (g(y - 1, x - 1) + 2 * g(y, x - 1) + g(y + 1, x - 1));
            const double gy = (g(y + 1, x - 1) + 2 * g(y + 1, x) + g(y + 1, x + 1)) -
                              (g(y - 1, x - 1) + 2 * g(y - 1, x) + g(y - 1, x + 1));
            magnitude.at(y, x) = std::sqrt(gx * gx + gy * gy);
        }
    }

    // Pool with stride = window; partial edge cells average what they cover.
    const int ph = (h + win - 1) / win, pw = (w + win - 1) / win;
    ScalarMap pooled(ph, pw);
    for (int cy = 0; cy < ph; ++cy) {
        for (int cx = 0; cx < pw; ++cx) {
            double sum = 0.0;
            int count = 0;
            for (int y = cy * win; y < std::min(h, (cy + 1) * win); ++y)
                for (int x = cx * win; x < std::min(w, (cx + 1) * win); ++x, ++count) sum += magnitude.at(y, x);
            pooled.at(cy, cx) = sum / count;
        }
    }
    const double peak = *std::max_element(pooled.values.begin(), pooled.values.end());

    ScalarMap out(h, w);
    if (peak <= 0.0) return out;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(y, x) = pooled.at(y / win, x / win) / peak;
    return out;
}

namespace {

void check_selection(const TopKSelection& sel, std::size_t n_strokes) {
    if (sel.n_strokes != static_cast<int>(n_strokes)) {
        throw ShapeError("selection was built for " + std::to_string(sel.n_strokes) + " strokes, sequence has " +
                         std::to_string(n_strokes));
    }
}

void compose_area(AreaMaps& maps, const TopKSelection& sel) {
    maps.composed = ScalarMap(sel.h, sel.w);
    const int k = sel.k;
    for (std::size_t p = 0; p < sel.pixel_count(); ++p) {
        double v = 0.0;
        for (int j = 0; j < k; ++j) {
            const double a = sel.gathered_alpha[p * k + j];
            v = v * (1.0 - a) + a * maps.gathered_area[p * k + j];
        }
        maps.composed.values[p] = v;
    }
}

double stroke_area(const StrokeParams& s) { return s[oil::H] * s[oil::W]; }

}  // namespace

AreaMaps selection_area_image(const StrokeSequence& seq, const TopKSelection& sel) {
    if (seq.kind != StrokeKind::Oil) throw ConfigError("the stroke-density loss applies to oil strokes only");
    check_selection(sel, seq.size());
    AreaMaps maps;
    maps.n = static_cast<int>(seq.size());
    maps.k = sel.k;
    maps.h = sel.h;
    maps.w = sel.w;
    maps.gathered_area.assign(sel.pixel_count() * sel.k, 0.0);
    for (std::size_t i = 0; i < maps.gathered_area.size(); ++i) {
        const std::int32_t idx = sel.indices[i];
        // Selected strokes cover the pixel by construction, so their mask is 1.
        if (idx > 0) maps.gathered_area[i] = stroke_area(seq.strokes[idx - 1]);
    }
    compose_area(maps, sel);
    return maps;
}

AreaMaps stroke_area_image(const StrokeSequence& seq, std::span<const StrokeFrame> frames, const TopKSelection& sel,
                           const BinarizeConfig& bin) {
    if (seq.kind != StrokeKind::Oil) throw ConfigError("the stroke-density loss applies to oil strokes only");
    bin.validate();
    if (frames.size() != seq.size()) throw ShapeError("stroke_area_image: frame count differs from sequence length");
    check_selection(sel, seq.size());
    check_frames(frames, sel.h, sel.w);

    AreaMaps maps;
    maps.n = static_cast<int>(seq.size());
    maps.k = sel.k;
    maps.h = sel.h;
    maps.w = sel.w;
    const std::size_t n_pix = sel.pixel_count();
    maps.per_stroke_area.assign(seq.size() * n_pix, 0.0);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const double area = stroke_area(seq.strokes[i]);
        const StrokeFrame& f = frames[i];
        const PixelRect& r = f.support;
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * sel.w + x;
                if (f.alpha[p] > bin.threshold) maps.per_stroke_area[i * n_pix + p] = area;
            }
        }
    }
    maps.gathered_area.assign(n_pix * sel.k, 0.0);
    for (std::size_t p = 0; p < n_pix; ++p) {
        for (int j = 0; j < sel.k; ++j) {
            const std::int32_t idx = sel.index(p, j);
            if (idx > 0) maps.gathered_area[p * sel.k + j] = maps.per_stroke_area[(idx - 1) * n_pix + p];
        }
    }
    compose_area(maps, sel);
    return maps;
}

double density_loss(const AreaMaps& area, const ScalarMap& density) {
    if (area.composed.h != density.h || area.composed.w != density.w) {
        throw ShapeError("density_loss: area image and density map differ in size");
    }
    if (density.values.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t p = 0; p < density.values.size(); ++p) acc += area.composed.values[p] * density.values[p];
    return acc / static_cast<double>(density.values.size());
}

TotalLoss total_loss(const Canvas& target, const Canvas& canvas, const AreaMaps* area, const ScalarMap* density,
                     const LossConfig& cfg) {
    cfg.validate();
    TotalLoss out;
    out.l2 = l2_loss(canvas, target);
    out.d_canvas = Canvas(canvas.h, canvas.w);
    const double scale = canvas.pixels.empty() ? 0.0 : 2.0 / static_cast<double>(canvas.pixels.size());
    for (std::size_t i = 0; i < canvas.pixels.size(); ++i)
        out.d_canvas.pixels[i] = scale * (canvas.pixels[i] - target.pixels[i]);
    out.value = out.l2;

    if (cfg.lambda_density > 0.0) {
        if (!area || !density) throw ConfigError("total_loss: density term needs area maps and a density map");
        if (density->h != canvas.h || density->w != canvas.w) throw ShapeError("total_loss: density map size");
        out.density = density_loss(*area, *density);
        out.value = out.l2 + cfg.lambda_density * out.density;
        out.d_composed = ScalarMap(density->h, density->w);
        const double s = cfg.lambda_density / static_cast<double>(density->values.size());
        for (std::size_t p = 0; p < density->values.size(); ++p) out.d_composed.values[p] = s * density->values[p];
    }
    return out;
}

}  // namespace fastpaint
