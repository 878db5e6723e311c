#include "fastpaint/grad.hpp"

#include <array>
#include <cmath>
#include <string>

#include "fastpaint/error.hpp"

namespace fastpaint {

CompositeAdjoint::CompositeAdjoint(int frames, int height, int width)
    : n(frames),
      h(height),
      w(width),
      d_alpha(static_cast<std::size_t>(frames) * height * width, 0.0),
      d_color(static_cast<std::size_t>(frames) * height * width * 3, 0.0) {}

namespace {

void check_upstream(const Canvas& d_canvas, int h, int w) {
    if (d_canvas.h != h || d_canvas.w != w || d_canvas.pixels.size() != static_cast<std::size_t>(h) * w * 3) {
        throw ShapeError("upstream canvas gradient is " + std::to_string(d_canvas.h) + "x" +
                         std::to_string(d_canvas.w) + ", expected " + std::to_string(h) + "x" + std::to_string(w));
    }
}

void check_selection(std::span<const StrokeFrame> frames, const TopKSelection& sel) {
    if (sel.n_strokes != static_cast<int>(frames.size()) || (!frames.empty() && (frames.front().h != sel.h ||
                                                                                  frames.front().w != sel.w))) {
        throw ShapeError("stale selection: built for " + std::to_string(sel.n_strokes) + " strokes of " +
                         std::to_string(sel.h) + "x" + std::to_string(sel.w));
    }
    const std::size_t slots = sel.pixel_count() * sel.k;
    if (sel.indices.size() != slots || sel.gathered_alpha.size() != slots || sel.gathered_color.size() != 3 * slots) {
        throw ShapeError("selection arrays do not match k x h x w");
    }
}

}  // namespace

CompositeAdjoint backward_sequential(std::span<const StrokeFrame> frames, const Canvas& d_canvas) {
    if (frames.empty()) return CompositeAdjoint(0, d_canvas.h, d_canvas.w);
    return backward_sequential(frames, stack_sequential_taped(frames), d_canvas);
}

CompositeAdjoint backward_sequential(std::span<const StrokeFrame> frames, const SequentialTape& tape,
                                     const Canvas& d_canvas) {
    if (frames.empty()) return CompositeAdjoint(0, d_canvas.h, d_canvas.w);
    const int h = frames.front().h, w = frames.front().w;
    check_frames(frames, h, w);
    check_upstream(d_canvas, h, w);
    if (tape.under.size() != frames.size() || tape.canvas.h != h || tape.canvas.w != w) {
        throw ShapeError("backward_sequential: tape does not match the frames");
    }

    const int n = static_cast<int>(frames.size());
    const std::size_t n_pix = static_cast<std::size_t>(h) * w;
    CompositeAdjoint adj(n, h, w);
    // g holds dL/d(canvas after frame i); current holds that canvas.
    std::vector<double> g = d_canvas.pixels;
    std::vector<double> current = tape.canvas.pixels;

    for (int i = n - 1; i >= 0; --i) {
        const StrokeFrame& f = frames[i];
        const PixelRect& r = f.support;
        const std::vector<double>& under = tape.under[i];
        double* d_alpha = &adj.d_alpha[i * n_pix];
        double* d_color = &adj.d_color[i * n_pix * 3];
        std::size_t t = 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + x;
                const double* col = &f.color[3 * p];
                double* gp = &g[3 * p];
                double* cur = &current[3 * p];
                if (!r.contains(y, x)) {
                    // alpha is zero here: the canvas below equals the canvas above.
                    d_alpha[p] = (col[0] - cur[0]) * gp[0] + (col[1] - cur[1]) * gp[1] + (col[2] - cur[2]) * gp[2];
                    continue;
                }
                const double a = f.alpha[p];
                const double* prev = &under[t];
                t += 3;
                d_alpha[p] = (col[0] - prev[0]) * gp[0] + (col[1] - prev[1]) * gp[1] + (col[2] - prev[2]) * gp[2];
                for (int c = 0; c < 3; ++c) {
                    d_color[3 * p + c] = a * gp[c];
                    gp[c] *= 1.0 - a;
                    cur[c] = prev[c];
                }
            }
        }
    }
    return adj;
}

LayerAdjoint backward_layers(const TopKSelection& sel, const Canvas& d_canvas) {
    check_upstream(d_canvas, sel.h, sel.w);
    const int k = sel.k;
    LayerAdjoint out{k, sel.h, sel.w, std::vector<double>(sel.pixel_count() * k, 0.0),
                     std::vector<double>(sel.pixel_count() * k * 3, 0.0)};
    std::array<double, 3 * kMaxTopK> under{};
    for (std::size_t p = 0; p < sel.pixel_count(); ++p) {
        const double* alpha = &sel.gathered_alpha[p * k];
        const double* color = &sel.gathered_color[p * k * 3];
        std::array<double, 3> v{};
        for (int j = 0; j < k; ++j) {
            for (int c = 0; c < 3; ++c) {
                under[3 * j + c] = v[c];
                v[c] = v[c] * (1.0 - alpha[j]) + alpha[j] * color[3 * j + c];
            }
        }
        std::array<double, 3> g = {d_canvas.pixels[3 * p], d_canvas.pixels[3 * p + 1], d_canvas.pixels[3 * p + 2]};
        for (int j = k - 1; j >= 0; --j) {
            const double a = alpha[j];
            double da = 0.0;
            for (int c = 0; c < 3; ++c) {
                da += (color[3 * j + c] - under[3 * j + c]) * g[c];
                out.d_color[(p * k + j) * 3 + c] = a * g[c];
                g[c] *= 1.0 - a;
            }
            out.d_alpha[p * k + j] = da;
        }
    }
    return out;
}

CompositeAdjoint scatter_layers(const TopKSelection& sel, const LayerAdjoint& layers) {
    if (layers.k != sel.k || layers.h != sel.h || layers.w != sel.w) {
        throw ShapeError("scatter_layers: layer adjoint does not match the selection");
    }
    CompositeAdjoint adj(sel.n_strokes, sel.h, sel.w);
    const std::size_t n_pix = sel.pixel_count();
    const int k = sel.k;
    for (std::size_t p = 0; p < n_pix; ++p) {
        for (int j = 0; j < k; ++j) {
            const std::int32_t idx = sel.index(p, j);
            if (idx == 0) continue;  // virtual zero stroke
            const std::size_t dst = (idx - 1) * n_pix + p;
            adj.d_alpha[dst] += layers.d_alpha[p * k + j];
            for (int c = 0; c < 3; ++c) adj.d_color[dst * 3 + c] += layers.d_color[(p * k + j) * 3 + c];
        }
    }
    return adj;
}

CompositeAdjoint backward_fss(std::span<const StrokeFrame> frames, const TopKSelection& selection,
                              const Canvas& d_canvas) {
    check_selection(frames, selection);
    return scatter_layers(selection, backward_layers(selection, d_canvas));
}

AreaLayerAdjoint backward_area_layers(const TopKSelection& sel, const AreaMaps& area, const ScalarMap& d_composed) {
    if (area.k != sel.k || area.h != sel.h || area.w != sel.w || d_composed.h != sel.h || d_composed.w != sel.w) {
        throw ShapeError("backward_area_layers: area maps do not match the selection");
    }
    const int k = sel.k;
    const std::size_t slots = sel.pixel_count() * k;
    AreaLayerAdjoint out{std::vector<double>(slots, 0.0), std::vector<double>(slots, 0.0)};
    std::array<double, kMaxTopK> under{};
    for (std::size_t p = 0; p < sel.pixel_count(); ++p) {
        const double* alpha = &sel.gathered_alpha[p * k];
        const double* values = &area.gathered_area[p * k];
        double v = 0.0;
        for (int j = 0; j < k; ++j) {
            under[j] = v;
            v = v * (1.0 - alpha[j]) + alpha[j] * values[j];
        }
        double g = d_composed.values[p];
        for (int j = k - 1; j >= 0; --j) {
            out.d_area[p * k + j] = alpha[j] * g;
            out.d_alpha[p * k + j] = (values[j] - under[j]) * g;
            g *= 1.0 - alpha[j];
        }
    }
    return out;
}

std::vector<double> ParamGradient::flatten() const {
    std::vector<double> flat;
    for (const auto& g : per_stroke) flat.insert(flat.end(), g.begin(), g.end());
    return flat;
}

bool ParamGradient::all_finite() const {
    for (const auto& g : per_stroke)
        for (double v : g)
            if (!std::isfinite(v)) return false;
    return true;
}

namespace {

std::vector<PreparedStroke> prepare_all(const StrokeSequence& seq, const RasterConfig& cfg) {
    std::vector<PreparedStroke> prepared;
    prepared.reserve(seq.size());
    for (const auto& s : seq.strokes) prepared.emplace_back(s, cfg);
    return prepared;
}

ParamGradient zero_gradient(const StrokeSequence& seq) {
    ParamGradient grad;
    for (const auto& s : seq.strokes) grad.per_stroke.emplace_back(s.size(), 0.0);
    return grad;
}

// Chains per-slot alpha/color gradients into stroke parameters, pixel scan order.
void accumulate_slots(const std::vector<PreparedStroke>& prepared, const TopKSelection& sel,
                      std::span<const double> d_alpha, std::span<const double> d_color, ParamGradient& grad) {
    const int k = sel.k;
    for (int y = 0; y < sel.h; ++y) {
        for (int x = 0; x < sel.w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * sel.w + x;
            for (int j = 0; j < k; ++j) {
                const std::int32_t idx = sel.index(p, j);
                if (idx == 0) continue;
                auto& g = grad.per_stroke[idx - 1];
                prepared[idx - 1].accumulate_alpha_vjp(y, x, d_alpha[p * k + j], g);
                if (!d_color.empty()) {
                    const std::size_t c0 = g.size() - 3;
                    for (int c = 0; c < 3; ++c) g[c0 + c] += d_color[(p * k + j) * 3 + c];
                }
            }
        }
    }
}

// raster_grad for every stroke against its slice of a dense adjoint.
void accumulate_dense(const std::vector<PreparedStroke>& prepared, const CompositeAdjoint& adj,
                      ParamGradient& grad) {
    const std::size_t n_pix = adj.pixel_count();
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        auto& g = grad.per_stroke[i];
        const std::size_t c0 = g.size() - 3;
        const double* d_color = &adj.d_color[i * n_pix * 3];
        for (std::size_t p = 0; p < n_pix; ++p)
            for (int c = 0; c < 3; ++c) g[c0 + c] += d_color[3 * p + c];
        const double* d_alpha = &adj.d_alpha[i * n_pix];
        const PixelRect r = prepared[i].support(RasterMode::Soft);
        for (int y = r.y0; y < r.y1; ++y)
            for (int x = r.x0; x < r.x1; ++x)
                prepared[i].accumulate_alpha_vjp(y, x, d_alpha[static_cast<std::size_t>(y) * adj.w + x], g);
    }
}

// Density-path gradients: alpha through the gathered slots, h and w through
// the area product h * w.
void accumulate_area(const StrokeSequence& seq, const std::vector<PreparedStroke>& prepared,
                     const TopKSelection& sel, const AreaLayerAdjoint& area_adj, ParamGradient& grad) {
    accumulate_slots(prepared, sel, area_adj.d_alpha, {}, grad);
    for (std::size_t slot = 0; slot < sel.indices.size(); ++slot) {
        const std::int32_t idx = sel.indices[slot];
        if (idx == 0) continue;
        const StrokeParams& s = seq.strokes[idx - 1];
        auto& g = grad.per_stroke[idx - 1];
        g[oil::H] += area_adj.d_area[slot] * s[oil::W];
        g[oil::W] += area_adj.d_area[slot] * s[oil::H];
    }
}

}  // namespace

ParamGradient param_backward(const StrokeSequence& seq, const RasterConfig& cfg, const Canvas& d_canvas,
                             bool use_fss, int k, const BinarizeConfig& bin, RasterMode mode) {
    if (mode != RasterMode::Soft) throw UnsupportedModeError("param_backward requires the soft rasterizer");
    cfg.validate();
    check_upstream(d_canvas, cfg.h, cfg.w);
    ParamGradient grad = zero_gradient(seq);
    if (seq.empty()) return grad;

    const auto frames = rasterize_all(seq.strokes, cfg, RasterMode::Soft);
    const auto prepared = prepare_all(seq, cfg);
    if (use_fss) {
        const TopKSelection sel = build_topk(frames, k, bin);
        const LayerAdjoint layers = backward_layers(sel, d_canvas);
        accumulate_slots(prepared, sel, layers.d_alpha, layers.d_color, grad);
    } else {
        accumulate_dense(prepared, backward_sequential(frames, d_canvas), grad);
    }
    return grad;
}

PipelineEvaluator::PipelineEvaluator(PipelineOptions options, Canvas target)
    : options_(std::move(options)), target_(std::move(target)) {
    options_.raster.validate();
    options_.loss.validate();
    if (options_.k < 1 || options_.k > kMaxTopK) throw ConfigError("top-k must lie in [1, 10]");
    if (target_.h != options_.raster.h || target_.w != options_.raster.w) {
        throw ShapeError("pipeline target must match the raster canvas");
    }
    if (options_.loss.lambda_density > 0.0) density_ = density_map(target_, options_.loss);
}

bool PipelineEvaluator::density_enabled(StrokeKind kind) const {
    return options_.loss.lambda_density > 0.0 && kind == StrokeKind::Oil;
}

PipelineEvaluation PipelineEvaluator::evaluate(const StrokeSequence& seq, bool with_gradient) {
    const RasterConfig& rcfg = options_.raster;
    const int h = rcfg.h, w = rcfg.w;
    const bool use_density = density_enabled(seq.kind);
    LossConfig loss_cfg = options_.loss;
    if (!use_density) loss_cfg.lambda_density = 0.0;

    frames_.resize(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) rasterize_into(seq.strokes[i], rcfg, RasterMode::Soft, frames_[i]);

    PipelineEvaluation result;
    selection_.reset();
    std::optional<SequentialTape> tape;
    if (seq.empty()) {
        result.canvas = Canvas(h, w);
    } else if (options_.use_fss || use_density) {
        selection_ = build_topk(frames_, options_.k, options_.loss.bin);
    }
    if (!seq.empty()) {
        if (options_.use_fss) {
            result.canvas = stack_selection(*selection_);
        } else {
            tape = stack_sequential_taped(frames_);
            result.canvas = tape->canvas;
        }
    }

    std::optional<AreaMaps> area;
    if (use_density) {
        if (seq.empty()) {
            area = AreaMaps{0, options_.k, h, w, {}, {}, ScalarMap(h, w)};
        } else {
            area = selection_area_image(seq, *selection_);
        }
    }
    const TotalLoss tl = total_loss(target_, result.canvas, area ? &*area : nullptr, use_density ? &density_ : nullptr,
                                    loss_cfg);
    result.loss = tl.value;
    result.l2 = tl.l2;
    result.density = tl.density;
    if (!with_gradient) return result;

    result.grad = zero_gradient(seq);
    if (seq.empty()) return result;
    const auto prepared = prepare_all(seq, rcfg);
    if (options_.use_fss) {
        const LayerAdjoint layers = backward_layers(*selection_, tl.d_canvas);
        accumulate_slots(prepared, *selection_, layers.d_alpha, layers.d_color, result.grad);
    } else {
        accumulate_dense(prepared, backward_sequential(frames_, *tape, tl.d_canvas), result.grad);
    }
    if (use_density) {
        accumulate_area(seq, prepared, *selection_, backward_area_layers(*selection_, *area, tl.d_composed),
                        result.grad);
    }
    return result;
}

std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& loss_fn,
                                std::span<const double> params, double step) {
    if (!(step > 0.0)) throw ConfigError("finite_diff step must be > 0");
    std::vector<double> x(params.begin(), params.end());
    std::vector<double> grad(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + step;
        const double up = loss_fn(x);
        x[i] = orig - step;
        const double down = loss_fn(x);
        x[i] = orig;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

}  // namespace fastpaint
