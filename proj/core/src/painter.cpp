#include "fastpaint/painter.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "fastpaint/error.hpp"
#include "fastpaint/image_io.hpp"

namespace fastpaint {

ProjectedAdam::ProjectedAdam(std::size_t size, double learning_rate, AdamConfig cfg)
    : lr_(learning_rate), cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

void ProjectedAdam::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw ShapeError("ProjectedAdam: size mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
        const double m_hat = m_[i] / bc1;
        const double v_hat = v_[i] / bc2;
        params[i] = std::clamp(params[i] - lr_ * m_hat / (std::sqrt(v_hat) + cfg_.epsilon), 0.0, 1.0);
    }
}

void PaintConfig::validate() const {
    if (n_strokes < 1) throw ConfigError("n_strokes must be >= 1");
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be finite and > 0");
    if (k < 1 || k > kMaxTopK) throw ConfigError("k must lie in [1, 10]");
    if (tile_size < 3) throw ConfigError("tile_size must be >= 3");
    if (tile_rows < 1 || tile_cols < 1) throw ConfigError("tiling must be at least 1x1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    loss.validate();
    raster_config().validate();
}

RasterConfig PaintConfig::raster_config() const {
    RasterConfig r;
    r.h = tile_size;
    r.w = tile_size;
    r.softness_tau = softness_tau;
    r.bezier_samples = bezier_samples;
    r.texture = texture;
    return r;
}

StrokeSequence init_strokes(const Canvas& target, int n, StrokeKind kind, std::uint64_t seed) {
    if (n < 1) throw ConfigError("init_strokes: n must be >= 1");
    if (target.h < 1 || target.w < 1) throw ShapeError("init_strokes: empty target");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto symmetric = [&](double radius) { return radius * (2.0 * unit(rng) - 1.0); };

    const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const double cell = 1.0 / grid;
    auto sample_color = [&](double x, double y) {
        const int px = std::clamp(static_cast<int>(x * target.w), 0, target.w - 1);
        const int py = std::clamp(static_cast<int>(y * target.h), 0, target.h - 1);
        return std::array<double, 3>{target.at(py, px, 0), target.at(py, px, 1), target.at(py, px, 2)};
    };

    StrokeSequence seq;
    seq.kind = kind;
    seq.canvas_h = target.h;
    seq.canvas_w = target.w;
    for (int i = 0; i < n; ++i) {
        const int row = i / grid, col = i % grid;
        const double cx = std::clamp((col + 0.5) * cell + symmetric(0.15 * cell), 0.0, 1.0);
        const double cy = std::clamp((row + 0.5) * cell + symmetric(0.15 * cell), 0.0, 1.0);
        const auto rgb = sample_color(cx, cy);
        if (kind == StrokeKind::Oil) {
            const double size = std::clamp(1.2 / grid, 0.05, 1.0);
            const double theta = unit(rng);
            seq.strokes.emplace_back(kind, std::vector<double>{cx, cy, size, size, theta, rgb[0], rgb[1], rgb[2]});
        } else {
            std::vector<double> v(kBezierArity);
            for (int p = 0; p < 3; ++p) {
                v[2 * p] = std::clamp(cx + symmetric(0.5 * cell), 0.0, 1.0);
                v[2 * p + 1] = std::clamp(cy + symmetric(0.5 * cell), 0.0, 1.0);
            }
            v[bezier::R0] = v[bezier::R1] = 0.1;
            v[bezier::T0] = v[bezier::T1] = 1.0;
            v[bezier::R] = rgb[0];
            v[bezier::G] = rgb[1];
            v[bezier::B] = rgb[2];
            seq.strokes.emplace_back(kind, std::move(v));
        }
    }
    return seq;
}

namespace {

std::vector<double> flatten(const StrokeSequence& seq) {
    std::vector<double> flat;
    flat.reserve(seq.size() * arity(seq.kind));
    for (const auto& s : seq.strokes) flat.insert(flat.end(), s.values.begin(), s.values.end());
    return flat;
}

void unflatten(std::span<const double> flat, StrokeSequence& seq) {
    std::size_t offset = 0;
    for (auto& s : seq.strokes) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), s.size(), s.values.begin());
        offset += s.size();
    }
}

[[noreturn]] void report_non_finite(int step, double loss, const StrokeSequence& seq, const ParamGradient& grad) {
    std::string where = "loss = " + std::to_string(loss);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        for (std::size_t c = 0; c < seq.strokes[i].size(); ++c) {
            const double p = seq.strokes[i][c];
            const double g = i < grad.per_stroke.size() ? grad.per_stroke[i][c] : 0.0;
            if (!std::isfinite(p) || !std::isfinite(g)) {
                where = "stroke " + std::to_string(i) + " component " +
                        std::string(component_name(seq.kind, c)) + " (value " + std::to_string(p) + ", gradient " +
                        std::to_string(g) + ")";
                i = seq.size();
                break;
            }
        }
    }
    throw NumericError("non-finite loss or gradient at step " + std::to_string(step) + ": " + where);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

PaintResult optimize(const Canvas& target, const PaintConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const Canvas tile = resize_area(target, cfg.tile_size, cfg.tile_size);

    PipelineOptions options;
    options.raster = cfg.raster_config();
    options.loss = cfg.loss;
    options.use_fss = cfg.use_fss;
    options.k = cfg.k;
    PipelineEvaluator evaluator(options, tile);

    StrokeSequence seq = init_strokes(tile, cfg.n_strokes, cfg.kind, cfg.seed);
    std::vector<double> params = flatten(seq);
    ProjectedAdam adam(params.size(), cfg.learning_rate, cfg.adam);

    PaintResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    result.sequence = seq;
    result.loss_trace.reserve(cfg.steps);
    for (int step = 0; step < cfg.steps; ++step) {
        const PipelineEvaluation ev = evaluator.evaluate(seq, true);
        if (!std::isfinite(ev.loss) || !ev.grad.all_finite()) report_non_finite(step, ev.loss, seq, ev.grad);
        result.loss_trace.push_back(ev.loss);
        if (ev.loss < result.best_loss) {
            result.best_loss = ev.loss;
            result.sequence = seq;
        }
        adam.step(params, ev.grad.flatten());
        unflatten(params, seq);
    }
    result.canvas = render_sequence(result.sequence, cfg.tile_size, cfg.tile_size, RasterMode::Hard, cfg.texture,
                                    cfg.softness_tau, cfg.bezier_samples);
    result.wall_time = seconds_since(start);
    return result;
}

namespace {

// Maps a tile-local stroke into the normalized space of the full image.
StrokeParams remap_stroke(const StrokeParams& s, double off_x, double off_y, double scale_x, double scale_y,
                          double radius_scale) {
    StrokeParams g = s;
    auto place = [](double offset, double scale, double v) { return std::clamp(offset + v * scale, 0.0, 1.0); };
    if (s.kind == StrokeKind::Oil) {
        g[oil::X] = place(off_x, scale_x, s[oil::X]);
        g[oil::Y] = place(off_y, scale_y, s[oil::Y]);
        g[oil::W] = std::clamp(s[oil::W] * scale_x, 0.0, 1.0);
        g[oil::H] = std::clamp(s[oil::H] * scale_y, 0.0, 1.0);
    } else {
        for (std::size_t p : {bezier::X0, bezier::X1, bezier::X2}) g[p] = place(off_x, scale_x, s[p]);
        for (std::size_t p : {bezier::Y0, bezier::Y1, bezier::Y2}) g[p] = place(off_y, scale_y, s[p]);
        g[bezier::R0] = std::clamp(s[bezier::R0] * radius_scale, 0.0, 1.0);
        g[bezier::R1] = std::clamp(s[bezier::R1] * radius_scale, 0.0, 1.0);
    }
    return g;
}

}  // namespace

PaintResult paint_tiled(const Canvas& target, const PaintConfig& cfg) {
    cfg.validate();
    if (target.h < 1 || target.w < 1) throw ShapeError("paint_tiled: empty target");
    const auto start = std::chrono::steady_clock::now();
    const int rows = cfg.tile_rows, cols = cfg.tile_cols;
    const int tile_h = (target.h + rows - 1) / rows;
    const int tile_w = (target.w + cols - 1) / cols;
    const int n_tiles = rows * cols;

    std::vector<PaintResult> tiles(n_tiles);
    std::vector<std::exception_ptr> errors(n_tiles);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int t = next++; t < n_tiles; t = next++) {
            try {
                const Canvas crop = crop_replicate(target, (t / cols) * tile_h, (t % cols) * tile_w, tile_h, tile_w);
                PaintConfig tile_cfg = cfg;
                tile_cfg.seed = cfg.seed + static_cast<std::uint64_t>(t);
                tiles[t] = optimize(crop, tile_cfg);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const int n_threads = std::min(cfg.threads, n_tiles);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    PaintResult result;
    result.sequence.kind = cfg.kind;
    result.sequence.canvas_h = target.h;
    result.sequence.canvas_w = target.w;
    const double scale_x = static_cast<double>(tile_w) / target.w;
    const double scale_y = static_cast<double>(tile_h) / target.h;
    const double radius_scale = static_cast<double>(std::min(tile_h, tile_w)) / std::min(target.h, target.w);
    for (int t = 0; t < n_tiles; ++t) {
        const double off_x = static_cast<double>((t % cols) * tile_w) / target.w;
        const double off_y = static_cast<double>((t / cols) * tile_h) / target.h;
        for (const auto& s : tiles[t].sequence.strokes) {
            result.sequence.strokes.push_back(remap_stroke(s, off_x, off_y, scale_x, scale_y, radius_scale));
        }
    }

    // Per-step mean of the tile losses.
    result.loss_trace.assign(cfg.steps, 0.0);
    for (const auto& tile : tiles)
        for (int s = 0; s < cfg.steps; ++s) result.loss_trace[s] += tile.loss_trace[s] / n_tiles;
    result.best_loss = *std::min_element(result.loss_trace.begin(), result.loss_trace.end());

    result.canvas = render_sequence(result.sequence, target.h, target.w, RasterMode::Hard, cfg.texture,
                                    cfg.softness_tau, cfg.bezier_samples);
    result.wall_time = seconds_since(start);
    return result;
}

Canvas render_sequence(const StrokeSequence& seq, int h, int w, RasterMode mode,
                       std::shared_ptr<const ScalarMap> texture, double softness_tau, int bezier_samples) {
    RasterConfig cfg;
    cfg.h = h;
    cfg.w = w;
    cfg.softness_tau = softness_tau;
    cfg.bezier_samples = bezier_samples;
    cfg.texture = std::move(texture);
    cfg.validate();

    // Same per-pixel update as stack_sequential, restricted to each support.
    Canvas canvas(h, w);
    for (const auto& stroke : seq.strokes) {
        const PreparedStroke prepared(stroke, cfg);
        const auto& rgb = prepared.color();
        const PixelRect r = prepared.support(mode);
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                const double a = prepared.alpha(y, x, mode);
                for (int c = 0; c < 3; ++c) {
                    double& v = canvas.at(y, x, c);
                    v = v * (1.0 - a) + a * rgb[c];
                }
            }
        }
    }
    return canvas;
}

}  // namespace fastpaint
