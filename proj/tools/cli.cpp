#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fastpaint/bench.hpp"
#include "fastpaint/error.hpp"
#include "fastpaint/image_io.hpp"
#include "fastpaint/metrics.hpp"
#include "fastpaint/painter.hpp"
#include "fastpaint/sequence_io.hpp"

namespace fastpaint::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fixed(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        int value = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || value < 1) {
            throw UsageError(flag + ": malformed list '" + text + "'");
        }
        out.push_back(value);
        pos = comma + 1;
    }
    return out;
}

std::pair<int, int> parse_tiles(const std::string& text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) throw UsageError("--tiles expects RxC, got '" + text + "'");
    const auto rows = parse_int_list(text.substr(0, x), "--tiles");
    const auto cols = parse_int_list(text.substr(x + 1), "--tiles");
    if (rows.size() != 1 || cols.size() != 1) throw UsageError("--tiles expects RxC, got '" + text + "'");
    return {rows[0], cols[0]};
}

std::shared_ptr<const ScalarMap> maybe_texture(const std::string& path) {
    if (path.empty()) return nullptr;
    return std::make_shared<const ScalarMap>(load_png_gray(path));
}

struct PaintArgs {
    std::string input;
    int strokes = 256;
    std::string stroke_type = "oil";
    int steps = 500;
    double lr = 0.02;
    std::uint64_t seed = 0;
    bool fss = true;
    int k = kDefaultTopK;
    double lambda_density = 0.1;
    std::string tiles = "1x1";
    std::string out;
    std::string save_strokes;
    std::string texture;
    int threads = 1;
};

int cmd_paint(const PaintArgs& a, std::ostream& out) {
    const auto kind = parse_stroke_kind(a.stroke_type);
    if (!kind) throw UsageError("--stroke-type must be oil or bezier");
    const auto [rows, cols] = parse_tiles(a.tiles);

    PaintConfig cfg;
    cfg.n_strokes = a.strokes;
    cfg.steps = a.steps;
    cfg.learning_rate = a.lr;
    cfg.seed = a.seed;
    cfg.use_fss = a.fss;
    cfg.k = a.k;
    cfg.loss.lambda_density = a.lambda_density;
    cfg.kind = *kind;
    cfg.tile_rows = rows;
    cfg.tile_cols = cols;
    cfg.threads = a.threads;
    cfg.validate();

    const Canvas target = load_png(a.input);
    cfg.texture = maybe_texture(a.texture);

    out << "command=paint\n"
        << "input=" << a.input << "\n"
        << "image_h=" << target.h << "\n"
        << "image_w=" << target.w << "\n"
        << "strokes=" << cfg.n_strokes << "\n"
        << "stroke_type=" << to_string(cfg.kind) << "\n"
        << "steps=" << cfg.steps << "\n"
        << "lr=" << cfg.learning_rate << "\n"
        << "adam_beta1=" << cfg.adam.beta1 << "\n"
        << "adam_beta2=" << cfg.adam.beta2 << "\n"
        << "adam_epsilon=" << cfg.adam.epsilon << "\n"
        << "seed=" << cfg.seed << "\n"
        << "fss=" << (cfg.use_fss ? "true" : "false") << "\n"
        << "k=" << cfg.k << "\n"
        << "lambda_density=" << cfg.loss.lambda_density
        << (cfg.kind == StrokeKind::Bezier && cfg.loss.lambda_density > 0 ? " (inactive for bezier)" : "") << "\n"
        << "density_pool_window=" << cfg.loss.pool_window_for(cfg.tile_size) << "\n"
        << "binarize_threshold=" << cfg.loss.bin.threshold << "\n"
        << "tiles=" << rows << "x" << cols << "\n"
        << "tile_size=" << cfg.tile_size << "\n"
        << "softness_tau=" << cfg.softness_tau << "\n"
        << "bezier_samples=" << cfg.bezier_samples << "\n"
        << "texture=" << (a.texture.empty() ? "none" : a.texture) << "\n"
        << "threads=" << cfg.threads << "\n";

    const PaintResult result = paint_tiled(target, cfg);
    if (!a.out.empty()) save_png(result.canvas, a.out);
    if (!a.save_strokes.empty()) save_sequence(result.sequence, a.save_strokes);

    // Metrics compare what was written: the 8-bit output against the input.
    const Canvas written = quantize_rgb8(result.canvas);
    out << "strokes_total=" << result.sequence.size() << "\n"
        << "best_loss=" << fixed(result.best_loss) << "\n"
        << "l2=" << fixed(mse(written, target)) << "\n";
    if (target.h >= 11 && target.w >= 11) out << "ssim=" << fixed(ssim(written, target)) << "\n";
    out << "wall_time=" << fixed(result.wall_time, 3) << "\n";
    if (!a.out.empty()) out << "output=" << a.out << "\n";
    if (!a.save_strokes.empty()) out << "strokes_file=" << a.save_strokes << "\n";
    return kOk;
}

struct RenderArgs {
    std::string strokes;
    std::string out;
    double scale = 1.0;
    std::string texture;
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
    if (!(a.scale > 0.0)) throw UsageError("--scale must be > 0");
    const StrokeSequence seq = load_sequence(a.strokes);
    const int h = std::max(1, static_cast<int>(std::lround(seq.canvas_h * a.scale)));
    const int w = std::max(1, static_cast<int>(std::lround(seq.canvas_w * a.scale)));
    out << "command=render\n"
        << "strokes_file=" << a.strokes << "\n"
        << "stroke_type=" << to_string(seq.kind) << "\n"
        << "strokes=" << seq.size() << "\n"
        << "scale=" << a.scale << "\n"
        << "texture=" << (a.texture.empty() ? "none" : a.texture) << "\n"
        << "image_h=" << h << "\n"
        << "image_w=" << w << "\n";
    const Canvas canvas = render_sequence(seq, h, w, RasterMode::Hard, maybe_texture(a.texture));
    save_png(canvas, a.out);
    out << "output=" << a.out << "\n";
    return kOk;
}

struct MetricsArgs {
    std::string a;
    std::string b;
    int precision = 6;
};

int cmd_metrics(const MetricsArgs& m, std::ostream& out) {
    const Canvas a = load_png(m.a);
    const Canvas b = load_png(m.b);
    if (a.h != b.h || a.w != b.w) {
        throw UsageError("image sizes differ: " + std::to_string(a.h) + "x" + std::to_string(a.w) + " vs " +
                         std::to_string(b.h) + "x" + std::to_string(b.w));
    }
    out << "command=metrics\n"
        << "image_a=" << m.a << "\n"
        << "image_b=" << m.b << "\n"
        << "precision=" << m.precision << "\n";
    const MetricReport r = compute_metrics(a, b);
    out << "l2=" << fixed(r.l2, m.precision) << " ssim=" << fixed(r.ssim, m.precision) << "\n";
    return kOk;
}

struct BenchArgs {
    std::string counts = "64,256,1024";
    std::string ks = "10";
    int canvas = 128;
    int repeats = 5;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    BenchConfig cfg;
    cfg.stroke_counts = parse_int_list(a.counts, "--stroke-counts");
    cfg.k_values = parse_int_list(a.ks, "--k");
    cfg.canvas = a.canvas;
    cfg.repeats = a.repeats;
    cfg.seed = a.seed;
    cfg.validate();
    out << "command=bench\n"
        << "stroke_counts=" << a.counts << "\n"
        << "k=" << a.ks << "\n"
        << "canvas=" << cfg.canvas << "\n"
        << "repeats=" << cfg.repeats << "\n"
        << "seed=" << cfg.seed << "\n"
        << "softness_tau=" << cfg.softness_tau << "\n"
        << "out=" << a.out << "\n";
    const auto records = run_benchmark(cfg);
    write_bench_csv(records, std::filesystem::path(a.out));
    for (const auto& r : records) {
        if (!r.error.empty()) out << "error n_strokes=" << r.n_strokes << " " << r.error << "\n";
    }
    out << "records=" << records.size() << "\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stroke-based painting with fast stroke stacking", "fastpaint"};
    app.require_subcommand(1);

    PaintArgs paint;
    auto* paint_cmd = app.add_subcommand("paint", "Paint an image with optimized strokes");
    paint_cmd->add_option("input", paint.input, "Input PNG")->required();
    paint_cmd->add_option("--strokes", paint.strokes, "Strokes per tile")->capture_default_str();
    paint_cmd->add_option("--stroke-type", paint.stroke_type, "oil or bezier")->capture_default_str();
    paint_cmd->add_option("--steps", paint.steps, "Optimization steps")->capture_default_str();
    paint_cmd->add_option("--lr", paint.lr, "Adam learning rate")->capture_default_str();
    paint_cmd->add_option("--seed", paint.seed, "Random seed")->capture_default_str();
    paint_cmd->add_flag("--fss,!--no-fss", paint.fss, "Use fast stroke stacking (default on)");
    paint_cmd->add_option("--k", paint.k, "Strokes stacked per pixel")->capture_default_str();
    paint_cmd->add_option("--lambda-density", paint.lambda_density, "Stroke-density loss weight")
        ->capture_default_str();
    paint_cmd->add_option("--tiles", paint.tiles, "Tiling RxC")->capture_default_str();
    paint_cmd->add_option("--out", paint.out, "Output PNG")->required();
    paint_cmd->add_option("--save-strokes", paint.save_strokes, "Stroke sequence JSON output");
    paint_cmd->add_option("--texture", paint.texture, "Grayscale brush texture PNG");
    paint_cmd->add_option("--threads", paint.threads, "Tiles optimized concurrently")->capture_default_str();

    RenderArgs render;
    auto* render_cmd = app.add_subcommand("render", "Render a stroke sequence file");
    render_cmd->add_option("strokes", render.strokes, "Stroke sequence JSON")->required();
    render_cmd->add_option("--out", render.out, "Output PNG")->required();
    render_cmd->add_option("--scale", render.scale, "Resolution multiplier")->capture_default_str();
    render_cmd->add_option("--texture", render.texture, "Grayscale brush texture PNG");

    MetricsArgs metrics;
    auto* metrics_cmd = app.add_subcommand("metrics", "Compare two images (L2 and SSIM)");
    metrics_cmd->add_option("image_a", metrics.a, "First PNG")->required();
    metrics_cmd->add_option("image_b", metrics.b, "Second PNG")->required();
    metrics_cmd->add_option("--precision", metrics.precision, "Decimals printed")->capture_default_str();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time sequential vs FSS stacking");
    bench_cmd->add_option("--stroke-counts", bench.counts, "Comma-separated stroke counts")->capture_default_str();
    bench_cmd->add_option("--k", bench.ks, "Comma-separated k values")->capture_default_str();
    bench_cmd->add_option("--canvas", bench.canvas, "Canvas side in pixels")->capture_default_str();
    bench_cmd->add_option("--repeats", bench.repeats, "Timed repeats per record")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "CSV output path")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (paint_cmd->parsed()) return cmd_paint(paint, out);
        if (render_cmd->parsed()) return cmd_render(render, out);
        if (metrics_cmd->parsed()) return cmd_metrics(metrics, out);
        if (bench_cmd->parsed()) return cmd_bench(bench, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace fastpaint::cli
