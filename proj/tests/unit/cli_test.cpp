#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include <fastpaint/image_io.hpp>
#include <fastpaint/metrics.hpp>
#include <fastpaint/painter.hpp>
#include <fastpaint/rasterizer.hpp>
#include <fastpaint/sequence_io.hpp>

#include "cli.hpp"
#include "testkit/oracles.hpp"

using namespace fastpaint;
namespace fs = std::filesystem;

namespace {

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

fs::path temp(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "fastpaint_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string fixture(const char* name) { return testkit::fixture(name).string(); }

}  // namespace

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(invoke({}).code, cli::kUsage); }

TEST(Cli, UnknownFlagIsUsageError) {
    EXPECT_EQ(invoke({"paint", fixture("flat_128.png"), "--out", temp("x.png"), "--bogus"}).code, cli::kUsage);
}

TEST(Cli, HelpSucceeds) { EXPECT_EQ(invoke({"--help"}).code, cli::kOk); }

TEST(CliPaint, HappyPathWritesBothFilesAndEchoesConfig) {
    const fs::path out = temp("paint.png"), strokes = temp("paint.json");
    fs::remove(out);
    fs::remove(strokes);
    const Invocation r = invoke({"paint", fixture("photo_128.png"), "--strokes", "9", "--steps", "5", "--out", out,
                          "--save-strokes", strokes});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_TRUE(fs::exists(out));
    EXPECT_TRUE(fs::exists(strokes));
    const auto kv = key_values(r.out);
    for (const char* key : {"strokes", "stroke_type", "steps", "lr", "seed", "fss", "k", "lambda_density", "tiles",
                            "softness_tau", "strokes_total", "best_loss", "l2", "ssim", "wall_time"})
        EXPECT_TRUE(kv.count(key)) << key;
    EXPECT_EQ(kv.at("strokes_total"), "9");
    EXPECT_EQ(kv.at("lr"), "0.02");
    EXPECT_EQ(load_sequence(strokes).size(), 9u);
}

TEST(CliPaint, MissingInputIsIoErrorNamingThePath) {
    const Invocation r = invoke({"paint", "/nonexistent/in.png", "--out", temp("never.png")});
    EXPECT_EQ(r.code, cli::kIo);
    EXPECT_NE(r.err.find("/nonexistent/in.png"), std::string::npos);
}

TEST(CliPaint, BadValuesAreUsageErrors) {
    for (std::vector<std::string> extra : {std::vector<std::string>{"--tiles", "4by4"}, {"--stroke-type", "ink"},
                                           {"--steps", "0"}, {"--k", "11"}, {"--lr", "-1"}, {"--lr", "inf"}}) {
        std::vector<std::string> args{"paint", fixture("flat_128.png"), "--out", temp("bad.png")};
        args.insert(args.end(), extra.begin(), extra.end());
        EXPECT_EQ(invoke(args).code, cli::kUsage) << extra[0];
    }
}

TEST(CliPaint, TiledStrokeFileHasGlobalCoordinates) {
    const fs::path strokes = temp("tiled.json");
    const Invocation r = invoke({"paint", fixture("photo_512.png"), "--strokes", "4", "--steps", "2", "--tiles", "4x4",
                          "--out", temp("tiled.png"), "--save-strokes", strokes, "--threads", "2"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const StrokeSequence seq = load_sequence(strokes);
    EXPECT_EQ(seq.size(), 64u);
    EXPECT_EQ(seq.canvas_h, 512);
    EXPECT_FALSE(validate(seq).has_value());
    double max_x = 0.0;
    for (const auto& s : seq.strokes) max_x = std::max(max_x, s[oil::X]);
    EXPECT_GT(max_x, 0.75);  // the last tile column reaches the right quarter
}

TEST(CliRender, ReplayReproducesPaintByteForByte) {
    const fs::path painted = temp("replay_paint.png"), strokes = temp("replay.json"), replay = temp("replay.png");
    ASSERT_EQ(invoke({"paint", fixture("photo_128.png"), "--strokes", "16", "--steps", "10", "--out", painted,
                      "--save-strokes", strokes})
                  .code,
              cli::kOk);
    ASSERT_EQ(invoke({"render", strokes, "--out", replay}).code, cli::kOk);
    EXPECT_EQ(slurp(painted), slurp(replay));
}

TEST(CliRender, EmptyStrokeFileRendersBlack) {
    const fs::path strokes = temp("empty.json"), out = temp("empty.png");
    StrokeSequence seq;
    seq.canvas_h = 20;
    seq.canvas_w = 30;
    save_sequence(seq, strokes);
    ASSERT_EQ(invoke({"render", strokes, "--out", out}).code, cli::kOk);
    const Canvas c = load_png(out);
    EXPECT_EQ(c, Canvas(20, 30));
}

TEST(CliRender, ParseFailureIsIoClass) {
    const fs::path strokes = temp("garbage.json");
    std::ofstream(strokes) << "[1, 2";
    EXPECT_EQ(invoke({"render", strokes, "--out", temp("garbage.png")}).code, cli::kIo);
}

TEST(CliRender, ScaledCentroidsAgree) {
    StrokeSequence seq = init_strokes(testkit::load_fixture("photo_128.png"), 9, StrokeKind::Oil, 5);
    seq.canvas_h = seq.canvas_w = 32;
    for (auto& s : seq.strokes) s[oil::H] = s[oil::W] = 0.2;
    RasterConfig lo, hi;
    lo.h = lo.w = 32;
    hi.h = hi.w = 128;
    auto centroid = [](const StrokeFrame& f) {
        double sy = 0, sx = 0, m = 0;
        for (int y = 0; y < f.h; ++y)
            for (int x = 0; x < f.w; ++x) {
                const double a = f.alpha[static_cast<std::size_t>(y) * f.w + x];
                sy += a * (y + 0.5);
                sx += a * (x + 0.5);
                m += a;
            }
        return std::pair{sy / m, sx / m};
    };
    for (const auto& s : seq.strokes) {
        const auto [ly, lx] = centroid(rasterize(s, lo, RasterMode::Hard));
        const auto [hy, hx] = centroid(rasterize(s, hi, RasterMode::Hard));
        EXPECT_LE(std::abs(hy / 4 - ly), 0.5);
        EXPECT_LE(std::abs(hx / 4 - lx), 0.5);
    }
    const fs::path strokes = temp("scale.json"), out = temp("scale.png");
    save_sequence(seq, strokes);
    ASSERT_EQ(invoke({"render", strokes, "--scale", "4", "--out", out}).code, cli::kOk);
    EXPECT_EQ(load_png(out).h, 128);
}

TEST(CliMetrics, IdenticalFiles) {
    const Invocation r = invoke({"metrics", fixture("photo_128.png"), fixture("photo_128.png")});
    ASSERT_EQ(r.code, cli::kOk);
    EXPECT_NE(r.out.find("l2=0.000000 ssim=1.000000\n"), std::string::npos);
}

TEST(CliMetrics, MatchesLibraryValues) {
    const Invocation r = invoke({"metrics", fixture("photo_128.png"), fixture("step_128.png"), "--precision", "12"});
    ASSERT_EQ(r.code, cli::kOk);
    const auto line = r.out.substr(r.out.find("l2="));
    double l2 = 0, s = 0;
    ASSERT_EQ(std::sscanf(line.c_str(), "l2=%lf ssim=%lf", &l2, &s), 2);
    const MetricReport want = compute_metrics(testkit::load_fixture("photo_128.png"), testkit::load_fixture("step_128.png"));
    EXPECT_NEAR(l2, want.l2, 1e-9);
    EXPECT_NEAR(s, want.ssim, 1e-9);
}

TEST(CliMetrics, SizeMismatchIsUsageError) {
    EXPECT_EQ(invoke({"metrics", fixture("photo_128.png"), fixture("photo_512.png")}).code, cli::kUsage);
}

TEST(CliMetrics, MissingFileIsIoError) {
    EXPECT_EQ(invoke({"metrics", fixture("photo_128.png"), "/nonexistent/b.png"}).code, cli::kIo);
}

TEST(CliBench, RowsAndRecomputableSpeedups) {
    const fs::path csv = temp("bench.csv");
    const Invocation r = invoke({"bench", "--stroke-counts", "16,32", "--canvas", "32", "--repeats", "3", "--out", csv});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    std::ifstream in(csv);
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header, "n_strokes,mode,k,canvas,repeats,forward_ms,backward_ms,total_ms");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        ASSERT_EQ(cells.size(), 8u);
        rows.push_back(cells);
    }
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        EXPECT_EQ(rows[i][1], "sequential");
        EXPECT_EQ(rows[i + 1][1], "fss");
        EXPECT_EQ(rows[i][0], rows[i + 1][0]);
        const double seq_total = std::stod(rows[i][7]), fss_total = std::stod(rows[i + 1][7]);
        EXPECT_GT(fss_total, 0.0);
        EXPECT_TRUE(std::isfinite(seq_total / fss_total));
    }
}

TEST(CliBench, MalformedCountListIsUsageError) {
    for (const char* bad : {"64,,256", "abc", "64;256", "-5", ""})
        EXPECT_EQ(invoke({"bench", "--stroke-counts", bad, "--out", temp("b.csv")}).code, cli::kUsage) << bad;
}

TEST(CliBench, UnwritableOutputIsIoError) {
    EXPECT_EQ(invoke({"bench", "--stroke-counts", "4", "--canvas", "16", "--repeats", "3", "--out",
                      "/nonexistent/dir/b.csv"})
                  .code,
              cli::kIo);
}

TEST(CliProcess, ExitCodesSurviveTheProcessBoundary) {
    const std::string exe = FASTPAINT_EXE;
    auto status = [&](const std::string& args) {
        const int s = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status("metrics " + fixture("flat_128.png") + " " + fixture("flat_128.png")), 0);
    EXPECT_EQ(status("metrics " + fixture("flat_128.png") + " " + fixture("photo_512.png")), 1);
    EXPECT_EQ(status("metrics /nonexistent.png " + fixture("flat_128.png")), 2);
    EXPECT_EQ(status("frobnicate"), 1);
}
