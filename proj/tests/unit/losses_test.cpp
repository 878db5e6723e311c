#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <fastpaint/compositor.hpp>
#include <fastpaint/error.hpp>
#include <fastpaint/grad.hpp>
#include <fastpaint/image_io.hpp>
#include <fastpaint/losses.hpp>
#include <fastpaint/rasterizer.hpp>

#include "testkit/oracles.hpp"

using namespace fastpaint;

namespace {

Canvas random_canvas(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Canvas c(h, w);
    for (double& v : c.pixels) v = unit(rng);
    return c;
}

StrokeParams oil_stroke(double x, double y, double h, double w) {
    return StrokeParams(StrokeKind::Oil, {x, y, h, w, 0.0, 0.5, 0.5, 0.5});
}

struct AreaCase {
    StrokeSequence seq;
    std::vector<StrokeFrame> frames;
    TopKSelection sel;
    AreaMaps area;
};

AreaCase area_case(std::vector<StrokeParams> strokes, int size, int k = 10) {
    AreaCase c;
    c.seq.canvas_h = c.seq.canvas_w = size;
    c.seq.strokes = std::move(strokes);
    RasterConfig cfg;
    cfg.h = cfg.w = size;
    c.frames = rasterize_all(c.seq.strokes, cfg, RasterMode::Hard);
    c.sel = build_topk(c.frames, k);
    c.area = stroke_area_image(c.seq, c.frames, c.sel);
    return c;
}

}  // namespace

TEST(L2Loss, IdenticalIsZero) {
    const Canvas a = random_canvas(8, 8, 1);
    EXPECT_EQ(l2_loss(a, a), 0.0);
}

TEST(L2Loss, ZerosVersusOnesIsOne) { EXPECT_EQ(l2_loss(Canvas(5, 7, 0.0), Canvas(5, 7, 1.0)), 1.0); }

TEST(L2Loss, MatchesNaiveSum) {
    const Canvas a = random_canvas(31, 17, 2), b = random_canvas(31, 17, 3);
    EXPECT_NEAR(l2_loss(a, b), testkit::oracle_l2(a, b), 1e-9);
}

TEST(L2Loss, ShapeMismatchThrows) { EXPECT_THROW(l2_loss(Canvas(2, 2), Canvas(2, 3)), ShapeError); }

TEST(DensityMap, ConstantImageIsAllZero) {
    for (double v : density_map(testkit::load_fixture("flat_128.png")).values) EXPECT_EQ(v, 0.0);
}

TEST(DensityMap, StepEdgePeaksInEdgeColumn) {
    const ScalarMap d = density_map(testkit::load_fixture("step_128.png"));
    double peak = 0.0;
    for (double v : d.values) peak = std::max(peak, v);
    EXPECT_EQ(peak, 1.0);
    // The edge lies between columns 63 and 64; the window is 8 pixels wide.
    for (int y = 0; y < 128; ++y) {
        EXPECT_EQ(d.at(y, 60), 1.0);
        EXPECT_EQ(d.at(y, 66), 1.0);
        EXPECT_EQ(d.at(y, 20), 0.0);
        EXPECT_EQ(d.at(y, 100), 0.0);
    }
}

TEST(DensityMap, MatchesIndependentImplementation) {
    const Canvas photo = testkit::load_fixture("photo_128.png");
    const ScalarMap got = density_map(photo);
    const ScalarMap want = testkit::oracle_density(photo, 8);
    double worst = 0.0;
    for (std::size_t i = 0; i < got.values.size(); ++i) worst = std::max(worst, std::abs(got.values[i] - want.values[i]));
    EXPECT_LE(worst, 1e-6);
}

TEST(DensityMap, UnevenWindowMatchesIndependentImplementation) {
    const Canvas photo = resize_area(testkit::load_fixture("photo_128.png"), 45, 45);
    LossConfig cfg;
    cfg.density_pool_window = 7;
    const ScalarMap got = density_map(photo, cfg);
    const ScalarMap want = testkit::oracle_density(photo, 7);
    for (std::size_t i = 0; i < got.values.size(); ++i) EXPECT_NEAR(got.values[i], want.values[i], 1e-6);
}

TEST(DensityMap, InvariantUnderConstantShift) {
    Canvas photo = resize_area(testkit::load_fixture("photo_128.png"), 64, 64);
    for (double& v : photo.pixels) v *= 0.5;
    const ScalarMap a = density_map(photo);
    for (double& v : photo.pixels) v += 0.25;
    const ScalarMap b = density_map(photo);
    for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
}

TEST(DensityMap, TooSmallThrows) { EXPECT_THROW(density_map(Canvas(2, 8)), ShapeError); }

TEST(StrokeArea, SingleStrokeCarriesItsArea) {
    const AreaCase c = area_case({oil_stroke(0.5, 0.5, 0.5, 0.5)}, 32);
    for (std::size_t p = 0; p < c.area.composed.values.size(); ++p)
        EXPECT_EQ(c.area.composed.values[p], c.frames[0].alpha[p] > 0.5 ? 0.25 : 0.0);
}

TEST(StrokeArea, NestedStrokesCarryTheLaterArea) {
    const AreaCase c = area_case({oil_stroke(0.5, 0.5, 0.8, 0.8), oil_stroke(0.5, 0.5, 0.25, 0.25)}, 32);
    EXPECT_EQ(c.area.composed.at(16, 16), 0.0625);
    EXPECT_NEAR(c.area.composed.at(16, 5), 0.64, 1e-15);
    EXPECT_EQ(c.area.composed.at(0, 0), 0.0);
}

TEST(StrokeArea, SelectionPathMatchesFullMaps) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<StrokeParams> strokes;
    for (int i = 0; i < 12; ++i) strokes.push_back(oil_stroke(unit(rng), unit(rng), unit(rng), unit(rng)));
    const AreaCase c = area_case(strokes, 24, 3);
    const AreaMaps fast = selection_area_image(c.seq, c.sel);
    EXPECT_EQ(fast.gathered_area, c.area.gathered_area);
    EXPECT_EQ(fast.composed, c.area.composed);
}

TEST(StrokeArea, BezierRejected) {
    StrokeSequence seq;
    seq.kind = StrokeKind::Bezier;
    seq.strokes.emplace_back(StrokeKind::Bezier, std::vector<double>(13, 0.5));
    RasterConfig cfg;
    cfg.h = cfg.w = 16;
    const auto frames = rasterize_all(seq.strokes, cfg, RasterMode::Soft);
    EXPECT_THROW(stroke_area_image(seq, frames, build_topk(frames, 2)), ConfigError);
}

TEST(DensityLoss, ZeroDensityIsZero) {
    const AreaCase c = area_case({oil_stroke(0.5, 0.5, 0.5, 0.5)}, 16);
    EXPECT_EQ(density_loss(c.area, ScalarMap(16, 16)), 0.0);
}

TEST(DensityLoss, UniformDensityAndAreaGiveTheArea) {
    const AreaCase c = area_case({oil_stroke(0.5, 0.5, 1.0, 1.0)}, 16);
    EXPECT_DOUBLE_EQ(density_loss(c.area, ScalarMap(16, 16, 1.0)), 1.0);
    const AreaCase d = area_case({oil_stroke(0.5, 0.5, 0.3, 1.0), oil_stroke(0.5, 0.5, 1.0, 0.3)}, 16);
    EXPECT_GE(density_loss(d.area, ScalarMap(16, 16, 1.0)), 0.0);
}

TEST(DensityLoss, LinearInDensity) {
    const AreaCase c = area_case({oil_stroke(0.3, 0.6, 0.5, 0.4), oil_stroke(0.6, 0.4, 0.3, 0.7)}, 32);
    const ScalarMap d = density_map(resize_area(testkit::load_fixture("photo_128.png"), 32, 32));
    ScalarMap d2 = d;
    for (double& v : d2.values) v *= 2.0;
    EXPECT_NEAR(density_loss(c.area, d2), 2.0 * density_loss(c.area, d), 1e-9);
}

TEST(DensityLoss, GrowingAStrokeUnderUniformDensityRaisesLoss) {
    const ScalarMap uniform(32, 32, 1.0);
    RasterConfig cfg;
    cfg.h = cfg.w = 32;
    auto loss_at = [&](double h) {
        StrokeSequence seq;
        seq.canvas_h = seq.canvas_w = 32;
        seq.strokes = {oil_stroke(0.3, 0.3, 0.5, 0.5), oil_stroke(0.5, 0.5, h, 0.4)};
        const auto frames = rasterize_all(seq.strokes, cfg, RasterMode::Soft);
        const TopKSelection sel = build_topk(frames, 10);
        return std::pair{density_loss(stroke_area_image(seq, frames, sel), uniform), sel};
    };
    const double fd = (loss_at(0.4 + 1e-4).first - loss_at(0.4 - 1e-4).first) / 2e-4;
    EXPECT_GT(fd, 0.0);

    // Analytic area path: dL/dh through the h * w product.
    StrokeSequence seq;
    seq.canvas_h = seq.canvas_w = 32;
    seq.strokes = {oil_stroke(0.3, 0.3, 0.5, 0.5), oil_stroke(0.5, 0.5, 0.4, 0.4)};
    const auto frames = rasterize_all(seq.strokes, cfg, RasterMode::Soft);
    const TopKSelection sel = build_topk(frames, 10);
    const AreaMaps area = stroke_area_image(seq, frames, sel);
    const AreaLayerAdjoint adj = backward_area_layers(sel, area, ScalarMap(32, 32, 1.0 / 1024));
    double d_h = 0.0;
    for (std::size_t i = 0; i < adj.d_area.size(); ++i)
        if (sel.indices[i] == 2) d_h += adj.d_area[i] * seq.strokes[1][oil::W];
    EXPECT_GT(d_h, 0.0);
}

TEST(TotalLoss, LambdaZeroIsPlainL2) {
    const Canvas a = random_canvas(8, 8, 7), b = random_canvas(8, 8, 8);
    const TotalLoss tl = total_loss(a, b, nullptr, nullptr, LossConfig{0.0});
    EXPECT_EQ(tl.value, l2_loss(a, b));
    for (std::size_t i = 0; i < a.pixels.size(); ++i)
        EXPECT_DOUBLE_EQ(tl.d_canvas.pixels[i], 2.0 * (b.pixels[i] - a.pixels[i]) / a.pixels.size());
}

TEST(LossConfig, Validation) {
    EXPECT_THROW((LossConfig{-0.1}.validate()), ConfigError);
    LossConfig cfg;
    cfg.density_pool_window = -1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_EQ(LossConfig{}.pool_window_for(128), 8);
    EXPECT_EQ(LossConfig{}.pool_window_for(10), 1);
}
