#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <fastpaint/error.hpp>
#include <fastpaint/rasterizer.hpp>

using namespace fastpaint;

namespace {

RasterConfig config(int size, double tau = 1.0) {
    RasterConfig cfg;
    cfg.h = size;
    cfg.w = size;
    cfg.softness_tau = tau;
    return cfg;
}

StrokeParams oil_stroke(double x, double y, double h, double w, double theta) {
    return StrokeParams(StrokeKind::Oil, {x, y, h, w, theta, 0.2, 0.4, 0.6});
}

StrokeParams bezier_stroke(std::array<double, 6> pts, double r0, double t0, double r1, double t1) {
    return StrokeParams(StrokeKind::Bezier,
                        {pts[0], pts[1], pts[2], pts[3], pts[4], pts[5], r0, t0, r1, t1, 0.9, 0.1, 0.5});
}

StrokeParams random_oil(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0), mid(0.3, 0.7), size(0.2, 0.5);
    return StrokeParams(StrokeKind::Oil,
                        {mid(rng), mid(rng), size(rng), size(rng), unit(rng), unit(rng), unit(rng), unit(rng)});
}

double alpha_at(const StrokeFrame& f, int y, int x) { return f.alpha[static_cast<std::size_t>(y) * f.w + x]; }

}  // namespace

TEST(RasterOil, FullCoverHardStroke) {
    const StrokeFrame f = raster_oil(oil_stroke(0.5, 0.5, 1, 1, 0), config(32), RasterMode::Hard);
    for (double a : f.alpha) EXPECT_EQ(a, 1.0);
    for (std::size_t p = 0; p < f.pixel_count(); ++p) {
        EXPECT_EQ(f.color[3 * p], 0.2);
        EXPECT_EQ(f.color[3 * p + 1], 0.4);
        EXPECT_EQ(f.color[3 * p + 2], 0.6);
    }
}

TEST(RasterOil, HardAlphaIsBinaryAndSoftInUnitRange) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        const StrokeParams s = random_oil(rng);
        for (double a : raster_oil(s, config(32), RasterMode::Hard).alpha) EXPECT_TRUE(a == 0.0 || a == 1.0);
        for (double a : raster_oil(s, config(32), RasterMode::Soft).alpha) {
            EXPECT_GE(a, 0.0);
            EXPECT_LE(a, 1.0);
        }
    }
}

TEST(RasterOil, DegenerateSizeIsPermitted) {
    const StrokeParams s = oil_stroke(0.5, 0.5, 0.0, 0.0, 0.3);
    for (double a : raster_oil(s, config(16), RasterMode::Soft).alpha) EXPECT_LE(a, 0.5);
    const StrokeParams off = oil_stroke(0.51, 0.52, 0.0, 0.0, 0.3);
    for (double a : raster_oil(off, config(16), RasterMode::Hard).alpha) EXPECT_EQ(a, 0.0);
}

TEST(RasterOil, QuarterTurnMatchesSwappedExtents) {
    const RasterConfig cfg = config(32);
    const StrokeFrame a = raster_oil(oil_stroke(0.5, 0.5, 0.3, 0.6, 0.0), cfg, RasterMode::Soft);
    const StrokeFrame b = raster_oil(oil_stroke(0.5, 0.5, 0.6, 0.3, 0.0), cfg, RasterMode::Soft);
    const StrokeFrame c = raster_oil(oil_stroke(0.5, 0.5, 0.6, 0.3, 0.5), cfg, RasterMode::Soft);
    double grid = 0.0, turned = 0.0;
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            grid = std::max(grid, std::abs(alpha_at(a, y, x) - alpha_at(b, x, 31 - y)));
            turned = std::max(turned, std::abs(alpha_at(a, y, x) - alpha_at(c, y, x)));
        }
    }
    EXPECT_LE(grid, 1e-4);
    EXPECT_LE(turned, 1e-4);
}

TEST(RasterOil, TranslationEquivariance) {
    const int n = 64, shift = 5;
    const RasterConfig cfg = config(n);
    const StrokeFrame a = raster_oil(oil_stroke(0.4, 0.45, 0.2, 0.3, 0.15), cfg, RasterMode::Soft);
    const StrokeFrame b =
        raster_oil(oil_stroke(0.4 + double(shift) / n, 0.45 + double(shift) / n, 0.2, 0.3, 0.15), cfg, RasterMode::Soft);
    double worst = 0.0;
    for (int y = 0; y + shift < n; ++y)
        for (int x = 0; x + shift < n; ++x)
            worst = std::max(worst, std::abs(alpha_at(a, y, x) - alpha_at(b, y + shift, x + shift)));
    EXPECT_LE(worst, 1e-6);
}

TEST(RasterOil, SoftConvergesToHardAsTauShrinks) {
    const StrokeParams s = oil_stroke(0.47, 0.52, 0.33, 0.41, 0.12);
    const RasterConfig cfg = config(64, 0.1);
    const StrokeFrame soft = raster_oil(s, cfg, RasterMode::Soft);
    const StrokeFrame hard = raster_oil(s, cfg, RasterMode::Hard);
    // Distance of each pixel center to the rectangle boundary, in pixels.
    const double cx = 0.47 * 64, cy = 0.52 * 64, hw = 0.41 * 32, hh = 0.33 * 32, th = 0.12 * M_PI;
    int checked = 0;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            const double ux = std::cos(th) * dx + std::sin(th) * dy;
            const double uy = -std::sin(th) * dx + std::cos(th) * dy;
            if (std::abs(std::abs(ux) - hw) < 1.5 || std::abs(std::abs(uy) - hh) < 1.5) continue;
            EXPECT_NEAR(alpha_at(soft, y, x), alpha_at(hard, y, x), 1e-3);
            ++checked;
        }
    }
    EXPECT_GT(checked, 3000);
}

TEST(RasterOil, AlphaIsZeroOutsideSupport) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
        const StrokeFrame f = raster_oil(random_oil(rng), config(64), RasterMode::Soft);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (!f.support.contains(y, x)) EXPECT_EQ(alpha_at(f, y, x), 0.0);
    }
}

TEST(RasterOil, KindMismatchThrows) {
    EXPECT_THROW(raster_oil(bezier_stroke({0, 0, 0, 0, 0, 0}, 0.1, 1, 0.1, 1), config(8), RasterMode::Soft),
                 ConfigError);
}

TEST(RasterBezier, DegenerateCurveIsDisc) {
    const double rho = 0.5;
    const StrokeFrame f =
        raster_bezier(bezier_stroke({0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, rho, 1, rho, 1), config(32), RasterMode::Hard);
    const double radius = rho * 32 / 2;
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            const double d = std::hypot(y + 0.5 - 16, x + 0.5 - 16);
            EXPECT_EQ(alpha_at(f, y, x), d <= radius ? 1.0 : 0.0);
        }
    }
}

TEST(RasterBezier, ZeroTransparencyIsInvisible) {
    const StrokeParams s = bezier_stroke({0.2, 0.3, 0.5, 0.9, 0.8, 0.4}, 0.3, 0.0, 0.2, 0.0);
    for (RasterMode mode : {RasterMode::Soft, RasterMode::Hard})
        for (double a : raster_bezier(s, config(32), mode).alpha) EXPECT_EQ(a, 0.0);
}

TEST(RasterBezier, ThicknessFollowsRadii) {
    const int n = 128;
    const double r0 = 0.2, r1 = 0.1;
    const StrokeFrame f =
        raster_bezier(bezier_stroke({0.1, 0.5, 0.5, 0.5, 0.9, 0.5}, r0, 1, r1, 1), config(n), RasterMode::Hard);
    auto thickness = [&](double s) {
        const int x = static_cast<int>((0.1 + 0.8 * s) * n);
        int count = 0;
        for (int y = 0; y < n; ++y) count += alpha_at(f, y, x) > 0.5;
        return count;
    };
    // At the curve ends the expected thickness is 2 * rad.
    const double expected0 = 2 * (r0 + (r1 - r0) * 0.0) * n / 2;
    const double expected1 = 2 * r1 * n / 2;
    EXPECT_NEAR(thickness(0.0), expected0, 2.0);
    EXPECT_NEAR(thickness(1.0) , expected1, 2.0);
    EXPECT_NEAR(static_cast<double>(thickness(0.0)) / thickness(1.0), r0 / r1, 2.0 / expected1 * (r0 / r1));
}

TEST(RasterGrad, ZeroUpstreamGivesZeroGradient) {
    std::mt19937_64 rng(5);
    const StrokeParams s = random_oil(rng);
    const RasterConfig cfg = config(32);
    StrokeFrame up(32, 32);
    for (double g : raster_grad(s, cfg, RasterMode::Soft, up)) EXPECT_EQ(g, 0.0);
}

TEST(RasterGrad, ColorGradientIsUpstreamSum) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(-1, 1);
    const StrokeParams s = random_oil(rng);
    StrokeFrame up(32, 32);
    double sums[3] = {0, 0, 0};
    for (std::size_t i = 0; i < up.color.size(); ++i) {
        up.color[i] = unit(rng);
        sums[i % 3] += up.color[i];
    }
    const auto g = raster_grad(s, config(32), RasterMode::Soft, up);
    EXPECT_NEAR(g[oil::R], sums[0], 1e-9);
    EXPECT_NEAR(g[oil::G], sums[1], 1e-9);
    EXPECT_NEAR(g[oil::B], sums[2], 1e-9);
}

TEST(RasterGrad, AlphaIndependentOfColor) {
    std::mt19937_64 rng(8);
    StrokeParams s = random_oil(rng);
    const StrokeFrame a = raster_oil(s, config(32), RasterMode::Soft);
    s[oil::R] = 1.0 - s[oil::R];
    EXPECT_EQ(raster_oil(s, config(32), RasterMode::Soft).alpha, a.alpha);
}

TEST(RasterGrad, HardModeIsUnsupported) {
    std::mt19937_64 rng(9);
    EXPECT_THROW(raster_grad(random_oil(rng), config(16), RasterMode::Hard, StrokeFrame(16, 16)),
                 UnsupportedModeError);
}

namespace {

double weighted_sum(const StrokeParams& s, const RasterConfig& cfg, const StrokeFrame& up) {
    const StrokeFrame f = rasterize(s, cfg, RasterMode::Soft);
    double total = 0.0;
    for (std::size_t p = 0; p < f.alpha.size(); ++p) total += up.alpha[p] * f.alpha[p];
    for (std::size_t i = 0; i < f.color.size(); ++i) total += up.color[i] * f.color[i];
    return total;
}

void check_against_finite_differences(const StrokeParams& s, const RasterConfig& cfg, std::mt19937_64& rng,
                                      double step = 1e-4) {
    std::uniform_real_distribution<double> unit(-1, 1);
    StrokeFrame up(cfg.h, cfg.w);
    for (double& v : up.alpha) v = unit(rng);
    for (double& v : up.color) v = unit(rng);
    const auto g = raster_grad(s, cfg, RasterMode::Soft, up);
    for (std::size_t c = 0; c < s.size(); ++c) {
        StrokeParams plus = s, minus = s;
        plus[c] += step;
        minus[c] -= step;
        const double fd = (weighted_sum(plus, cfg, up) - weighted_sum(minus, cfg, up)) / (2 * step);
        const double scale = std::max({std::abs(fd), std::abs(g[c]), 1.0});
        EXPECT_LE(std::abs(fd - g[c]) / scale, 1e-3) << "component " << component_name(s.kind, c);
    }
}

}  // namespace

TEST(RasterGrad, OilMatchesFiniteDifferences) {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 5; ++i) check_against_finite_differences(random_oil(rng), config(32), rng);
}

TEST(RasterGrad, TexturedOilMatchesFiniteDifferences) {
    std::mt19937_64 rng(12);
    RasterConfig cfg = config(32);
    auto tex = std::make_shared<ScalarMap>(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) tex->at(y, x) = 0.5 + 0.4 * std::sin(0.7 * x) * std::cos(0.4 * y);
    cfg.texture = tex;
    // Bilinear texels are piecewise linear; a small step avoids straddling texel edges.
    check_against_finite_differences(random_oil(rng), cfg, rng, 1e-7);
}

TEST(RasterGrad, BezierMatchesFiniteDifferencesAwayFromSampleSwitches) {
    // The nearest sample index is held constant, so use a many-sample curve
    // whose finite differences do not cross a switch in aggregate.
    std::mt19937_64 rng(13);
    RasterConfig cfg = config(32);
    cfg.bezier_samples = 64;
    const StrokeParams s = bezier_stroke({0.2, 0.3, 0.5, 0.8, 0.8, 0.35}, 0.15, 0.7, 0.25, 0.9);
    std::uniform_real_distribution<double> unit(-1, 1);
    StrokeFrame up(32, 32);
    for (double& v : up.alpha) v = unit(rng);
    const auto g = raster_grad(s, cfg, RasterMode::Soft, up);
    const double step = 1e-6;
    for (std::size_t c : {bezier::R0, bezier::T0, bezier::R1, bezier::T1}) {
        StrokeParams plus = s, minus = s;
        plus[c] += step;
        minus[c] -= step;
        const double fd = (weighted_sum(plus, cfg, up) - weighted_sum(minus, cfg, up)) / (2 * step);
        EXPECT_LE(std::abs(fd - g[c]) / std::max(1.0, std::abs(fd)), 1e-3) << component_name(s.kind, c);
    }
}

TEST(RasterConfigValidation, RejectsBadValues) {
    RasterConfig cfg;
    cfg.softness_tau = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = RasterConfig{};
    cfg.bezier_samples = 4;
    EXPECT_THROW(cfg.validate(), ConfigError);
}
