#include "fastpaint/metrics.hpp"

#include <array>
#include <cmath>

#include "fastpaint/error.hpp"
#include "fastpaint/losses.hpp"

namespace fastpaint {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow * kWindow> gaussian_window() {
    std::array<double, kWindow * kWindow> win{};
    double total = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        for (int j = 0; j < kWindow; ++j) {
            const double dy = i - kWindow / 2, dx = j - kWindow / 2;
            win[i * kWindow + j] = std::exp(-(dx * dx + dy * dy) / (2 * kSigma * kSigma));
            total += win[i * kWindow + j];
        }
    }
    for (double& v : win) v /= total;
    return win;
}

}  // namespace

double mse(const Canvas& a, const Canvas& b) { return l2_loss(a, b); }

double ssim(const Canvas& a, const Canvas& b) {
    if (a.h != b.h || a.w != b.w) throw ShapeError("ssim: images differ in size");
    if (a.h < kWindow || a.w < kWindow) throw ShapeError("ssim: images must be at least 11x11");
    static const auto win = gaussian_window();

    const int oh = a.h - kWindow + 1, ow = a.w - kWindow + 1;
    double channel_sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        double map_sum = 0.0;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
                for (int i = 0; i < kWindow; ++i) {
                    for (int j = 0; j < kWindow; ++j) {
                        const double wgt = win[i * kWindow + j];
                        const double va = a.at(y + i, x + j, c), vb = b.at(y + i, x + j, c);
                        mu_a += wgt * va;
                        mu_b += wgt * vb;
                        aa += wgt * va * va;
                        bb += wgt * vb * vb;
                        ab += wgt * va * vb;
                    }
                }
                const double var_a = aa - mu_a * mu_a, var_b = bb - mu_b * mu_b, cov = ab - mu_a * mu_b;
                map_sum += ((2 * mu_a * mu_b + kC1) * (2 * cov + kC2)) /
                           ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
            }
        }
        channel_sum += map_sum / (static_cast<double>(oh) * ow);
    }
    return channel_sum / 3.0;
}

MetricReport compute_metrics(const Canvas& a, const Canvas& b) { return {mse(a, b), ssim(a, b)}; }

}  // namespace fastpaint
