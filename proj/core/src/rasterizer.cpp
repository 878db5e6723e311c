#include "fastpaint/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fastpaint/error.hpp"

namespace fastpaint {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double sign(double v) { return (v > 0.0) - (v < 0.0); }

PixelRect clip_rect(double cx, double cy, double ex, double ey, int h, int w) {
    PixelRect r;
    r.x0 = std::max(0, static_cast<int>(std::floor(cx - ex - 0.5)));
    r.x1 = std::min(w, static_cast<int>(std::ceil(cx + ex + 0.5)));
    r.y0 = std::max(0, static_cast<int>(std::floor(cy - ey - 0.5)));
    r.y1 = std::min(h, static_cast<int>(std::ceil(cy + ey + 0.5)));
    if (r.empty()) r = PixelRect{};
    return r;
}

}  // namespace

void RasterConfig::validate() const {
    if (h < 1 || w < 1) throw ConfigError("raster canvas must be at least 1x1");
    if (!(softness_tau > 0.0)) throw ConfigError("softness_tau must be > 0");
    if (bezier_samples < 8) throw ConfigError("bezier_samples must be >= 8");
    if (texture && (texture->h < 1 || texture->w < 1)) throw ConfigError("texture is empty");
}

PreparedStroke::PreparedStroke(const StrokeParams& stroke, const RasterConfig& cfg)
    : kind_(stroke.kind), params_(stroke), h_(cfg.h), w_(cfg.w), tau_(cfg.softness_tau) {
    if (auto v = validate(stroke)) throw ConfigError("invalid stroke: " + v->message);
    color_ = stroke.color();
    if (kind_ == StrokeKind::Oil) {
        texture_ = cfg.texture.get();
        cx_ = stroke[oil::X] * w_;
        cy_ = stroke[oil::Y] * h_;
        half_w_ = stroke[oil::W] * w_ / 2.0;
        half_h_ = stroke[oil::H] * h_ / 2.0;
        const double theta = stroke[oil::Theta] * std::numbers::pi;
        cos_ = std::cos(theta);
        sin_ = std::sin(theta);
    } else {
        const int m = cfg.bezier_samples;
        sample_s_.resize(m);
        sample_x_.resize(m);
        sample_y_.resize(m);
        for (int j = 0; j < m; ++j) {
            const double s = static_cast<double>(j) / (m - 1);
            const double b0 = (1 - s) * (1 - s), b1 = 2 * s * (1 - s), b2 = s * s;
            sample_s_[j] = s;
            sample_x_[j] = w_ * (b0 * stroke[bezier::X0] + b1 * stroke[bezier::X1] + b2 * stroke[bezier::X2]);
            sample_y_[j] = h_ * (b0 * stroke[bezier::Y0] + b1 * stroke[bezier::Y1] + b2 * stroke[bezier::Y2]);
        }
        radius_scale_ = std::min(h_, w_) / 2.0;
    }
}

PixelRect PreparedStroke::support(RasterMode mode) const {
    const double margin = mode == RasterMode::Soft ? kSoftSupportMargin * tau_ : 0.0;
    if (kind_ == StrokeKind::Oil) {
        const double ax = half_w_ + margin, ay = half_h_ + margin;
        const double ex = std::abs(cos_) * ax + std::abs(sin_) * ay;
        const double ey = std::abs(sin_) * ax + std::abs(cos_) * ay;
        return clip_rect(cx_, cy_, ex, ey, h_, w_);
    }
    if (std::max(params_[bezier::T0], params_[bezier::T1]) == 0.0) return PixelRect{};
    const double reach = std::max(params_[bezier::R0], params_[bezier::R1]) * radius_scale_ + margin;
    const auto [xmin, xmax] = std::minmax({params_[bezier::X0], params_[bezier::X1], params_[bezier::X2]});
    const auto [ymin, ymax] = std::minmax({params_[bezier::Y0], params_[bezier::Y1], params_[bezier::Y2]});
    const double cx = (xmin + xmax) * w_ / 2.0, cy = (ymin + ymax) * h_ / 2.0;
    return clip_rect(cx, cy, (xmax - xmin) * w_ / 2.0 + reach, (ymax - ymin) * h_ / 2.0 + reach, h_, w_);
}

PreparedStroke::Texel PreparedStroke::sample_texture(double ux, double uy) const {
    if (!texture_) return {1.0, 0.0, 0.0};
    const ScalarMap& tex = *texture_;
    const double hw = std::max(half_w_, 1e-9), hh = std::max(half_h_, 1e-9);
    // Texel centers sit at integer + 0.5 in texture space.
    const double tu = (ux / (2.0 * hw) + 0.5) * tex.w - 0.5;
    const double tv = (uy / (2.0 * hh) + 0.5) * tex.h - 0.5;
    const double cu = std::clamp(tu, 0.0, static_cast<double>(tex.w - 1));
    const double cv = std::clamp(tv, 0.0, static_cast<double>(tex.h - 1));
    const int u0 = std::min(static_cast<int>(cu), std::max(0, tex.w - 2));
    const int v0 = std::min(static_cast<int>(cv), std::max(0, tex.h - 2));
    const int u1 = std::min(u0 + 1, tex.w - 1), v1 = std::min(v0 + 1, tex.h - 1);
    const double fu = cu - u0, fv = cv - v0;
    const double t00 = tex.at(v0, u0), t01 = tex.at(v0, u1), t10 = tex.at(v1, u0), t11 = tex.at(v1, u1);
    const double value = (1 - fv) * ((1 - fu) * t00 + fu * t01) + fv * ((1 - fu) * t10 + fu * t11);
    const bool u_inside = tu > 0.0 && tu < tex.w - 1;
    const bool v_inside = tv > 0.0 && tv < tex.h - 1;
    const double d_tu = u_inside ? (1 - fv) * (t01 - t00) + fv * (t11 - t10) : 0.0;
    const double d_tv = v_inside ? (1 - fu) * (t10 - t00) + fu * (t11 - t01) : 0.0;
    // Chain through tu = (ux / 2hw + 0.5) * W_t - 0.5.
    return {value, d_tu * tex.w / (2.0 * hw), d_tv * tex.h / (2.0 * hh)};
}

double PreparedStroke::oil_alpha(double px, double py, RasterMode mode) const {
    const double dx = px - cx_, dy = py - cy_;
    const double ux = cos_ * dx + sin_ * dy;
    const double uy = -sin_ * dx + cos_ * dy;
    if (mode == RasterMode::Hard) {
        if (std::abs(ux) > half_w_ || std::abs(uy) > half_h_) return 0.0;
        return (!texture_ || sample_texture(ux, uy).value >= 0.5) ? 1.0 : 0.0;
    }
    const double a = logistic((half_w_ - std::abs(ux)) / tau_);
    const double b = logistic((half_h_ - std::abs(uy)) / tau_);
    return a * b * sample_texture(ux, uy).value;
}

std::size_t PreparedStroke::nearest_sample(double px, double py) const {
    std::size_t best = 0;
    double best_d2 = INFINITY;
    for (std::size_t j = 0; j < sample_s_.size(); ++j) {
        const double ddx = px - sample_x_[j], ddy = py - sample_y_[j];
        const double d2 = ddx * ddx + ddy * ddy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = j;
        }
    }
    return best;
}

double PreparedStroke::bezier_alpha(double px, double py, RasterMode mode) const {
    const std::size_t j = nearest_sample(px, py);
    const double s = sample_s_[j];
    const double d = std::hypot(px - sample_x_[j], py - sample_y_[j]);
    const double radius = ((1 - s) * params_[bezier::R0] + s * params_[bezier::R1]) * radius_scale_;
    const double opacity = (1 - s) * params_[bezier::T0] + s * params_[bezier::T1];
    if (mode == RasterMode::Hard) return d <= radius ? opacity : 0.0;
    return opacity * logistic((radius - d) / tau_);
}

double PreparedStroke::alpha(int y, int x, RasterMode mode) const {
    const double px = x + 0.5, py = y + 0.5;
    return kind_ == StrokeKind::Oil ? oil_alpha(px, py, mode) : bezier_alpha(px, py, mode);
}

void PreparedStroke::oil_vjp(double px, double py, double d_alpha, std::span<double> grad) const {
    const double dx = px - cx_, dy = py - cy_;
    const double ux = cos_ * dx + sin_ * dy;
    const double uy = -sin_ * dx + cos_ * dy;
    const double sa = logistic((half_w_ - std::abs(ux)) / tau_);
    const double sb = logistic((half_h_ - std::abs(uy)) / tau_);
    const Texel t = sample_texture(ux, uy);

    const double d_za = sa * (1 - sa) * sb * t.value / tau_;  // d alpha / d(half_w - |ux|)
    const double d_zb = sa * sb * (1 - sb) * t.value / tau_;
    const double d_tex = sa * sb;

    double g_ux = -sign(ux) * d_za + d_tex * t.d_u;
    double g_uy = -sign(uy) * d_zb + d_tex * t.d_v;
    double g_hw = d_za;
    double g_hh = d_zb;
    if (texture_) {
        // Texture coordinates scale with 1 / half extent.
        g_hw += d_tex * t.d_u * (-ux / std::max(half_w_, 1e-9));
        g_hh += d_tex * t.d_v * (-uy / std::max(half_h_, 1e-9));
    }

    grad[oil::X] += d_alpha * w_ * (-cos_ * g_ux + sin_ * g_uy);
    grad[oil::Y] += d_alpha * h_ * (-sin_ * g_ux - cos_ * g_uy);
    grad[oil::W] += d_alpha * (w_ / 2.0) * g_hw;
    grad[oil::H] += d_alpha * (h_ / 2.0) * g_hh;
    grad[oil::Theta] += d_alpha * std::numbers::pi * (g_ux * uy - g_uy * ux);
}

void PreparedStroke::bezier_vjp(double px, double py, double d_alpha, std::span<double> grad) const {
    const std::size_t j = nearest_sample(px, py);
    const double s = sample_s_[j];
    const double ddx = px - sample_x_[j], ddy = py - sample_y_[j];
    const double d = std::hypot(ddx, ddy);
    const double radius = ((1 - s) * params_[bezier::R0] + s * params_[bezier::R1]) * radius_scale_;
    const double opacity = (1 - s) * params_[bezier::T0] + s * params_[bezier::T1];
    const double sig = logistic((radius - d) / tau_);

    const double g_z = d_alpha * opacity * sig * (1 - sig) / tau_;  // d / d(radius - d)
    grad[bezier::T0] += d_alpha * sig * (1 - s);
    grad[bezier::T1] += d_alpha * sig * s;
    grad[bezier::R0] += g_z * (1 - s) * radius_scale_;
    grad[bezier::R1] += g_z * s * radius_scale_;
    if (d > 0.0) {
        // d(d)/d(sample) = -(p - sample) / d; the radius term enters with a minus.
        const double gx = g_z * ddx / d, gy = g_z * ddy / d;
        const double b0 = (1 - s) * (1 - s), b1 = 2 * s * (1 - s), b2 = s * s;
        grad[bezier::X0] += gx * w_ * b0;
        grad[bezier::X1] += gx * w_ * b1;
        grad[bezier::X2] += gx * w_ * b2;
        grad[bezier::Y0] += gy * h_ * b0;
        grad[bezier::Y1] += gy * h_ * b1;
        grad[bezier::Y2] += gy * h_ * b2;
    }
}

void PreparedStroke::accumulate_alpha_vjp(int y, int x, double d_alpha, std::span<double> grad) const {
    if (d_alpha == 0.0) return;
    const double px = x + 0.5, py = y + 0.5;
    if (kind_ == StrokeKind::Oil)
        oil_vjp(px, py, d_alpha, grad);
    else
        bezier_vjp(px, py, d_alpha, grad);
}

void rasterize_into(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode, StrokeFrame& out) {
    cfg.validate();
    const PreparedStroke prepared(stroke, cfg);
    const std::size_t n = static_cast<std::size_t>(cfg.h) * cfg.w;
    out.h = cfg.h;
    out.w = cfg.w;
    out.alpha.assign(n, 0.0);
    out.color.resize(3 * n);
    const auto rgb = prepared.color();
    for (std::size_t p = 0; p < n; ++p) {
        out.color[3 * p] = rgb[0];
        out.color[3 * p + 1] = rgb[1];
        out.color[3 * p + 2] = rgb[2];
    }
    out.support = prepared.support(mode);
    const PixelRect& r = out.support;
    for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
            out.alpha[static_cast<std::size_t>(y) * cfg.w + x] = prepared.alpha(y, x, mode);
        }
    }
}

StrokeFrame rasterize(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode) {
    StrokeFrame frame;
    rasterize_into(stroke, cfg, mode, frame);
    return frame;
}

StrokeFrame raster_oil(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode) {
    if (stroke.kind != StrokeKind::Oil) throw ConfigError("raster_oil expects an oil stroke");
    return rasterize(stroke, cfg, mode);
}

StrokeFrame raster_bezier(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode) {
    if (stroke.kind != StrokeKind::Bezier) throw ConfigError("raster_bezier expects a Bezier stroke");
    return rasterize(stroke, cfg, mode);
}

std::vector<StrokeFrame> rasterize_all(std::span<const StrokeParams> strokes, const RasterConfig& cfg,
                                       RasterMode mode) {
    std::vector<StrokeFrame> frames(strokes.size());
    for (std::size_t i = 0; i < strokes.size(); ++i) rasterize_into(strokes[i], cfg, mode, frames[i]);
    return frames;
}

std::vector<double> raster_grad(const StrokeParams& stroke, const RasterConfig& cfg, RasterMode mode,
                                const StrokeFrame& upstream) {
    if (mode != RasterMode::Soft) throw UnsupportedModeError("raster_grad requires soft mode");
    cfg.validate();
    const std::size_t n = static_cast<std::size_t>(cfg.h) * cfg.w;
    if (upstream.h != cfg.h || upstream.w != cfg.w || upstream.alpha.size() != n || upstream.color.size() != 3 * n) {
        throw ShapeError("raster_grad: upstream adjoint does not match the raster canvas");
    }
    const PreparedStroke prepared(stroke, cfg);
    std::vector<double> grad(stroke.size(), 0.0);

    // The color map is constant, so each color component collects its whole channel.
    const std::size_t c0 = stroke.size() - 3;
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) grad[c0 + c] += upstream.color[3 * p + c];
    }
    const PixelRect r = prepared.support(RasterMode::Soft);
    for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
            prepared.accumulate_alpha_vjp(y, x, upstream.alpha[static_cast<std::size_t>(y) * cfg.w + x], grad);
        }
    }
    return grad;
}

}  // namespace fastpaint
