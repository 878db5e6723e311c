#include "fastpaint/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "fastpaint/error.hpp"

namespace fastpaint {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct DecodedPng {
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> rgb;  // h * w * 3
};

DecodedPng decode_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) throw IoError("cannot open image " + path.string());

    png_byte header[8] = {};
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
        throw FormatError("not a PNG file: " + path.string());
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    DecodedPng out;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed decoding PNG " + path.string());
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    out.w = static_cast<int>(png_get_image_width(png, info));
    out.h = static_cast<int>(png_get_image_height(png, info));
    out.rgb.assign(static_cast<std::size_t>(out.h) * out.w * 3, 0);
    rows.resize(out.h);
    for (int y = 0; y < out.h; ++y) rows[y] = out.rgb.data() + static_cast<std::size_t>(y) * out.w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

}  // namespace

Canvas load_png(const std::filesystem::path& path) {
    const DecodedPng img = decode_png(path);
    Canvas canvas(img.h, img.w);
    for (std::size_t i = 0; i < img.rgb.size(); ++i) canvas.pixels[i] = img.rgb[i] / 255.0;
    return canvas;
}

ScalarMap load_png_gray(const std::filesystem::path& path) {
    const DecodedPng img = decode_png(path);
    ScalarMap map(img.h, img.w);
    for (std::size_t p = 0; p < map.pixel_count(); ++p) {
        const double r = img.rgb[3 * p], g = img.rgb[3 * p + 1], b = img.rgb[3 * p + 2];
        // Gray PNGs expand to r == g == b, which this maps back to v / 255 exactly.
        map.values[p] = (r == g && g == b) ? r / 255.0 : (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
    }
    return map;
}

std::vector<std::uint8_t> to_rgb8(const Canvas& canvas) {
    std::vector<std::uint8_t> out(canvas.pixels.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        // nearbyint honors the default round-half-to-even mode.
        const double v = std::nearbyint(std::clamp(canvas.pixels[i], 0.0, 1.0) * 255.0);
        out[i] = static_cast<std::uint8_t>(v);
    }
    return out;
}

Canvas quantize_rgb8(const Canvas& canvas) {
    const auto bytes = to_rgb8(canvas);
    Canvas out(canvas.h, canvas.w);
    for (std::size_t i = 0; i < bytes.size(); ++i) out.pixels[i] = bytes[i] / 255.0;
    return out;
}

void save_png(const Canvas& canvas, const std::filesystem::path& path) {
    if (canvas.h < 1 || canvas.w < 1) throw ShapeError("cannot save an empty image");
    const auto bytes = to_rgb8(canvas);

    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) throw IoError("cannot open " + path.string() + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    std::vector<png_const_bytep> rows(canvas.h);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed writing PNG " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(canvas.w), static_cast<png_uint_32>(canvas.h), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < canvas.h; ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * canvas.w * 3;
    png_write_rows(png, const_cast<png_bytepp>(rows.data()), static_cast<png_uint_32>(canvas.h));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) throw IoError("failed flushing " + path.string());
}

namespace {

// Overlap weights of output cell i over the input axis, normalized to 1.
struct AxisWeights {
    std::vector<int> first;
    std::vector<std::vector<double>> weights;
};

AxisWeights axis_weights(int in, int out) {
    AxisWeights aw;
    aw.first.resize(out);
    aw.weights.resize(out);
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
        const double lo = i * scale;
        const double hi = (i + 1) * scale;
        const int a = static_cast<int>(std::floor(lo));
        const int b = std::min(in, static_cast<int>(std::ceil(hi)));
        aw.first[i] = a;
        double total = 0.0;
        for (int j = a; j < b; ++j) {
            const double wgt = std::min<double>(hi, j + 1) - std::max<double>(lo, j);
            aw.weights[i].push_back(std::max(0.0, wgt));
            total += aw.weights[i].back();
        }
        for (double& wgt : aw.weights[i]) wgt /= total;
    }
    return aw;
}

}  // namespace

Canvas resize_area(const Canvas& src, int h, int w) {
    if (h < 1 || w < 1 || src.h < 1 || src.w < 1) throw ShapeError("resize_area: empty dimensions");
    if (src.h == h && src.w == w) return src;

    const AxisWeights ay = axis_weights(src.h, h);
    const AxisWeights ax = axis_weights(src.w, w);
    Canvas out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (std::size_t i = 0; i < ay.weights[y].size(); ++i) {
                    const int sy = ay.first[y] + static_cast<int>(i);
                    for (std::size_t j = 0; j < ax.weights[x].size(); ++j) {
                        const int sx = ax.first[x] + static_cast<int>(j);
                        acc += ay.weights[y][i] * ax.weights[x][j] * src.at(sy, sx, c);
                    }
                }
                out.at(y, x, c) = acc;
            }
        }
    }
    return out;
}

Canvas crop_replicate(const Canvas& src, int y0, int x0, int h, int w) {
    Canvas out(h, w);
    for (int y = 0; y < h; ++y) {
        const int sy = std::clamp(y0 + y, 0, src.h - 1);
        for (int x = 0; x < w; ++x) {
            const int sx = std::clamp(x0 + x, 0, src.w - 1);
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = src.at(sy, sx, c);
        }
    }
    return out;
}

}  // namespace fastpaint
