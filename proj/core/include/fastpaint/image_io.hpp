#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fastpaint/types.hpp"

namespace fastpaint {

// 8-bit PNG I/O. Samples map to [0,1] by v / 255; writing rounds v * 255
// half-to-even, so a load of a saved canvas is lossless for 8-bit content.
Canvas load_png(const std::filesystem::path& path);
void save_png(const Canvas& canvas, const std::filesystem::path& path);

// Grayscale view of any PNG (RGB averaged with luma weights), values in [0,1].
ScalarMap load_png_gray(const std::filesystem::path& path);

std::vector<std::uint8_t> to_rgb8(const Canvas& canvas);
Canvas quantize_rgb8(const Canvas& canvas);

// Area-weighted resampling: each output pixel averages the input area it
// covers. Same-size input is returned unchanged.
Canvas resize_area(const Canvas& src, int h, int w);

// Copies the [y0, y0+h) x [x0, x0+w) window, replicating edge pixels for
// coordinates outside the source.
Canvas crop_replicate(const Canvas& src, int y0, int x0, int h, int w);

}  // namespace fastpaint
