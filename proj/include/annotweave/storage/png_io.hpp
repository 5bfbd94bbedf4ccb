#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "annotweave/core/raster.hpp"

namespace annotweave {

/// Any PNG converted to 8-bit gray. Throws Error(IoFailure).
[[nodiscard]] GrayImage read_png_gray(const std::filesystem::path& path);
/// Any PNG converted to 8-bit RGB. Throws Error(IoFailure).
[[nodiscard]] RgbImage read_png_rgb(const std::filesystem::path& path);
/// Header-only size probe.
[[nodiscard]] ImageSize read_png_size(const std::filesystem::path& path);

void write_png_gray(const std::filesystem::path& path, const GrayImage& image);
[[nodiscard]] std::vector<std::uint8_t> encode_png_gray(const GrayImage& image);
[[nodiscard]] std::vector<std::uint8_t> encode_png_rgb(const RgbImage& image);
[[nodiscard]] RgbImage decode_png_rgb(const std::vector<std::uint8_t>& bytes);

/// Box-filter downscale so the longer side is at most `max_side` pixels.
[[nodiscard]] RgbImage downscale(const RgbImage& image, int max_side);

}  // namespace annotweave
