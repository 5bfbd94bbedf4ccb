#pragma once

#include <cstdint>

#include "annotweave/core/model.hpp"

namespace annotweave {

inline constexpr int kDefaultMinNoiseArea = 16;

/// Deletes 8-connected object components smaller than `min_area`; the largest component always survives.
[[nodiscard]] PixelMask remove_noise(PixelMask mask, int min_area = kDefaultMinNoiseArea);

/// Turns background regions (4-connected) that cannot reach the image border into object pixels.
[[nodiscard]] PixelMask fill_holes(PixelMask mask);

/// Replaces the don't-care band with the dilation of the object by a disc of `width`, minus the object.
[[nodiscard]] PixelMask add_dontcare_border(PixelMask mask, int width);

/// Tight half-open box around the object bits. Throws Error(EmptyMask).
[[nodiscard]] BoundingBox mask_to_bbox(const PixelMask& mask);
[[nodiscard]] BoundingBox mask_to_bbox(const Bitmask& bits);

/// Component label per pixel (0 = background, 1..n), with 8- or 4-connectivity over nonzero pixels.
struct Components {
  Raster<std::int32_t> labels;
  std::vector<std::int64_t> areas;  // areas[k] is the size of label k + 1
};
[[nodiscard]] Components label_components(const Bitmask& bits, bool eight_connected);

}  // namespace annotweave
