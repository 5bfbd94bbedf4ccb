#pragma once

#include <optional>
#include <string>
#include <vector>

#include "annotweave/core/model.hpp"

namespace annotweave {

struct IdMask {
  ObjectId id;
  PixelMask mask;
};

/// Writes object IDs as gray levels; 170 marks don't-care pixels not covered by any object.
/// `shared_dontcare` (optional) contributes to the 170 band as well.
/// Throws Error(OverlappingObjects) when two object rasters intersect, Error(InvalidArgument) for illegal IDs.
[[nodiscard]] GrayImage encode_id_image(const std::vector<IdMask>& objects, int width, int height,
                                        const Bitmask* shared_dontcare = nullptr);

struct DecodedIdImage {
  std::vector<IdMask> objects;  // ascending ID order
  /// Set when the 170 band cannot be attributed to a single object.
  std::optional<Bitmask> shared_dontcare;
  std::vector<std::string> warnings;
};

/// Inverse of encode_id_image. With `expected_ids`, any other legal value raises Error(UnknownId).
[[nodiscard]] DecodedIdImage decode_id_image(const GrayImage& raster,
                                             const std::optional<std::vector<ObjectId>>& expected_ids = std::nullopt);

}  // namespace annotweave
