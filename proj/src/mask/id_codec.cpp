#include "annotweave/mask/id_codec.hpp"

#include <algorithm>
#include <array>

#include "annotweave/core/error.hpp"

namespace annotweave {

GrayImage encode_id_image(const std::vector<IdMask>& objects, int width, int height,
                          const Bitmask* shared_dontcare) {
  GrayImage out = GrayImage::Zero(height, width);
  Bitmask band = empty_mask(width, height);
  if (shared_dontcare != nullptr) {
    if (shared_dontcare->rows() != height || shared_dontcare->cols() != width) {
      throw Error(ErrorCode::InvalidArgument, "shared don't-care band has the wrong size");
    }
    band = (*shared_dontcare != 0).cast<std::uint8_t>();
  }

  for (const auto& [id, mask] : objects) {
    if (!is_legal_pixel_id(id.value)) {
      throw Error(ErrorCode::InvalidArgument, "ID " + std::to_string(id.value) + " cannot be encoded as a gray level");
    }
    if (mask.width() != width || mask.height() != height) {
      throw Error(ErrorCode::InvalidArgument, "mask size differs from the ID image size");
    }
    const auto overlap = ((out != 0) && (mask.object != 0)).count();
    if (overlap > 0) {
      throw Error(ErrorCode::OverlappingObjects, "object " + std::to_string(id.value) + " overlaps another object",
                  std::to_string(overlap));
    }
    out = (mask.object != 0).select(static_cast<std::uint8_t>(id.value), out);
    band = (band != 0 || mask.dontcare != 0).cast<std::uint8_t>();
  }
  out = (out == 0 && band != 0).select(static_cast<std::uint8_t>(kDontCareValue), out);
  return out;
}

DecodedIdImage decode_id_image(const GrayImage& raster, const std::optional<std::vector<ObjectId>>& expected_ids) {
  const int h = static_cast<int>(raster.rows());
  const int w = static_cast<int>(raster.cols());
  DecodedIdImage out;

  std::array<std::int64_t, 256> histogram{};
  for (Eigen::Index i = 0; i < raster.size(); ++i) ++histogram[raster.data()[i]];

  std::int64_t reserved = 0;
  for (int v = 1; v <= kMaxReservedId; ++v) reserved += histogram[v];
  if (reserved > 0) {
    out.warnings.push_back(std::to_string(reserved) + " pixels carry reserved internal values (1-10); ignored");
  }

  for (int v = kMaxReservedId + 1; v <= kMaxPixelId; ++v) {
    if (histogram[v] == 0 || v == kDontCareValue) continue;
    if (expected_ids && std::find(expected_ids->begin(), expected_ids->end(), ObjectId{v}) == expected_ids->end()) {
      throw Error(ErrorCode::UnknownId, "ID image contains unexpected value " + std::to_string(v), std::to_string(v));
    }
    PixelMask mask(w, h);
    mask.object = (raster == static_cast<std::uint8_t>(v)).cast<std::uint8_t>();
    out.objects.push_back({ObjectId{v}, std::move(mask)});
  }

  if (histogram[kDontCareValue] > 0) {
    Bitmask band = (raster == static_cast<std::uint8_t>(kDontCareValue)).cast<std::uint8_t>();
    if (out.objects.size() == 1) {
      out.objects.front().mask.dontcare = std::move(band);
    } else {
      out.shared_dontcare = std::move(band);
    }
  }
  return out;
}

}  // namespace annotweave
