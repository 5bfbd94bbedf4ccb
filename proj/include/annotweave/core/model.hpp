#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "annotweave/core/raster.hpp"

namespace annotweave {

struct ObjectId {
  std::int64_t value = 0;

  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
};

enum class ObjectStatus { Active, LastFrameReached };

enum class GeometryKind { Box, Pixel };

/// Gray value marking the don't-care band in ID images.
inline constexpr std::int64_t kDontCareValue = 170;
/// Gray values 0..kMaxReservedId are reserved for internal use in ID images.
inline constexpr std::int64_t kMaxReservedId = 10;
inline constexpr std::int64_t kMaxPixelId = 255;

[[nodiscard]] constexpr bool is_legal_pixel_id(std::int64_t v) {
  return v > kMaxReservedId && v <= kMaxPixelId && v != kDontCareValue;
}

/// Ordered list of binary attribute names; order defines CSV column order.
struct MetaSchema {
  std::vector<std::string> names;

  [[nodiscard]] bool contains(const std::string& name) const;
  friend bool operator==(const MetaSchema&, const MetaSchema&) = default;
};

/// Axis-aligned box in master image coordinates, half-open: [ul, lr).
struct BoundingBox {
  int ul_x = 0;
  int ul_y = 0;
  int lr_x = 0;
  int lr_y = 0;

  [[nodiscard]] int width() const { return lr_x - ul_x; }
  [[nodiscard]] int height() const { return lr_y - ul_y; }
  [[nodiscard]] std::int64_t area() const {
    return width() > 0 && height() > 0 ? std::int64_t{width()} * height() : 0;
  }
  [[nodiscard]] bool empty() const { return width() <= 0 || height() <= 0; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

[[nodiscard]] BoundingBox hull(const BoundingBox& a, const BoundingBox& b);
[[nodiscard]] BoundingBox intersect(const BoundingBox& a, const BoundingBox& b);

struct Polygon {
  std::vector<Eigen::Vector2d> points;

  friend bool operator==(const Polygon& a, const Polygon& b);
};

/// Object raster plus its don't-care border band, both sized to the master image.
struct PixelMask {
  Bitmask object;
  Bitmask dontcare;

  PixelMask() = default;
  PixelMask(int width, int height) : object(empty_mask(width, height)), dontcare(empty_mask(width, height)) {}
  explicit PixelMask(Bitmask obj) : object(std::move(obj)), dontcare(Bitmask::Zero(object.rows(), object.cols())) {}

  [[nodiscard]] int width() const { return static_cast<int>(object.cols()); }
  [[nodiscard]] int height() const { return static_cast<int>(object.rows()); }

  friend bool operator==(const PixelMask& a, const PixelMask& b) {
    return raster_equal(a.object, b.object) && raster_equal(a.dontcare, b.dontcare);
  }
};

using Geometry = std::variant<BoundingBox, Polygon, PixelMask>;

struct AnnotatedObject {
  ObjectId id;
  std::string tag;
  ObjectStatus status = ObjectStatus::Active;
  std::map<std::string, bool> meta;
  Geometry geometry;

  friend bool operator==(const AnnotatedObject&, const AnnotatedObject&) = default;
};

struct FrameAnnotations {
  int frame_index = 0;
  std::string image_file;
  std::vector<AnnotatedObject> objects;
  /// Don't-care band that cannot be attributed to a single object (multi-object ID images).
  std::optional<Bitmask> shared_dontcare;

  [[nodiscard]] AnnotatedObject* find(ObjectId id);
  [[nodiscard]] const AnnotatedObject* find(ObjectId id) const;
  bool erase(ObjectId id);

  friend bool operator==(const FrameAnnotations& a, const FrameAnnotations& b);
};

/// Per-frame annotations aligned index-for-index with Project::frame_files.
struct AnnotationStore {
  std::vector<FrameAnnotations> frames;

  [[nodiscard]] int size() const { return static_cast<int>(frames.size()); }
  [[nodiscard]] bool in_range(int idx) const { return idx >= 0 && idx < size(); }

  friend bool operator==(const AnnotationStore&, const AnnotationStore&) = default;
};

struct Modality {
  std::string dir = ".";
  std::string pattern = "*.png";
  friend bool operator==(const Modality&, const Modality&) = default;
};

struct Modalities {
  Modality rgb;
  std::optional<Modality> thermal;
  friend bool operator==(const Modalities&, const Modalities&) = default;
};

struct Project {
  std::filesystem::path root_dir;
  std::vector<std::string> frame_files;
  MetaSchema meta_schema;
  std::vector<std::string> suggested_tags;
  bool limit_tags = false;
  Modalities modalities;
  std::optional<Bitmask> dontcare_mask;
  GeometryKind geometry_kind = GeometryKind::Box;
  /// Master image size when known (read from the first frame or a mask image).
  std::optional<ImageSize> image_size;
  int dontcare_border_width = 0;
  /// Homography file relative to root; empty when no thermal registration is configured.
  std::string homography_file;

  [[nodiscard]] int frame_index_of(const std::string& file) const;
};

/// Fresh store with one empty FrameAnnotations per project frame.
[[nodiscard]] AnnotationStore make_store(const Project& project);

[[nodiscard]] std::string to_string(ObjectStatus s);
[[nodiscard]] std::string to_string(GeometryKind k);

}  // namespace annotweave

template <>
struct std::hash<annotweave::ObjectId> {
  std::size_t operator()(const annotweave::ObjectId& id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};
