#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "annotweave/core/model.hpp"
#include "annotweave/exporters/categories.hpp"

namespace annotweave {

struct SkippedObject {
  int frame = 0;
  ObjectId id;
  std::string tag;
  std::string reason;
};

/// Size of a frame's master image: project size, then mask size, then the image file header.
/// Throws Error(InvalidArgument) when none is available.
[[nodiscard]] ImageSize frame_image_size(const Project& project, const FrameAnnotations& frame);

// YOLO / Darknet training labels

/// `<category> <cx> <cy> <w> <h>` normalised to the image, six decimals. The box is clipped first.
[[nodiscard]] std::string format_yolo_line(int category, const BoundingBox& box, ImageSize image);

struct YoloExport {
  /// Label file name (`<frame-stem>.txt`) -> contents, one entry per frame.
  std::map<std::string, std::string> files;
  std::vector<SkippedObject> skipped;
};

/// Builds the label files in memory. Throws Error(EmptyCategoryList).
[[nodiscard]] YoloExport build_yolo(const AnnotationStore& store, const Project& project,
                                    const CategoryList& categories);
/// build_yolo plus writing every file into `out_dir`.
YoloExport export_yolo(const AnnotationStore& store, const Project& project, const CategoryList& categories,
                       const std::filesystem::path& out_dir);

// COCO

/// Uncompressed COCO run-length encoding: column-major runs, starting with a (possibly empty) zero run.
struct Rle {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const Rle&, const Rle&) = default;
};

[[nodiscard]] Rle rle_encode(const Bitmask& mask);
[[nodiscard]] Bitmask rle_decode(const Rle& rle);

enum class CocoMaskMode { Polygon, Rle };

struct CocoExport {
  nlohmann::json document;
  std::vector<SkippedObject> skipped;
};

/// Polygon mode emits boxes and polygons as vertex lists; Rle mode rasterises them.
/// Pixel masks are always RLE. With `categories`, IDs follow list order + 1 and
/// unlisted tags are skipped; otherwise IDs follow first appearance, 1-based.
[[nodiscard]] CocoExport build_coco(const AnnotationStore& store, const Project& project, CocoMaskMode mode,
                                    const CategoryList* categories = nullptr);
CocoExport export_coco(const AnnotationStore& store, const Project& project, const std::filesystem::path& out_path,
                       CocoMaskMode mode, const CategoryList* categories = nullptr);

// Pixel -> box conversion

struct BoxConversion {
  Project project;
  AnnotationStore store;
  std::vector<SkippedObject> dropped;
};

/// Replaces every mask and polygon by its tight box; empty geometries are dropped and reported.
[[nodiscard]] BoxConversion convert_pixel_to_box(const AnnotationStore& store, const Project& project);

}  // namespace annotweave
