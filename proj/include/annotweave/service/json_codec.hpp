#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "annotweave/core/error.hpp"
#include "annotweave/core/model.hpp"
#include "annotweave/exporters/exporters.hpp"
#include "annotweave/mask/brush.hpp"
#include "annotweave/sequence/sequence.hpp"

// Wire format of the HTTP API. Masks travel as uncompressed COCO-style RLE,
// never as rasters.

namespace annotweave::wire {

using nlohmann::json;

[[nodiscard]] json to_json(const Rle& rle);
[[nodiscard]] Rle rle_from_json(const json& j);

[[nodiscard]] json to_json(const BoundingBox& box);
[[nodiscard]] BoundingBox box_from_json(const json& j);

[[nodiscard]] json to_json(const Geometry& g);
/// `{"type": "box" | "polygon" | "mask", ...}`. Throws Error(InvalidArgument) on malformed input.
[[nodiscard]] Geometry geometry_from_json(const json& j);

[[nodiscard]] json to_json(const AnnotatedObject& obj);
/// Missing `status` means active, missing meta entries default to false for every schema field.
[[nodiscard]] AnnotatedObject object_from_json(const json& j, const MetaSchema& schema);

[[nodiscard]] json to_json(const FrameAnnotations& frame);
[[nodiscard]] json to_json(const ChangeReport& report);

[[nodiscard]] ObjectStatus status_from_string(const std::string& s);

/// Stroke brush; `kind` is one of tp, tn, add, remove.
[[nodiscard]] Brush brush_from_json(const json& j);

/// `{code, message, details}` error envelope.
[[nodiscard]] json error_envelope(const Error& e);

/// Typed field access that raises Error(InvalidArgument) naming the field.
template <typename T>
[[nodiscard]] T field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::InvalidArgument, std::string("missing field '") + name + "'", name);
  }
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + name + "' has the wrong type", name);
  }
}

template <typename T>
[[nodiscard]] T field_or(const json& j, const char* name, T fallback) {
  if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return fallback;
  return field<T>(j, name);
}

}  // namespace annotweave::wire
