#include "annotweave/service/json_codec.hpp"

#include <cmath>

namespace annotweave::wire {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); }

std::string_view brush_kind_name(BrushKind k) {
  switch (k) {
    case BrushKind::TruePositive: return "tp";
    case BrushKind::TrueNegative: return "tn";
    case BrushKind::AddToMask: return "add";
    case BrushKind::RemoveFromMask: return "remove";
  }
  return "add";
}

}  // namespace

json to_json(const Rle& rle) { return json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}}; }

Rle rle_from_json(const json& j) {
  const auto size = field<std::vector<int>>(j, "size");
  if (size.size() != 2 || size[0] < 0 || size[1] < 0) malformed("RLE size must be [height, width]");
  Rle rle;
  rle.height = size[0];
  rle.width = size[1];
  rle.counts = field<std::vector<std::uint32_t>>(j, "counts");
  return rle;
}

json to_json(const BoundingBox& box) {
  return json{{"type", "box"}, {"ul_x", box.ul_x}, {"ul_y", box.ul_y}, {"lr_x", box.lr_x}, {"lr_y", box.lr_y}};
}

BoundingBox box_from_json(const json& j) {
  return BoundingBox{field<int>(j, "ul_x"), field<int>(j, "ul_y"), field<int>(j, "lr_x"), field<int>(j, "lr_y")};
}

json to_json(const Geometry& g) {
  if (const auto* box = std::get_if<BoundingBox>(&g)) return to_json(*box);
  if (const auto* poly = std::get_if<Polygon>(&g)) {
    json pts = json::array();
    for (const auto& p : poly->points) pts.push_back({p.x(), p.y()});
    return json{{"type", "polygon"}, {"points", std::move(pts)}};
  }
  const auto& mask = std::get<PixelMask>(g);
  return json{{"type", "mask"}, {"object", to_json(rle_encode(mask.object))},
              {"dontcare", to_json(rle_encode(mask.dontcare))}};
}

Geometry geometry_from_json(const json& j) {
  const auto type = field<std::string>(j, "type");
  if (type == "box") return box_from_json(j);
  if (type == "polygon") {
    Polygon poly;
    for (const auto& p : field<json>(j, "points")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        malformed("polygon points must be [x, y] pairs");
      }
      const double x = p[0].get<double>();
      const double y = p[1].get<double>();
      if (!std::isfinite(x) || !std::isfinite(y)) malformed("polygon points must be finite");
      poly.points.emplace_back(x, y);
    }
    return poly;
  }
  if (type == "mask") {
    PixelMask mask(rle_decode(rle_from_json(field<json>(j, "object"))));
    if (j.contains("dontcare") && !j.at("dontcare").is_null()) {
      mask.dontcare = rle_decode(rle_from_json(j.at("dontcare")));
      if (!same_shape(mask.dontcare, mask.object)) malformed("don't-care raster size differs from the object raster");
      mask.dontcare = (mask.dontcare != 0 && mask.object == 0).cast<std::uint8_t>();
    }
    return mask;
  }
  malformed("unknown geometry type '" + type + "'");
}

json to_json(const AnnotatedObject& obj) {
  json meta = json::object();
  for (const auto& [k, v] : obj.meta) meta[k] = v;
  return json{{"id", obj.id.value},
              {"tag", obj.tag},
              {"status", to_string(obj.status)},
              {"meta", std::move(meta)},
              {"geometry", to_json(obj.geometry)}};
}

ObjectStatus status_from_string(const std::string& s) {
  if (s == "active") return ObjectStatus::Active;
  if (s == "lastframe") return ObjectStatus::LastFrameReached;
  malformed("unknown status '" + s + "'");
}

AnnotatedObject object_from_json(const json& j, const MetaSchema& schema) {
  AnnotatedObject obj;
  obj.id = ObjectId{field_or<std::int64_t>(j, "id", 0)};
  obj.tag = field<std::string>(j, "tag");
  obj.status = status_from_string(field_or<std::string>(j, "status", "active"));
  for (const auto& name : schema.names) obj.meta[name] = false;
  const json meta = field_or<json>(j, "meta", json::object());
  if (!meta.is_object()) malformed("meta must be an object");
  for (const auto& [k, v] : meta.items()) {
    if (!v.is_boolean()) malformed("meta field '" + k + "' must be a boolean");
    obj.meta[k] = v.get<bool>();
  }
  obj.geometry = geometry_from_json(field<json>(j, "geometry"));
  return obj;
}

json to_json(const FrameAnnotations& frame) {
  json objects = json::array();
  for (const auto& obj : frame.objects) objects.push_back(to_json(obj));
  json out{{"index", frame.frame_index}, {"file", frame.image_file}, {"objects", std::move(objects)}};
  out["shared_dontcare"] = frame.shared_dontcare ? to_json(rle_encode(*frame.shared_dontcare)) : json(nullptr);
  return out;
}

json to_json(const ChangeReport& report) {
  json out = json::array();
  for (const auto& c : report) out.push_back({{"frame", c.frame}, {"id", c.id.value}, {"change", to_string(c.kind)}});
  return out;
}

Brush brush_from_json(const json& j) {
  Brush b;
  const auto kind = field<std::string>(j, "kind");
  bool known = false;
  for (const auto k : {BrushKind::TruePositive, BrushKind::TrueNegative, BrushKind::AddToMask,
                       BrushKind::RemoveFromMask}) {
    if (kind == brush_kind_name(k)) {
      b.kind = k;
      known = true;
    }
  }
  if (!known) malformed("unknown brush kind '" + kind + "'");
  b.radius = field<int>(j, "radius");
  for (const auto& p : field<json>(j, "stroke")) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
      malformed("stroke points must be integer [x, y] pairs");
    }
    b.stroke.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  return b;
}

json error_envelope(const Error& e) {
  return json{{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"details", e.details()}};
}

}  // namespace annotweave::wire
