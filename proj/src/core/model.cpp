#include "annotweave/core/model.hpp"

#include <algorithm>

#include "annotweave/core/error.hpp"

namespace annotweave {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IdSpaceExhausted: return "IdSpaceExhausted";
    case ErrorCode::DegenerateRect: return "DegenerateRect";
    case ErrorCode::OverlappingObjects: return "OverlappingObjects";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::MissingKeyframe: return "MissingKeyframe";
    case ErrorCode::NotBoxGeometry: return "NotBoxGeometry";
    case ErrorCode::SameId: return "SameId";
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::OutOfView: return "OutOfView";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::MalformedMatrix: return "MalformedMatrix";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NoMatches: return "NoMatches";
    case ErrorCode::BadPattern: return "BadPattern";
    case ErrorCode::CorruptCsv: return "CorruptCsv";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::FieldInUse: return "FieldInUse";
    case ErrorCode::EmptyCategoryList: return "EmptyCategoryList";
    case ErrorCode::Locked: return "Locked";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ConfirmationRequired: return "ConfirmationRequired";
  }
  return "Unknown";
}

bool MetaSchema::contains(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

BoundingBox hull(const BoundingBox& a, const BoundingBox& b) {
  return {std::min(a.ul_x, b.ul_x), std::min(a.ul_y, b.ul_y), std::max(a.lr_x, b.lr_x),
          std::max(a.lr_y, b.lr_y)};
}

BoundingBox intersect(const BoundingBox& a, const BoundingBox& b) {
  return {std::max(a.ul_x, b.ul_x), std::max(a.ul_y, b.ul_y), std::min(a.lr_x, b.lr_x),
          std::min(a.lr_y, b.lr_y)};
}

bool operator==(const Polygon& a, const Polygon& b) {
  return a.points.size() == b.points.size() &&
         std::equal(a.points.begin(), a.points.end(), b.points.begin(),
                    [](const Eigen::Vector2d& p, const Eigen::Vector2d& q) { return p == q; });
}

AnnotatedObject* FrameAnnotations::find(ObjectId id) {
  auto it = std::find_if(objects.begin(), objects.end(), [&](const auto& o) { return o.id == id; });
  return it == objects.end() ? nullptr : &*it;
}

const AnnotatedObject* FrameAnnotations::find(ObjectId id) const {
  auto it = std::find_if(objects.begin(), objects.end(), [&](const auto& o) { return o.id == id; });
  return it == objects.end() ? nullptr : &*it;
}

bool FrameAnnotations::erase(ObjectId id) {
  auto it = std::find_if(objects.begin(), objects.end(), [&](const auto& o) { return o.id == id; });
  if (it == objects.end()) return false;
  objects.erase(it);
  return true;
}

bool operator==(const FrameAnnotations& a, const FrameAnnotations& b) {
  if (a.frame_index != b.frame_index || a.image_file != b.image_file || a.objects != b.objects) return false;
  if (a.shared_dontcare.has_value() != b.shared_dontcare.has_value()) return false;
  return !a.shared_dontcare || raster_equal(*a.shared_dontcare, *b.shared_dontcare);
}

int Project::frame_index_of(const std::string& file) const {
  auto it = std::find(frame_files.begin(), frame_files.end(), file);
  return it == frame_files.end() ? -1 : static_cast<int>(it - frame_files.begin());
}

AnnotationStore make_store(const Project& project) {
  AnnotationStore store;
  store.frames.reserve(project.frame_files.size());
  for (std::size_t i = 0; i < project.frame_files.size(); ++i) {
    store.frames.push_back(FrameAnnotations{static_cast<int>(i), project.frame_files[i], {}, std::nullopt});
  }
  return store;
}

std::string to_string(ObjectStatus s) { return s == ObjectStatus::Active ? "active" : "lastframe"; }

std::string to_string(GeometryKind k) { return k == GeometryKind::Box ? "box" : "pixel"; }

}  // namespace annotweave
