#pragma once

#include <string>
#include <vector>

#include "annotweave/core/model.hpp"

namespace annotweave {

struct Violation {
  std::string code;
  std::string message;
};

/// Checks an object against the project's ID, tag, meta and geometry rules.
/// An empty report means the object is valid.
[[nodiscard]] std::vector<Violation> validate_object(const AnnotatedObject& obj, const Project& project);

/// Smallest ID legal for the project's geometry kind that no track uses yet.
/// Throws Error(IdSpaceExhausted) when a pixel project has used all 244 legal IDs.
[[nodiscard]] ObjectId next_free_id(const Project& project, const AnnotationStore& store);

}  // namespace annotweave
