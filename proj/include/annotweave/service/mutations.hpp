#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "annotweave/core/model.hpp"

namespace annotweave {

/// One state-changing API request in replayable form. Everything the change depends on
/// (including the result of directory scans) is inside `args`, so applying the same
/// sequence of mutations to the same initial state always yields the same store.
struct Mutation {
  std::string op;
  nlohmann::json args;

  friend bool operator==(const Mutation&, const Mutation&) = default;
};

struct MutationResult {
  Project project;
  AnnotationStore store;
  /// Frames whose annotations differ from the input, ascending.
  std::vector<int> affected_frames;
  /// Operation-specific response fields (assigned ID, change report, ...).
  nlohmann::json reply = nlohmann::json::object();
  /// False for two-phase operations that were only planned.
  bool changed = true;
};

/// Names of every operation apply_mutation understands.
[[nodiscard]] const std::vector<std::string>& mutation_ops();

/// Pure dispatch onto the module calls; never touches the filesystem.
/// Throws Error(InvalidArgument) for unknown ops, malformed arguments or objects that fail validation,
/// Error(NotFound) for missing objects and Error(OverlappingObjects) when a mask would cover another object.
[[nodiscard]] MutationResult apply_mutation(Project project, AnnotationStore store, const Mutation& mutation);

[[nodiscard]] nlohmann::json to_json(const Mutation& m);
[[nodiscard]] Mutation mutation_from_json(const nlohmann::json& j);

}  // namespace annotweave
