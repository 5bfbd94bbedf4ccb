#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace annotweave {

/// Ordered class names; a tag's category ID is its 0-based position.
struct CategoryList {
  std::string name;
  std::vector<std::string> entries;

  [[nodiscard]] std::optional<int> index_of(const std::string& tag) const;
};

/// One class per line; blank lines ignored. Throws Error(DuplicateName) naming the repeated line.
[[nodiscard]] CategoryList parse_category_list(const std::string& name, const std::string& text);

struct CategoryLists {
  std::vector<CategoryList> lists;  // sorted by name
  std::vector<std::string> warnings;

  [[nodiscard]] const CategoryList* find(const std::string& name) const;
};

/// Every *.txt file in `dir` (file stem = list name); empty files are skipped with a warning.
[[nodiscard]] CategoryLists load_category_lists(const std::filesystem::path& dir);

}  // namespace annotweave
