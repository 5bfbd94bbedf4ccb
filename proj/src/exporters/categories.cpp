#include "annotweave/exporters/categories.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "annotweave/core/error.hpp"

namespace annotweave {

std::optional<int> CategoryList::index_of(const std::string& tag) const {
  const auto it = std::find(entries.begin(), entries.end(), tag);
  if (it == entries.end()) return std::nullopt;
  return static_cast<int>(it - entries.begin());
}

CategoryList parse_category_list(const std::string& name, const std::string& text) {
  CategoryList list{name, {}};
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const std::string entry = line.substr(b, line.find_last_not_of(" \t") - b + 1);
    if (!seen.insert(entry).second) {
      throw Error(ErrorCode::DuplicateName,
                  "category list '" + name + "' repeats '" + entry + "' on line " + std::to_string(line_no),
                  "line " + std::to_string(line_no));
    }
    list.entries.push_back(entry);
  }
  return list;
}

const CategoryList* CategoryLists::find(const std::string& name) const {
  for (const auto& l : lists) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

CategoryLists load_category_lists(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoFailure, "category list directory does not exist: " + dir.string());
  }
  CategoryLists out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    CategoryList list = parse_category_list(entry.path().stem().string(), ss.str());
    if (list.entries.empty()) {
      out.warnings.push_back("EmptyFile: " + entry.path().filename().string() + " skipped");
      continue;
    }
    out.lists.push_back(std::move(list));
  }
  std::sort(out.lists.begin(), out.lists.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

}  // namespace annotweave
