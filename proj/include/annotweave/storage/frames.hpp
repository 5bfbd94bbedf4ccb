#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace annotweave {

/// Numeric-aware ordering: digit runs compare by value, so "a9" < "a10".
[[nodiscard]] bool natural_less(std::string_view a, std::string_view b);
void natural_sort(std::vector<std::string>& names);

struct FrameScan {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

/// Matches a file-name pattern: empty matches everything; "re:<regex>" or any pattern
/// containing regex-only syntax (^ $ ( ) + | { } \) is an ECMAScript regex; otherwise a glob (* ? [...]).
[[nodiscard]] bool matches_pattern(const std::string& pattern, const std::string& file_name);

/// Regular files in `dir` matching `pattern`, natural-sorted. An empty result carries a
/// NoMatches warning; an unparseable regex throws Error(BadPattern).
[[nodiscard]] FrameScan scan_frames(const std::filesystem::path& dir, const std::string& pattern);

}  // namespace annotweave
