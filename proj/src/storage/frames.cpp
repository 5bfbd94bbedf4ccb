#include "annotweave/storage/frames.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "annotweave/core/error.hpp"

namespace annotweave {

bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
    const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      // Compare by value: strip leading zeros, then length, then digits.
      std::size_t is = i, js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      if (ie - is != je - js) return ie - is < je - js;
      const int c = a.substr(is, ie - is).compare(b.substr(js, je - js));
      if (c != 0) return c < 0;
      if (ie - i != je - j) return ie - i < je - j;  // fewer leading zeros first
      i = ie;
      j = je;
      continue;
    }
    if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
    ++i;
    ++j;
  }
  return a.size() - i < b.size() - j;
}

void natural_sort(std::vector<std::string>& names) { std::sort(names.begin(), names.end(), natural_less); }

namespace {

bool looks_like_regex(const std::string& p) { return p.find_first_of("^$()+|{}\\") != std::string::npos; }

std::string glob_to_regex(const std::string& glob) {
  std::string re;
  for (std::size_t i = 0; i < glob.size(); ++i) {
    const char c = glob[i];
    switch (c) {
      case '*': re += ".*"; break;
      case '?': re += '.'; break;
      case '[': {
        const auto close = glob.find(']', i + 1);
        if (close == std::string::npos) {
          re += "\\[";
        } else {
          std::string body = glob.substr(i + 1, close - i - 1);
          if (!body.empty() && body[0] == '!') body[0] = '^';
          re += '[' + body + ']';
          i = close;
        }
        break;
      }
      case '.': case '\\': case '+': case '(': case ')': case '^': case '$': case '|': case '{': case '}':
        re += '\\';
        re += c;
        break;
      default: re += c;
    }
  }
  return re;
}

std::regex compile(const std::string& pattern) {
  std::string re;
  if (pattern.rfind("re:", 0) == 0) re = pattern.substr(3);
  else if (looks_like_regex(pattern)) re = pattern;
  else re = glob_to_regex(pattern);
  try {
    return std::regex(re, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::BadPattern, "cannot parse file pattern '" + pattern + "': " + e.what());
  }
}

}  // namespace

bool matches_pattern(const std::string& pattern, const std::string& file_name) {
  if (pattern.empty()) return true;
  return std::regex_match(file_name, compile(pattern));
}

FrameScan scan_frames(const std::filesystem::path& dir, const std::string& pattern) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoFailure, "frame directory does not exist: " + dir.string());
  }
  FrameScan scan;
  const bool all = pattern.empty();
  const std::regex re = all ? std::regex() : compile(pattern);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (all || std::regex_match(name, re)) scan.files.push_back(name);
  }
  natural_sort(scan.files);
  if (scan.files.empty()) scan.warnings.push_back("NoMatches: no file in " + dir.string() + " matches '" + pattern + "'");
  return scan;
}

}  // namespace annotweave
