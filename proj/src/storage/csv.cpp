#include "annotweave/storage/csv.hpp"

#include "annotweave/core/error.hpp"

namespace annotweave::csv {

std::string escape(const std::string& field) {
  if (field.find_first_of(";\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += kDelimiter;
    out += escape(fields[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& line, int line_number) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == kDelimiter) {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) {
    throw Error(ErrorCode::CorruptCsv, "unterminated quote on line " + std::to_string(line_number),
                "line " + std::to_string(line_number));
  }
  out.push_back(std::move(field));
  return out;
}

}  // namespace annotweave::csv
