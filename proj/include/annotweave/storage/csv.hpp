#pragma once

#include <string>
#include <vector>

namespace annotweave::csv {

inline constexpr char kDelimiter = ';';

/// Quotes a field when it contains the delimiter, a quote, or a line break.
[[nodiscard]] std::string escape(const std::string& field);
[[nodiscard]] std::string join(const std::vector<std::string>& fields);

/// Splits one record. Throws Error(CorruptCsv) on an unterminated quote.
[[nodiscard]] std::vector<std::string> split(const std::string& line, int line_number);

}  // namespace annotweave::csv
