#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace aml {

/// RFC-4180 reader over an in-memory buffer: comma separator, double-quote
/// quoting with "" escapes, LF or CRLF line ends, quoted fields may span
/// lines. Unquoted fields are trimmed of surrounding spaces and tabs.
class CsvReader {
 public:
  explicit CsvReader(std::string_view data) : data_(data) {}

  /// Reads the next record into `fields`. Returns false at end of input.
  /// Blank lines are skipped. Throws ParseError on an unterminated quote.
  bool next(std::vector<std::string>& fields);

  /// 1-based line number where the most recently returned record starts.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t current_line_ = 1;
  std::size_t record_line_ = 0;
};

/// Quotes a field if it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

}  // namespace aml
