#include "aml/csv.hpp"

#include "aml/errors.hpp"

namespace aml {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  // skip blank lines
  while (pos_ < data_.size() && (data_[pos_] == '\n' || data_[pos_] == '\r')) {
    if (data_[pos_] == '\n') ++current_line_;
    ++pos_;
  }
  if (pos_ >= data_.size()) return false;
  record_line_ = current_line_;

  std::string field;
  while (true) {
    field.clear();
    std::size_t start = pos_;
    // leading whitespace before an opening quote is tolerated
    std::size_t probe = pos_;
    while (probe < data_.size() && (data_[probe] == ' ' || data_[probe] == '\t')) ++probe;
    if (probe < data_.size() && data_[probe] == '"') {
      pos_ = probe + 1;
      while (true) {
        if (pos_ >= data_.size()) throw ParseError("unterminated quoted field", record_line_);
        const char c = data_[pos_];
        if (c == '"') {
          if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        if (c == '\n') ++current_line_;
        field.push_back(c);
        ++pos_;
      }
      // ignore anything between the closing quote and the separator
      while (pos_ < data_.size() && data_[pos_] != ',' && data_[pos_] != '\n' &&
             data_[pos_] != '\r') {
        ++pos_;
      }
      fields.push_back(field);
    } else {
      while (pos_ < data_.size() && data_[pos_] != ',' && data_[pos_] != '\n' &&
             data_[pos_] != '\r') {
        ++pos_;
      }
      fields.emplace_back(trim(data_.substr(start, pos_ - start)));
    }
    if (pos_ >= data_.size()) return true;
    const char sep = data_[pos_];
    if (sep == ',') {
      ++pos_;
      continue;
    }
    // end of record
    if (sep == '\r') ++pos_;
    if (pos_ < data_.size() && data_[pos_] == '\n') {
      ++pos_;
      ++current_line_;
    }
    return true;
  }
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace aml
