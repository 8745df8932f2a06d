#include "aml/verdict.hpp"

#include <algorithm>
#include <cctype>

namespace aml {

std::string_view to_string(VerdictLabel l) noexcept {
  return l == VerdictLabel::Suspicious ? "Suspicious" : "Not Suspicious";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Folds case and separators: "Fan_Out  Pattern" -> "fan out pattern".
std::string fold(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    const unsigned char u = static_cast<unsigned char>(c);
    const char f = (c == '-' || c == '_' || std::isspace(u)) ? ' ' : static_cast<char>(std::tolower(u));
    if (f == ' ' && (out.empty() || out.back() == ' ')) continue;
    out += f;
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

/// Strips quotes, backticks, emphasis and trailing periods around a value.
std::string_view unwrap(std::string_view s) {
  s = trim(s);
  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    while (!s.empty() && (s.back() == '.' || s.back() == '*' || s.back() == '"' || s.back() == '\'' ||
                          s.back() == '`')) {
      s.remove_suffix(1);
      changed = true;
    }
    while (!s.empty() && (s.front() == '*' || s.front() == '"' || s.front() == '\'' || s.front() == '`')) {
      s.remove_prefix(1);
      changed = true;
    }
    s = trim(s);
  }
  return s;
}

enum class Field { Conclusion, Explanation, Patterns };

struct Labelled {
  Field field;
  std::string value;
};

/// Recognizes "<label>: value" after removing bullets and ** markers.
std::optional<Labelled> labelled_line(std::string_view line) {
  std::string clean;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line.compare(i, 2, "**") == 0) {
      ++i;
      continue;
    }
    clean += line[i];
  }
  std::string_view s = trim(clean);
  while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '#' || s.front() == '>')) {
    s.remove_prefix(1);
    s = trim(s);
  }
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const std::string label = fold(s.substr(0, colon));
  const std::string value(trim(s.substr(colon + 1)));
  if (label == "conclusion" || label == "prediction") return Labelled{Field::Conclusion, value};
  if (label == "explanation") return Labelled{Field::Explanation, value};
  if (label == "observed pattern" || label == "observed patterns" || label == "pattern" ||
      label == "patterns") {
    return Labelled{Field::Patterns, value};
  }
  return std::nullopt;
}

std::vector<std::string> split_patterns(std::string_view value) {
  std::vector<std::string> parts;
  std::string current;
  const std::string low = lower(value);
  for (std::size_t i = 0; i < value.size(); ++i) {
    const char c = value[i];
    const bool word_and = low.compare(i, 5, " and ") == 0;
    if (c == ',' || c == ';' || c == '/' || c == '&' || word_and) {
      parts.push_back(current);
      current.clear();
      if (word_and) i += 4;
      continue;
    }
    current += c;
  }
  parts.push_back(current);
  std::vector<std::string> out;
  for (const std::string& p : parts) {
    const std::string_view v = unwrap(p);
    if (!v.empty()) out.emplace_back(v);
  }
  return out;
}

bool means_no_pattern(std::string_view value) {
  const std::string f = fold(unwrap(value));
  return f.empty() || f == "none" || f == "n/a" || f == "na" || f == "no pattern" || f == "none observed" ||
         f == "not applicable";
}

}  // namespace

std::optional<PatternKind> normalize_pattern_name(std::string_view raw) {
  std::string f = fold(unwrap(raw));
  for (std::string_view suffix : {" patterns", " pattern"}) {
    if (f.size() > suffix.size() && f.ends_with(suffix)) {
      f.erase(f.size() - suffix.size());
      break;
    }
  }
  if (f == "fan out" || f == "fanout") return PatternKind::FanOut;
  if (f == "fan in" || f == "fanin") return PatternKind::FanIn;
  if (f == "gather scatter") return PatternKind::GatherScatter;
  if (f == "scatter gather") return PatternKind::ScatterGather;
  if (f == "simple cycle" || f == "cycle") return PatternKind::SimpleCycle;
  if (f == "random") return PatternKind::Random;
  if (f == "bipartite") return PatternKind::Bipartite;
  if (f == "stack" || f == "layering stack" || f == "stacked") return PatternKind::Stack;
  if (f == "none") return PatternKind::None;
  return std::nullopt;
}

VerdictResult parse_verdict(std::string_view text) {
  std::optional<std::string> conclusion;
  std::optional<std::string> explanation;
  std::optional<std::string> patterns;
  std::optional<Field> open;  // field whose value may continue on later lines

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;

    if (auto l = labelled_line(line)) {
      open.reset();
      switch (l->field) {
        case Field::Conclusion:
          if (!conclusion) conclusion = l->value;
          break;
        case Field::Explanation:
          if (!explanation) {
            explanation = l->value;
            open = Field::Explanation;
          }
          break;
        case Field::Patterns:
          if (!patterns) patterns = l->value;
          break;
      }
      continue;
    }
    const std::string_view body = trim(line);
    if (open == Field::Explanation && !body.empty()) {
      if (!explanation->empty()) *explanation += ' ';
      *explanation += body;
    }
  }

  if (!conclusion) return VerdictError{"no conclusion line found"};
  Verdict v;
  const std::string c = fold(unwrap(*conclusion));
  if (c == "suspicious") {
    v.label = VerdictLabel::Suspicious;
  } else if (c == "not suspicious" || c == "non suspicious" || c == "nonsuspicious" || c == "unsuspicious") {
    v.label = VerdictLabel::NotSuspicious;
  } else {
    return VerdictError{"unrecognized conclusion value '" + *conclusion + "'"};
  }
  if (explanation) v.explanation = std::string(trim(*explanation));
  if (patterns && !means_no_pattern(*patterns)) {
    for (const std::string& raw : split_patterns(*patterns)) {
      if (means_no_pattern(raw)) continue;
      const auto kind = normalize_pattern_name(raw);
      if (!kind) {
        if (std::find(v.unrecognized_patterns.begin(), v.unrecognized_patterns.end(), raw) ==
            v.unrecognized_patterns.end()) {
          v.unrecognized_patterns.push_back(raw);
        }
      } else if (*kind != PatternKind::None &&
                 std::find(v.observed_patterns.begin(), v.observed_patterns.end(), *kind) ==
                     v.observed_patterns.end()) {
        v.observed_patterns.push_back(*kind);
      }
    }
  }
  return v;
}

std::string format_verdict(const Verdict& v) {
  std::string out = "Conclusion: ";
  out += to_string(v.label);
  out += "\nExplanation: ";
  out += v.explanation;
  out += "\nObserved Pattern: ";
  if (v.observed_patterns.empty() && v.unrecognized_patterns.empty()) {
    out += "None";
  } else {
    bool first = true;
    for (PatternKind k : v.observed_patterns) {
      if (!first) out += ", ";
      out += pattern_name(k);
      first = false;
    }
    for (const std::string& s : v.unrecognized_patterns) {
      if (!first) out += ", ";
      out += s;
      first = false;
    }
  }
  out += '\n';
  return out;
}

}  // namespace aml
