#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aml/types.hpp"

namespace aml {

enum class VerdictLabel : std::uint8_t { Suspicious, NotSuspicious };

std::string_view to_string(VerdictLabel l) noexcept;

struct Verdict {
  VerdictLabel label = VerdictLabel::NotSuspicious;
  std::string explanation;
  /// Known kinds in order of first mention, no duplicates, never None.
  std::vector<PatternKind> observed_patterns;
  /// Pattern strings that matched no kind, as written (trimmed).
  std::vector<std::string> unrecognized_patterns;

  bool operator==(const Verdict&) const = default;
};

struct VerdictError {
  std::string message;
  bool operator==(const VerdictError&) const = default;
};

using VerdictResult = std::variant<Verdict, VerdictError>;

/// Reads an answer of the form
///
///     Conclusion: Suspicious
///     Explanation: ...
///     Observed Pattern: fan-out, simple cycle
///
/// Labels are case-insensitive and may carry "- " bullets or ** emphasis;
/// "Prediction" is accepted for "Conclusion". The explanation runs until
/// the next labelled line. Patterns are split on commas, semicolons,
/// slashes and the word "and"; "None" or "N/A" means no pattern. Never
/// throws.
VerdictResult parse_verdict(std::string_view text);

/// Case-insensitive; '-', '_' and spaces are interchangeable and a
/// trailing "pattern" is dropped. Synonyms: cycle, fanout, fanin,
/// layering stack, stacked. "none" maps to PatternKind::None; anything
/// else unknown gives nullopt.
std::optional<PatternKind> normalize_pattern_name(std::string_view raw);

/// Renders a verdict in the answer format above.
std::string format_verdict(const Verdict& v);

}  // namespace aml
