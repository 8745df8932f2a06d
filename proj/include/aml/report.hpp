#pragma once

#include <string>
#include <string_view>

#include "aml/eval.hpp"

namespace aml {

enum class ReportFormat { Text, Csv, Json };

/// "text", "csv" or "json"; throws InvalidArgument otherwise.
ReportFormat report_format_from_string(std::string_view s);

/// Text: a classification table (value ± CI half-width, in percent) and a
/// per-pattern precision/recall table. Undefined values print as "n/a".
std::string render_text(const EvalReport& r);
/// One row per metric: section,name,value,ci_low,ci_high,half_width,undefined
std::string render_csv(const EvalReport& r);
std::string render_json(const EvalReport& r);
std::string render(const EvalReport& r, ReportFormat fmt);

}  // namespace aml
