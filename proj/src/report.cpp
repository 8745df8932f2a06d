#include "aml/report.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "aml/errors.hpp"
#include "aml/json_io.hpp"

namespace aml {

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "text") return ReportFormat::Text;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw InvalidArgument("unknown report format: " + std::string(s));
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pct(double v) { return fixed(100.0 * v, 1) + "%"; }

std::string with_ci(double value, const BootstrapResult& ci) {
  if (ci.n_valid == 0) return pct(value);
  return pct(value) + " ± " + pct(ci.half_width);
}

std::string pad(std::string s, std::size_t width) {
  // count code points so the ± sign does not skew the columns
  std::size_t len = 0;
  for (unsigned char c : s) len += (c & 0xC0) != 0x80 ? 1 : 0;
  if (len < width) s.append(width - len, ' ');
  return s;
}

std::string opt_cell(const std::optional<double>& v, const BootstrapResult& ci) {
  return v ? with_ci(*v, ci) : std::string("n/a");
}

std::string num(double v) {
  if (std::isnan(v)) return "";
  return fixed(v, 6);
}

}  // namespace

std::string render_text(const EvalReport& r) {
  std::string out;
  out += "Cases: " + std::to_string(r.n_cases) + "  parsed: " + std::to_string(r.counts.total()) +
         "  errors: " + std::to_string(r.error_count) + "\n";
  out += "Confusion: TP=" + std::to_string(r.counts.tp) + " FP=" + std::to_string(r.counts.fp) +
         " FN=" + std::to_string(r.counts.fn) + " TN=" + std::to_string(r.counts.tn) + "\n\n";

  out += pad("Metric", 12) + "Value (95% CI half-width)\n";
  out += std::string(40, '-') + "\n";
  for (const char* name : {"accuracy", "precision", "recall", "f1"}) {
    const auto it = r.classification.find(name);
    std::string cell = "n/a";
    if (it != r.classification.end() && !it->second.undefined) cell = with_ci(it->second.value, it->second.ci);
    std::string label = name;
    label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
    if (label == "F1") label = "F1 Score";
    out += pad(label, 12) + cell + "\n";
  }

  out += "\n";
  if (!r.pattern_truth_available) {
    out += "Per-pattern scores unavailable: no pattern labels for the positives.\n";
  } else {
    out += pad("Pattern", 16) + pad("Precision", 22) + pad("Recall", 22) + "Mentions/Truth\n";
    out += std::string(74, '-') + "\n";
    for (const auto& [kind, p] : r.per_pattern) {
      out += pad(std::string(pattern_name(kind)), 16) + pad(opt_cell(p.score.precision, p.precision_ci), 22) +
             pad(opt_cell(p.score.recall, p.recall_ci), 22) + std::to_string(p.score.mentions) + "/" +
             std::to_string(p.score.truth) + "\n";
    }
  }
  out += "Unrecognized pattern mentions: " + std::to_string(r.hallucinated_mentions) + "\n";
  return out;
}

std::string render_csv(const EvalReport& r) {
  std::string out = "section,name,value,ci_low,ci_high,half_width,undefined\n";
  const auto row = [&](const std::string& section, const std::string& name, std::optional<double> v,
                       const BootstrapResult& ci, bool undefined) {
    const bool has_ci = ci.n_valid > 0;
    out += section + "," + name + "," + (v ? num(*v) : "") + "," + (has_ci ? num(ci.ci_low) : "") + "," +
           (has_ci ? num(ci.ci_high) : "") + "," + (has_ci ? num(ci.half_width) : "") + "," +
           (undefined ? "true" : "false") + "\n";
  };
  for (const auto& [name, m] : r.classification) row("classification", name, m.value, m.ci, m.undefined);
  for (const auto& [kind, p] : r.per_pattern) {
    const std::string n(pattern_name(kind));
    row("precision", n, p.score.precision, p.precision_ci, !p.score.precision);
    row("recall", n, p.score.recall, p.recall_ci, !p.score.recall);
  }
  return out;
}

std::string render_json(const EvalReport& r) { return report_to_json(r).dump(2) + "\n"; }

std::string render(const EvalReport& r, ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::Text: return render_text(r);
    case ReportFormat::Csv: return render_csv(r);
    case ReportFormat::Json: return render_json(r);
  }
  return {};
}

}  // namespace aml
