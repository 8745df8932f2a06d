#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aml/extract.hpp"
#include "aml/graph.hpp"
#include "aml/llm.hpp"
#include "aml/prompt.hpp"
#include "aml/verdict.hpp"

namespace aml {

struct TestCase {
  std::size_t case_id = 0;
  Subgraph subgraph;
  bool truth_label = false;
  /// {None} for negatives; empty when the source has no pattern labels.
  std::vector<PatternKind> truth_patterns;
};

/// Synthetic cases: positives cycle through kLaunderingKinds, each generated
/// instance loaded as a graph and re-extracted around a random transfer;
/// negatives come from generate_benign the same way. Positives take ids
/// 0..n_pos-1, negatives follow. Deterministic per seed.
std::vector<TestCase> build_synthetic_set(std::size_t n_pos, std::size_t n_neg,
                                          const ExtractionConfig& extraction, std::uint64_t seed);

/// Samples labelled focal edges without replacement and extracts them.
/// Throws InvalidArgument when there are not enough labelled edges.
std::vector<TestCase> build_dataset_set(const TransactionGraph& g, std::size_t n_pos, std::size_t n_neg,
                                        const ExtractionConfig& extraction, std::uint64_t seed);

struct Outcome {
  std::size_t case_id = 0;
  bool truth_label = false;
  std::vector<PatternKind> truth_patterns;
  std::uint64_t subgraph_fingerprint = 0;
  std::optional<Verdict> verdict;
  std::string raw_text;
  std::int64_t latency_ms = 0;
  unsigned attempts = 0;
  std::optional<TokenUsage> usage;
  /// Set when the completion or the verdict parse failed.
  std::optional<std::string> error;

  bool operator==(const Outcome&) const = default;
};

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Counts outcomes that have a verdict; errored outcomes are left out.
ConfusionCounts confusion(std::span<const Outcome> outcomes);
std::size_t error_count(std::span<const Outcome> outcomes);

struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when the denominator was zero and the value was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

/// Throws InvalidArgument when the counts are all zero.
MetricSet metrics(const ConfusionCounts& c);

struct BootstrapResult {
  /// Absent when the metric is undefined on the full sample.
  std::optional<double> point;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double half_width = 0.0;
  std::size_t n_resamples = 0;
  /// Resamples on which the metric was defined.
  std::size_t n_valid = 0;
  std::uint64_t seed = 0;

  bool operator==(const BootstrapResult&) const = default;
};

/// Metric over a resample given as indices into the original items; NaN
/// means undefined for that resample.
using IndexMetric = std::function<double(std::span<const std::uint32_t>)>;

/// Percentile bootstrap: resample r draws n indices with replacement from an
/// Rng seeded with derive_seed(seed, r); the interval is the 2.5th and
/// 97.5th percentile (linear interpolation) of the defined values. Resamples
/// run in parallel; the result does not depend on the thread count.
BootstrapResult bootstrap(std::size_t n, const IndexMetric& metric, std::size_t n_resamples = 1000,
                          std::uint64_t seed = 0);
BootstrapResult bootstrap_serial(std::size_t n, const IndexMetric& metric, std::size_t n_resamples = 1000,
                                 std::uint64_t seed = 0);

/// Type-7 quantile of sorted values.
double percentile(std::span<const double> sorted, double p);

struct PatternScore {
  std::size_t mentions = 0;
  std::size_t correct = 0;
  std::size_t truth = 0;
  std::optional<double> precision;  // undefined without mentions
  std::optional<double> recall;     // undefined without truth occurrences
};

struct PatternMetrics {
  std::map<PatternKind, PatternScore> per_kind;  // the eight laundering kinds
  std::size_t hallucinated_mentions = 0;         // unrecognized pattern strings
};

/// Multi-label counts over outcomes with a verdict.
PatternMetrics pattern_metrics(std::span<const Outcome> outcomes);

struct MetricReport {
  double value = 0.0;
  bool undefined = false;
  BootstrapResult ci;
};

struct PatternReport {
  PatternScore score;
  BootstrapResult precision_ci;
  BootstrapResult recall_ci;
};

struct EvalReport {
  static constexpr std::string_view kSchema = "aml.eval-report/1";

  std::size_t n_cases = 0;
  std::size_t error_count = 0;
  ConfusionCounts counts;
  std::map<std::string, MetricReport> classification;  // accuracy, precision, recall, f1
  std::map<PatternKind, PatternReport> per_pattern;
  std::size_t hallucinated_mentions = 0;
  bool pattern_truth_available = true;
  nlohmann::ordered_json config;
  /// Wall-clock facts of the run; excluded from determinism comparisons.
  nlohmann::ordered_json run;
};

/// Aggregates outcomes (sorted by case id first) into a report with
/// bootstrap intervals for every classification metric and every
/// per-pattern precision and recall. Resamples are over cases.
EvalReport make_report(std::vector<Outcome> outcomes, std::size_t n_cases, std::size_t n_resamples,
                       std::uint64_t seed, nlohmann::ordered_json config = nlohmann::ordered_json::object());

using Completer = std::function<Completion(const PromptBundle&)>;

struct EvalOptions {
  PromptConfig prompt;
  std::size_t n_resamples = 1000;
  std::uint64_t bootstrap_seed = 0;
  /// Cases in flight at once.
  unsigned parallelism = 4;
  /// Newline-delimited JSON, one Outcome per line, appended as cases finish.
  /// Cases already present are not re-run.
  std::optional<std::filesystem::path> outcome_log;
  /// Stop after this many new outcomes (testing interrupted runs).
  std::optional<std::size_t> stop_after;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

/// Per case: serialize, build_prompt, complete, parse_verdict. Completion
/// and parse failures are recorded on the outcome. Throws InvalidArgument
/// for an empty case list and Error when the outcome log belongs to a
/// different case set.
EvalReport run_eval(std::span<const TestCase> cases, const DemoSet& demos, const Completer& complete,
                    const EvalOptions& opts);

/// Outcome log helpers. read_outcome_log ignores a torn final line.
std::vector<Outcome> read_outcome_log(const std::filesystem::path& path);
std::string outcome_log_line(const Outcome& o);

}  // namespace aml
