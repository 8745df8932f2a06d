#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aml/extract.hpp"
#include "aml/graph.hpp"
#include "aml/subgraph.hpp"

namespace aml {

/// Named prompt texts: header, task, answer_format, one explanation per
/// typology (file named after pattern_name), and benign (one explanation
/// per line). The defaults are compiled in from data/prompt.
class PromptTexts {
 public:
  static const PromptTexts& embedded();
  /// Reads every *.txt in `dir`; names missing from the directory fall back
  /// to the embedded text.
  static PromptTexts from_dir(const std::filesystem::path& dir);

  /// Throws NotFound for an unknown name.
  const std::string& get(const std::string& name) const;
  /// Explanation for a laundering kind, trailing whitespace trimmed.
  std::string explanation(PatternKind kind) const;
  /// Benign explanation number i, cycling through the lines of "benign".
  std::string benign_explanation(std::size_t i) const;

 private:
  std::map<std::string, std::string> texts_;
};

struct Demonstration {
  std::string text;  // serialized subgraph
  std::string explanation;
  PatternKind kind = PatternKind::None;

  bool operator==(const Demonstration&) const = default;
};

struct DemoSet {
  std::vector<Demonstration> suspicious;
  std::vector<Demonstration> benign;
};

/// Order of the default suspicious demonstrations.
inline constexpr std::array<PatternKind, 8> kDemoOrder{
    PatternKind::FanOut,      PatternKind::GatherScatter, PatternKind::FanIn, PatternKind::ScatterGather,
    PatternKind::SimpleCycle, PatternKind::Random,        PatternKind::Stack, PatternKind::Bipartite};

/// Synthetic demonstrations: one small generated instance per typology in
/// kDemoOrder and `n_benign` benign samples. Stack needs 9 accounts (three
/// sides of 3); every other demo has at most 8.
DemoSet default_demos(std::uint64_t seed, const PromptTexts& texts = PromptTexts::embedded(),
                      unsigned n_benign = 4);

/// Demonstrations drawn from a labelled graph: for each kind a random edge
/// carrying that pattern label, for benign a random non-laundering edge,
/// each extracted with `extraction`. Kinds absent from the graph fall back
/// to the synthetic demo. Throws InvalidArgument when the graph has no
/// pattern labels or no negative edges.
DemoSet demos_from_graph(const TransactionGraph& g, std::uint64_t seed, const ExtractionConfig& extraction,
                         const PromptTexts& texts = PromptTexts::embedded(), unsigned n_benign = 4);

struct PromptConfig {
  unsigned n_suspicious = 8;
  unsigned n_benign = 4;
  std::string header = PromptTexts::embedded().get("header");
  std::string task = PromptTexts::embedded().get("task");
  std::string answer_format = PromptTexts::embedded().get("answer_format");
  std::uint64_t demo_seed = 1;
  /// Mark the focal transfer in the test serialization.
  bool focal_marker = true;
};

struct PromptBundle {
  std::string text;
  std::vector<Demonstration> demos;  // suspicious then benign
  std::uint64_t test_fingerprint = 0;
};

/// Assembles
///
///     <header>
///
///     Few-shot Examples:
///
///     <demo>Explanation: <text>        (per suspicious demo)
///
///     non-suspicious Examples:
///
///     <demo>Explanation: <text>        (per benign demo)
///
///     Task: <task>
///     Test Example:
///
///     <test>
///     Answer Format:
///     <answer format>
///
/// Empty demo sections are left out. Throws InvalidArgument when the demo
/// counts differ from cfg or the test text is empty. test_fingerprint is
/// fnv1a64 of the test text.
PromptBundle build_prompt(const std::vector<Demonstration>& suspicious, const std::vector<Demonstration>& benign,
                          std::string_view test, const PromptConfig& cfg = {});

/// Serializes `test` (with the focal marker when cfg asks for it) and builds.
PromptBundle build_prompt(const DemoSet& demos, const Subgraph& test, const PromptConfig& cfg = {});

/// Text between the last "Test Example:" line and "Answer Format:". Throws
/// InvalidArgument when either marker is missing.
std::string_view test_section(std::string_view prompt);

}  // namespace aml
