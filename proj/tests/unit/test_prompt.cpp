#include <doctest.h>

#include <filesystem>
#include <set>

#include "../support/fixtures.hpp"
#include "aml/errors.hpp"
#include "aml/prompt.hpp"
#include "aml/serialize.hpp"
#include "aml/synth_data.hpp"
#include "aml/typology.hpp"

using namespace aml;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

}  // namespace

TEST_CASE("default demonstrations cover every kind once") {
  const DemoSet d = default_demos(1);
  REQUIRE(d.suspicious.size() == 8);
  CHECK(d.benign.size() == 4);
  std::set<PatternKind> kinds;
  for (const auto& demo : d.suspicious) kinds.insert(demo.kind);
  CHECK(kinds == std::set<PatternKind>(kLaunderingKinds.begin(), kLaunderingKinds.end()));
  for (const auto& demo : d.benign) CHECK(demo.kind == PatternKind::None);

  const DemoSet again = default_demos(1);
  CHECK(again.suspicious == d.suspicious);
  CHECK(again.benign == d.benign);
  CHECK(default_demos(2).suspicious != d.suspicious);
}

TEST_CASE("each demonstration passes its own kind's detector") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const DemoSet d = default_demos(seed);
    for (const auto& demo : d.suspicious) {
      CHECK_FALSE(demo.explanation.empty());
      if (demo.kind == PatternKind::Random) continue;
      const auto kinds = detected_kinds(detect(parse_serialized(demo.text)));
      INFO(pattern_name(demo.kind));
      CHECK(std::find(kinds.begin(), kinds.end(), demo.kind) != kinds.end());
    }
    for (const auto& demo : d.benign) CHECK(detect(parse_serialized(demo.text)).empty());
  }
}

TEST_CASE("prompt layout") {
  const Subgraph test = test::sample_subgraph();
  const DemoSet d = default_demos(1);
  const PromptBundle p = build_prompt(d, test);
  const std::string& text = p.text;
  CHECK(text.starts_with("You are an expert financial crime investigator"));
  CHECK(count(text, "\nExplanation: ") == 12);
  for (const auto& demo : p.demos) CHECK(count(text, demo.text) == 1);
  const std::string test_text = serialize(test, {true});
  CHECK(count(text, test_text) == 1);
  CHECK(text.find("Few-shot Examples:") < text.find("non-suspicious Examples:"));
  CHECK(text.find("non-suspicious Examples:") < text.find("Task: "));
  CHECK(text.find("Task: ") < text.find("Test Example:"));
  CHECK(text.find("Test Example:") < text.find("Answer Format:"));
  CHECK(text.ends_with("- Observed Pattern: (e.g., gather-scatter)\n"));
  CHECK(test_section(text) == std::string_view(test_text).substr(0, test_text.size() - 1));
  CHECK(build_prompt(d, test).text == text);
}

TEST_CASE("zero-shot prompt") {
  PromptConfig cfg;
  cfg.n_suspicious = 0;
  cfg.n_benign = 0;
  const Subgraph test = test::sample_subgraph();
  const PromptBundle p = build_prompt(DemoSet{}, test, cfg);
  const std::string expected = PromptTexts::embedded().get("header") + "\nTask: " +
                               PromptTexts::embedded().get("task") + "Test Example:\n\n" + serialize(test, {true}) +
                               "Answer Format:\n" + PromptTexts::embedded().get("answer_format");
  CHECK(p.text == expected);
  CHECK(p.demos.empty());
}

TEST_CASE("demo count mismatches are rejected") {
  PromptConfig cfg;
  cfg.n_suspicious = 3;
  CHECK_THROWS_AS(build_prompt(default_demos(1), test::sample_subgraph(), cfg), InvalidArgument);
  CHECK_THROWS_AS(test_section("no sections here"), InvalidArgument);
}

TEST_CASE("texts can be overridden from a directory") {
  const auto dir = std::filesystem::temp_directory_path() / "aml_test_prompt_texts";
  std::filesystem::create_directories(dir);
  write_file(dir / "fan-out.txt", "Custom fan-out note.\n");
  write_file(dir / "header.txt", "Custom header.\n");
  const PromptTexts t = PromptTexts::from_dir(dir);
  std::filesystem::remove_all(dir);
  CHECK(t.explanation(PatternKind::FanOut) == "Custom fan-out note.");
  CHECK(t.get("header") == "Custom header.\n");
  CHECK(t.explanation(PatternKind::FanIn) == PromptTexts::embedded().explanation(PatternKind::FanIn));
  CHECK_THROWS(t.get("no-such-text"));
}

TEST_CASE("demonstrations drawn from a labelled graph") {
  SynthCsvConfig cfg;
  cfg.rows = 2000;
  cfg.laundering_fraction = 0.2;
  cfg.seed = 5;
  const SynthCsvResult r = synth_csv(cfg);
  const auto g = load_csv_text(r.csv, CsvSchema::ibm(), std::string_view(r.patterns));
  const DemoSet d = demos_from_graph(g, 1, ExtractionConfig{});
  CHECK(d.suspicious.size() == 8);
  CHECK(d.benign.size() == 4);
  const DemoSet again = demos_from_graph(g, 1, ExtractionConfig{});
  CHECK(again.suspicious == d.suspicious);
}
