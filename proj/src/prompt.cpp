#include "aml/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "aml/errors.hpp"
#include "aml/hash.hpp"
#include "aml/rng.hpp"
#include "aml/serialize.hpp"
#include "aml/typology.hpp"

namespace aml {

namespace detail {
const std::map<std::string, std::string>& embedded_prompt_texts();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

const PromptTexts& PromptTexts::embedded() {
  static const PromptTexts texts = [] {
    PromptTexts t;
    t.texts_ = detail::embedded_prompt_texts();
    return t;
  }();
  return texts;
}

PromptTexts PromptTexts::from_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  PromptTexts t = embedded();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      t.texts_[entry.path().stem().string()] = read_file(entry.path());
    }
  }
  return t;
}

const std::string& PromptTexts::get(const std::string& name) const {
  const auto it = texts_.find(name);
  if (it == texts_.end()) throw NotFound("no prompt text named '" + name + "'");
  return it->second;
}

std::string PromptTexts::explanation(PatternKind kind) const {
  const std::string_view text = trim(get(std::string(pattern_name(kind))));
  if (text.empty()) throw InvalidArgument("empty explanation for " + std::string(pattern_name(kind)));
  return std::string(text);
}

std::string PromptTexts::benign_explanation(std::size_t i) const {
  std::vector<std::string_view> lines;
  std::string_view rest = get("benign");
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    const std::string_view line = trim(rest.substr(0, nl));
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw InvalidArgument("no benign explanations");
  return std::string(lines[i % lines.size()]);
}

namespace {

constexpr std::array<std::string_view, 5> kDemoCurrencies{"US Dollar", "Euro", "Shekel", "UK Pound", "Yuan"};

Demonstration synthetic_demo(PatternKind kind, std::uint64_t seed, const PromptTexts& texts) {
  Rng rng(seed);
  GenConfig cfg;
  cfg.kind = kind;
  cfg.fan = kind == PatternKind::SimpleCycle || kind == PatternKind::Random ? 4 : 3;
  cfg.amount_base = Money{rng.uniform_int(1'000, 250'000) * 100,
                          std::string(kDemoCurrencies[rng.index(kDemoCurrencies.size())])};
  cfg.seed = rng.next();
  return Demonstration{serialize(generate(cfg)), texts.explanation(kind), kind};
}

Demonstration benign_demo(std::size_t i, std::uint64_t seed, const PromptTexts& texts) {
  BenignParams p;
  p.n_accounts = 2 + static_cast<unsigned>(i % 3);
  p.n_edges = 6;
  p.seed = seed;
  return Demonstration{serialize(generate_benign(p)), texts.benign_explanation(i), PatternKind::None};
}

}  // namespace

DemoSet default_demos(std::uint64_t seed, const PromptTexts& texts, unsigned n_benign) {
  DemoSet set;
  for (std::size_t i = 0; i < kDemoOrder.size(); ++i) {
    set.suspicious.push_back(synthetic_demo(kDemoOrder[i], derive_seed(seed, i), texts));
  }
  for (unsigned i = 0; i < n_benign; ++i) {
    set.benign.push_back(benign_demo(i, derive_seed(seed, 100 + i), texts));
  }
  return set;
}

DemoSet demos_from_graph(const TransactionGraph& g, std::uint64_t seed, const ExtractionConfig& extraction,
                         const PromptTexts& texts, unsigned n_benign) {
  if (!g.has_pattern_labels()) throw InvalidArgument("graph carries no pattern labels");
  std::vector<std::vector<EdgeId>> by_kind(kLaunderingKinds.size());
  std::vector<EdgeId> negatives;
  const auto records = g.records();
  for (EdgeId id = 0; id < records.size(); ++id) {
    if (records[id].laundering == 0) negatives.push_back(id);
    if (records[id].pattern < by_kind.size()) by_kind[records[id].pattern].push_back(id);
  }
  if (negatives.size() < n_benign) throw InvalidArgument("graph has too few non-laundering edges");

  Rng rng(seed);
  DemoSet set;
  for (std::size_t i = 0; i < kDemoOrder.size(); ++i) {
    const PatternKind kind = kDemoOrder[i];
    const auto& pool = by_kind[static_cast<std::size_t>(kind)];
    if (pool.empty()) {
      set.suspicious.push_back(synthetic_demo(kind, derive_seed(seed, i), texts));
      continue;
    }
    const EdgeId focal = pool[rng.index(pool.size())];
    set.suspicious.push_back(Demonstration{serialize(extract_khop(g, focal, extraction)), texts.explanation(kind), kind});
  }
  std::vector<EdgeId> picked = negatives;
  rng.shuffle(picked);
  for (unsigned i = 0; i < n_benign; ++i) {
    set.benign.push_back(Demonstration{serialize(extract_khop(g, picked[i], extraction)),
                                       texts.benign_explanation(i), PatternKind::None});
  }
  return set;
}

PromptBundle build_prompt(const std::vector<Demonstration>& suspicious, const std::vector<Demonstration>& benign,
                          std::string_view test, const PromptConfig& cfg) {
  if (suspicious.size() != cfg.n_suspicious) {
    throw InvalidArgument("expected " + std::to_string(cfg.n_suspicious) + " suspicious demonstrations, got " +
                          std::to_string(suspicious.size()));
  }
  if (benign.size() != cfg.n_benign) {
    throw InvalidArgument("expected " + std::to_string(cfg.n_benign) + " benign demonstrations, got " +
                          std::to_string(benign.size()));
  }
  if (trim(test).empty()) throw InvalidArgument("empty test serialization");

  const auto block = [](std::string& out, std::string_view text) {
    out += text;
    if (!text.empty() && text.back() != '\n') out += '\n';
  };
  const auto demos = [&](std::string& out, std::string_view title, const std::vector<Demonstration>& list) {
    if (list.empty()) return;
    out += title;
    out += "\n\n";
    for (const Demonstration& d : list) {
      if (d.explanation.empty()) throw InvalidArgument("demonstration without explanation");
      block(out, d.text);
      out += "Explanation: ";
      out += d.explanation;
      out += "\n\n";
    }
  };

  PromptBundle b;
  std::string& out = b.text;
  block(out, trim(cfg.header));
  out += '\n';
  demos(out, "Few-shot Examples:", suspicious);
  demos(out, "non-suspicious Examples:", benign);
  out += "Task: ";
  block(out, trim(cfg.task));
  out += "Test Example:\n\n";
  block(out, test);
  out += "Answer Format:\n";
  block(out, trim(cfg.answer_format));

  b.demos = suspicious;
  b.demos.insert(b.demos.end(), benign.begin(), benign.end());
  b.test_fingerprint = fnv1a64(test);
  return b;
}

PromptBundle build_prompt(const DemoSet& demos, const Subgraph& test, const PromptConfig& cfg) {
  return build_prompt(demos.suspicious, demos.benign, serialize(test, SerializeOptions{cfg.focal_marker}), cfg);
}

std::string_view test_section(std::string_view prompt) {
  constexpr std::string_view kStart = "Test Example:\n";
  constexpr std::string_view kEnd = "Answer Format:";
  const auto start = prompt.rfind(kStart);
  if (start == std::string_view::npos) throw InvalidArgument("prompt has no 'Test Example:' section");
  const auto body = start + kStart.size();
  const auto end = prompt.find(kEnd, body);
  if (end == std::string_view::npos) throw InvalidArgument("prompt has no 'Answer Format:' section");
  return trim(prompt.substr(body, end - body));
}

}  // namespace aml
