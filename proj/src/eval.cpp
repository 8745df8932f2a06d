#include "aml/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "aml/errors.hpp"
#include "aml/json_io.hpp"
#include "aml/rng.hpp"
#include "aml/serialize.hpp"
#include "aml/typology.hpp"

namespace aml {

// ---------------------------------------------------------------- case sets

namespace {

constexpr std::array<std::string_view, 4> kCaseCurrencies{"US Dollar", "Euro", "UK Pound", "Yen"};

TestCase wrap_case(std::size_t id, const Subgraph& generated, Rng& rng, const ExtractionConfig& extraction) {
  const TransactionGraph g = graph_from_subgraph(generated);
  const auto focal = static_cast<EdgeId>(rng.index(g.edge_count()));
  TestCase c;
  c.case_id = id;
  c.subgraph = extract_khop(g, focal, extraction);
  c.truth_label = c.subgraph.truth && c.subgraph.truth->is_laundering;
  if (c.subgraph.truth) c.truth_patterns = c.subgraph.truth->patterns;
  return c;
}

}  // namespace

std::vector<TestCase> build_synthetic_set(std::size_t n_pos, std::size_t n_neg,
                                          const ExtractionConfig& extraction, std::uint64_t seed) {
  extraction.validate();
  std::vector<TestCase> cases(n_pos + n_neg);
  const auto total = static_cast<std::int64_t>(cases.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < total; ++i) {
    const auto id = static_cast<std::size_t>(i);
    Rng rng(derive_seed(seed, id));
    if (id < n_pos) {
      GenConfig cfg;
      cfg.kind = kLaunderingKinds[id % kLaunderingKinds.size()];
      cfg.amount_base = Money{rng.uniform_int(500, 500'000) * 100,
                              std::string(kCaseCurrencies[rng.index(kCaseCurrencies.size())])};
      cfg.seed = rng.next();
      cases[id] = wrap_case(id, generate(cfg), rng, extraction);
    } else {
      BenignParams p;
      p.n_accounts = static_cast<unsigned>(rng.uniform_int(2, 6));
      p.n_edges = static_cast<unsigned>(rng.uniform_int(4, 12));
      p.seed = rng.next();
      cases[id] = wrap_case(id, generate_benign(p), rng, extraction);
    }
  }
  return cases;
}

std::vector<TestCase> build_dataset_set(const TransactionGraph& g, std::size_t n_pos, std::size_t n_neg,
                                        const ExtractionConfig& extraction, std::uint64_t seed) {
  std::vector<EdgeId> pos, neg;
  const auto records = g.records();
  for (EdgeId id = 0; id < records.size(); ++id) {
    if (records[id].laundering == 1) pos.push_back(id);
    else if (records[id].laundering == 0) neg.push_back(id);
  }
  if (pos.size() < n_pos || neg.size() < n_neg) {
    throw InvalidArgument("insufficient labelled edges: need " + std::to_string(n_pos) + " laundering and " +
                          std::to_string(n_neg) + " clean, have " + std::to_string(pos.size()) + " and " +
                          std::to_string(neg.size()));
  }
  Rng rng(seed);
  // partial Fisher-Yates: the first n entries become the sample
  const auto sample = [&](std::vector<EdgeId>& pool, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + rng.index(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
  };
  sample(pos, n_pos);
  sample(neg, n_neg);
  std::vector<EdgeId> focal = pos;
  focal.insert(focal.end(), neg.begin(), neg.end());
  auto subs = extract_batch(g, focal, extraction);
  std::vector<TestCase> cases(focal.size());
  for (std::size_t i = 0; i < focal.size(); ++i) {
    TestCase& c = cases[i];
    c.case_id = i;
    c.subgraph = std::move(subs[i]);
    c.truth_label = i < n_pos;
    if (c.subgraph.truth) c.truth_patterns = c.subgraph.truth->patterns;
  }
  return cases;
}

// ---------------------------------------------------------------- metrics

ConfusionCounts confusion(std::span<const Outcome> outcomes) {
  ConfusionCounts c;
  for (const Outcome& o : outcomes) {
    if (!o.verdict) continue;
    const bool said = o.verdict->label == VerdictLabel::Suspicious;
    if (o.truth_label && said) ++c.tp;
    else if (!o.truth_label && said) ++c.fp;
    else if (o.truth_label) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::size_t error_count(std::span<const Outcome> outcomes) {
  return static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return !o.verdict.has_value(); }));
}

MetricSet metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw InvalidArgument("metrics of an empty outcome set");
  MetricSet m;
  const auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  bool unused = false;
  m.accuracy = ratio(c.tp + c.tn, c.total(), unused);
  m.precision = ratio(c.tp, c.tp + c.fp, m.precision_undefined);
  m.recall = ratio(c.tp, c.tp + c.fn, m.recall_undefined);
  m.f1_undefined = m.precision + m.recall == 0.0;
  m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

double percentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("percentile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

std::vector<std::uint32_t> resample(std::size_t n, std::uint64_t seed, std::size_t r) {
  Rng rng(derive_seed(seed, r));
  std::vector<std::uint32_t> idx(n);
  for (auto& i : idx) i = static_cast<std::uint32_t>(rng.index(n));
  return idx;
}

BootstrapResult summarize(std::size_t n, const IndexMetric& metric, std::vector<double> values,
                          std::uint64_t seed) {
  BootstrapResult b;
  b.n_resamples = values.size();
  b.seed = seed;
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  if (const double p = metric(all); !std::isnan(p)) b.point = p;
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }), values.end());
  b.n_valid = values.size();
  if (values.empty()) return b;
  std::sort(values.begin(), values.end());
  // fixed-order summation keeps the mean independent of thread count
  double sum = 0.0;
  for (double v : values) sum += v;
  b.mean = sum / static_cast<double>(values.size());
  b.ci_low = percentile(values, 0.025);
  b.ci_high = percentile(values, 0.975);
  b.half_width = (b.ci_high - b.ci_low) / 2.0;
  return b;
}

}  // namespace

BootstrapResult bootstrap_serial(std::size_t n, const IndexMetric& metric, std::size_t n_resamples,
                                 std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("bootstrap over an empty sample");
  std::vector<double> values(n_resamples);
  for (std::size_t r = 0; r < n_resamples; ++r) values[r] = metric(resample(n, seed, r));
  return summarize(n, metric, std::move(values), seed);
}

BootstrapResult bootstrap(std::size_t n, const IndexMetric& metric, std::size_t n_resamples,
                          std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("bootstrap over an empty sample");
  std::vector<double> values(n_resamples);
  const auto total = static_cast<std::int64_t>(n_resamples);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < total; ++r) {
    values[static_cast<std::size_t>(r)] = metric(resample(n, seed, static_cast<std::size_t>(r)));
  }
  return summarize(n, metric, std::move(values), seed);
}

PatternMetrics pattern_metrics(std::span<const Outcome> outcomes) {
  PatternMetrics pm;
  for (PatternKind k : kLaunderingKinds) pm.per_kind[k] = PatternScore{};
  for (const Outcome& o : outcomes) {
    if (!o.verdict) continue;
    pm.hallucinated_mentions += o.verdict->unrecognized_patterns.size();
    for (PatternKind k : kLaunderingKinds) {
      const bool mentioned = std::find(o.verdict->observed_patterns.begin(), o.verdict->observed_patterns.end(),
                                       k) != o.verdict->observed_patterns.end();
      const bool truth = std::find(o.truth_patterns.begin(), o.truth_patterns.end(), k) != o.truth_patterns.end();
      PatternScore& s = pm.per_kind[k];
      s.mentions += mentioned ? 1 : 0;
      s.truth += truth ? 1 : 0;
      s.correct += mentioned && truth ? 1 : 0;
    }
  }
  for (auto& [k, s] : pm.per_kind) {
    if (s.mentions > 0) s.precision = static_cast<double>(s.correct) / static_cast<double>(s.mentions);
    if (s.truth > 0) s.recall = static_cast<double>(s.correct) / static_cast<double>(s.truth);
  }
  return pm;
}

// ---------------------------------------------------------------- report

EvalReport make_report(std::vector<Outcome> outcomes, std::size_t n_cases, std::size_t n_resamples,
                       std::uint64_t seed, nlohmann::ordered_json config) {
  std::sort(outcomes.begin(), outcomes.end(),
            [](const Outcome& a, const Outcome& b) { return a.case_id < b.case_id; });
  EvalReport r;
  r.n_cases = n_cases;
  r.error_count = error_count(outcomes) + (n_cases > outcomes.size() ? n_cases - outcomes.size() : 0);
  r.counts = confusion(outcomes);
  config["n_resamples"] = n_resamples;
  config["bootstrap_seed"] = seed;
  r.config = std::move(config);

  std::vector<const Outcome*> parsed;
  for (const Outcome& o : outcomes) {
    if (o.verdict) parsed.push_back(&o);
  }
  r.pattern_truth_available = std::all_of(parsed.begin(), parsed.end(), [](const Outcome* o) {
    return !o->truth_label || !o->truth_patterns.empty();
  });
  if (parsed.empty()) return r;

  const auto counts_of = [&](std::span<const std::uint32_t> idx) {
    ConfusionCounts c;
    for (std::uint32_t i : idx) {
      const Outcome& o = *parsed[i];
      const bool said = o.verdict->label == VerdictLabel::Suspicious;
      if (o.truth_label && said) ++c.tp;
      else if (!o.truth_label && said) ++c.fp;
      else if (o.truth_label) ++c.fn;
      else ++c.tn;
    }
    return c;
  };
  const MetricSet point = metrics(r.counts);
  const std::array<std::pair<const char*, double MetricSet::*>, 4> fields{
      {{"accuracy", &MetricSet::accuracy},
       {"precision", &MetricSet::precision},
       {"recall", &MetricSet::recall},
       {"f1", &MetricSet::f1}}};
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto member = fields[f].second;
    const IndexMetric fn = [&, member](std::span<const std::uint32_t> idx) { return metrics(counts_of(idx)).*member; };
    MetricReport m;
    m.value = point.*member;
    m.undefined = (f == 1 && point.precision_undefined) || (f == 2 && point.recall_undefined) ||
                  (f == 3 && point.f1_undefined);
    m.ci = bootstrap(parsed.size(), fn, n_resamples, derive_seed(seed, f));
    r.classification[fields[f].first] = m;
  }

  std::vector<Outcome> parsed_copy;
  for (const Outcome* o : parsed) parsed_copy.push_back(*o);
  const PatternMetrics pm = pattern_metrics(parsed_copy);
  r.hallucinated_mentions = pm.hallucinated_mentions;
  if (!r.pattern_truth_available) return r;

  for (std::size_t k = 0; k < kLaunderingKinds.size(); ++k) {
    const PatternKind kind = kLaunderingKinds[k];
    // per case: (mentioned, truth) flags for this kind
    std::vector<std::pair<bool, bool>> flags(parsed.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      const Outcome& o = *parsed[i];
      flags[i] = {std::find(o.verdict->observed_patterns.begin(), o.verdict->observed_patterns.end(), kind) !=
                      o.verdict->observed_patterns.end(),
                  std::find(o.truth_patterns.begin(), o.truth_patterns.end(), kind) != o.truth_patterns.end()};
    }
    const auto ratio = [&](std::span<const std::uint32_t> idx, bool by_mention) {
      std::size_t den = 0, num = 0;
      for (std::uint32_t i : idx) {
        const auto [m, t] = flags[i];
        if (by_mention ? m : t) {
          ++den;
          num += m && t ? 1 : 0;
        }
      }
      return den == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(num) / static_cast<double>(den);
    };
    PatternReport pr;
    pr.score = pm.per_kind.at(kind);
    pr.precision_ci = bootstrap(parsed.size(), [&](std::span<const std::uint32_t> idx) { return ratio(idx, true); },
                                n_resamples, derive_seed(seed, 100 + 2 * k));
    pr.recall_ci = bootstrap(parsed.size(), [&](std::span<const std::uint32_t> idx) { return ratio(idx, false); },
                             n_resamples, derive_seed(seed, 101 + 2 * k));
    r.per_pattern[kind] = pr;
  }
  return r;
}

// ---------------------------------------------------------------- outcome log

std::string outcome_log_line(const Outcome& o) { return outcome_to_json(o).dump() + "\n"; }

std::vector<Outcome> read_outcome_log(const std::filesystem::path& path) {
  std::vector<Outcome> out;
  if (!std::filesystem::exists(path)) return out;
  const std::string text = read_file(path);
  std::size_t pos = 0, lineno = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    const bool torn = end == std::string::npos;
    if (torn) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      if (torn) break;  // interrupted mid-write
      throw ParseError("outcome log " + path.string() + ": invalid JSON", lineno);
    }
    out.push_back(outcome_from_json(j));
  }
  return out;
}

namespace {

Outcome run_case(const TestCase& c, const DemoSet& demos, const Completer& complete, const PromptConfig& pcfg) {
  Outcome o;
  o.case_id = c.case_id;
  o.truth_label = c.truth_label;
  o.truth_patterns = c.truth_patterns;
  o.subgraph_fingerprint = subgraph_fingerprint(c.subgraph);
  try {
    const PromptBundle prompt = build_prompt(demos, c.subgraph, pcfg);
    const Completion comp = complete(prompt);
    o.raw_text = comp.text;
    o.latency_ms = comp.latency.count();
    o.attempts = comp.attempts;
    o.usage = comp.usage;
  } catch (const std::exception& e) {
    o.error = std::string("completion: ") + e.what();
    return o;
  }
  VerdictResult v = parse_verdict(o.raw_text);
  if (auto* ok = std::get_if<Verdict>(&v)) o.verdict = std::move(*ok);
  else o.error = "verdict: " + std::get<VerdictError>(v).message;
  return o;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

EvalReport run_eval(std::span<const TestCase> cases, const DemoSet& demos, const Completer& complete,
                    const EvalOptions& opts) {
  if (cases.empty()) throw InvalidArgument("no test cases");
  if (opts.parallelism == 0) throw InvalidArgument("parallelism must be at least 1");
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();

  std::map<std::size_t, const TestCase*> by_id;
  for (const TestCase& c : cases) {
    if (!by_id.emplace(c.case_id, &c).second) throw InvalidArgument("duplicate case id " + std::to_string(c.case_id));
  }

  std::map<std::size_t, Outcome> done;
  if (opts.outcome_log) {
    for (Outcome& o : read_outcome_log(*opts.outcome_log)) {
      const auto it = by_id.find(o.case_id);
      if (it == by_id.end() || subgraph_fingerprint(it->second->subgraph) != o.subgraph_fingerprint) {
        throw Error("outcome log " + opts.outcome_log->string() + " does not match this case set (case " +
                    std::to_string(o.case_id) + ")");
      }
      done[o.case_id] = std::move(o);
    }
    // drop a torn tail so appends start on a fresh line
    std::string clean;
    for (const auto& [id, o] : done) clean += outcome_log_line(o);
    write_file(*opts.outcome_log, clean);
  }
  const std::size_t resumed = done.size();

  std::vector<const TestCase*> todo;
  for (const auto& [id, c] : by_id) {
    if (!done.contains(id)) todo.push_back(c);
  }
  if (opts.stop_after && todo.size() > *opts.stop_after) todo.resize(*opts.stop_after);

  std::ofstream log;
  if (opts.outcome_log) {
    log.open(*opts.outcome_log, std::ios::app | std::ios::binary);
    if (!log) throw IoError("cannot append to " + opts.outcome_log->string());
  }
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::vector<Outcome> fresh(todo.size());
  const auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      fresh[i] = run_case(*todo[i], demos, complete, opts.prompt);
      if (log.is_open()) {
        std::lock_guard lock(mu);
        log << outcome_log_line(fresh[i]);
        log.flush();
      }
    }
  };
  const unsigned n_threads = std::min<std::size_t>(opts.parallelism, std::max<std::size_t>(todo.size(), 1));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();

  std::vector<Outcome> all;
  for (auto& [id, o] : done) all.push_back(std::move(o));
  for (Outcome& o : fresh) all.push_back(std::move(o));

  nlohmann::ordered_json config = opts.config;
  config["n_suspicious_demos"] = opts.prompt.n_suspicious;
  config["n_benign_demos"] = opts.prompt.n_benign;
  config["focal_marker"] = opts.prompt.focal_marker;
  EvalReport r = make_report(std::move(all), cases.size(), opts.n_resamples, opts.bootstrap_seed, std::move(config));

  std::int64_t latency = 0;
  for (const Outcome& o : fresh) latency += o.latency_ms;
  r.run["started_at"] = started_at;
  r.run["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  r.run["completed_this_run"] = fresh.size();
  r.run["resumed_from_log"] = resumed;
  r.run["total_latency_ms"] = latency;
  return r;
}

}  // namespace aml
