#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "aml/errors.hpp"
#include "aml/eval.hpp"
#include "aml/json_io.hpp"
#include "aml/report.hpp"
#include "aml/rng.hpp"
#include "aml/serialize.hpp"
#include "aml/typology.hpp"

using namespace aml;

namespace {

Outcome outcome(std::size_t id, bool truth, std::optional<VerdictLabel> said, std::vector<PatternKind> truth_p = {},
                std::vector<PatternKind> said_p = {}) {
  Outcome o;
  o.case_id = id;
  o.truth_label = truth;
  o.truth_patterns = std::move(truth_p);
  if (said) {
    Verdict v;
    v.label = *said;
    v.observed_patterns = std::move(said_p);
    o.verdict = v;
  } else {
    o.error = "unparseable";
  }
  return o;
}

constexpr auto S = VerdictLabel::Suspicious;
constexpr auto N = VerdictLabel::NotSuspicious;

Json without_run(const EvalReport& r) {
  Json j = report_to_json(r);
  j.erase("run");
  return j;
}

std::filesystem::path temp_path(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("aml_test_eval_" + name);
  std::filesystem::remove(p);
  return p;
}

Completer stub() {
  return [](const PromptBundle& p) { return stub_complete(p); };
}

}  // namespace

TEST_CASE("synthetic case set") {
  const auto cases = build_synthetic_set(8, 4, ExtractionConfig{}, 3);
  REQUIRE(cases.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(cases[i].case_id == i);
    CHECK(cases[i].truth_label == (i < 8));
    CHECK_NOTHROW(validate(cases[i].subgraph));
    if (i < 8) {
      CHECK(cases[i].truth_patterns == std::vector<PatternKind>{kLaunderingKinds[i]});
    } else {
      CHECK(cases[i].truth_patterns == std::vector<PatternKind>{PatternKind::None});
    }
  }
  const auto again = build_synthetic_set(8, 4, ExtractionConfig{}, 3);
  for (std::size_t i = 0; i < 12; ++i) CHECK(again[i].subgraph == cases[i].subgraph);
  const auto negatives = build_synthetic_set(0, 5, ExtractionConfig{}, 3);
  CHECK(negatives.size() == 5);
  for (const auto& c : negatives) CHECK_FALSE(c.truth_label);
}

TEST_CASE("dataset case set") {
  std::string csv =
      "Timestamp,From Bank,Account,To Bank,Account,Amount Received,Receiving Currency,Amount Paid,"
      "Payment Currency,Payment Format,Is Laundering\n";
  for (int i = 0; i < 30; ++i) {
    const std::string amt = std::to_string(100 + i) + ".00";
    csv += "2022/09/01 00:" + std::string(i < 10 ? "0" : "") + std::to_string(i) + ",1,A" + std::to_string(i % 7) +
           ",1,B" + std::to_string(i % 5) + "," + amt + ",US Dollar," + amt + ",US Dollar,Wire," +
           (i % 3 == 0 ? "1" : "0") + "\n";
  }
  const auto g = load_csv_text(csv);
  const auto cases = build_dataset_set(g, 10, 5, ExtractionConfig{}, 1);
  REQUIRE(cases.size() == 15);
  std::set<EdgeId> pos;
  for (const auto& c : cases) {
    if (c.truth_label) {
      pos.insert(c.subgraph.focal_edge.id);
      CHECK(c.subgraph.focal_edge.is_laundering == true);
    } else {
      CHECK(c.subgraph.focal_edge.is_laundering == false);
    }
  }
  CHECK(pos.size() == 10);
  CHECK_THROWS_AS(build_dataset_set(g, 11, 5, ExtractionConfig{}, 1), InvalidArgument);
}

TEST_CASE("confusion counting") {
  const std::vector<Outcome> one{outcome(0, true, S)};
  CHECK(confusion(one) == ConfusionCounts{1, 0, 0, 0});
  const std::vector<Outcome> four{outcome(0, true, S), outcome(1, false, S), outcome(2, true, N), outcome(3, false, N),
                                  outcome(4, true, std::nullopt)};
  CHECK(confusion(four) == ConfusionCounts{1, 1, 1, 1});
  CHECK(error_count(four) == 1);
}

TEST_CASE("metrics") {
  const MetricSet m = metrics({677, 403, 323, 597});
  CHECK(m.accuracy == doctest::Approx(0.637).epsilon(0.0005));
  CHECK(std::abs(m.precision - 0.627) < 0.001);
  CHECK(std::abs(m.recall - 0.677) < 0.0005);
  CHECK(std::abs(m.f1 - 0.651) < 0.001);

  const MetricSet perfect = metrics({1, 0, 0, 1});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  const MetricSet never = metrics({0, 0, 5, 5});
  CHECK(never.recall == 0.0);
  CHECK(never.precision == 0.0);
  CHECK(never.precision_undefined);
  CHECK_FALSE(never.recall_undefined);
  CHECK(never.accuracy == 0.5);
  CHECK(never.f1_undefined);
  CHECK_THROWS_AS(metrics({}), InvalidArgument);
}

TEST_CASE("percentile interpolation") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(percentile(v, 0.0) == 1.0);
  CHECK(percentile(v, 1.0) == 4.0);
  CHECK(percentile(v, 0.5) == doctest::Approx(2.5));
  CHECK(percentile(v, 0.025) == doctest::Approx(1.075));
}

TEST_CASE("bootstrap") {
  const auto mean_of = [](const std::vector<double>& xs) -> IndexMetric {
    return [&xs](std::span<const std::uint32_t> idx) {
      double s = 0;
      for (auto i : idx) s += xs[i];
      return s / static_cast<double>(idx.size());
    };
  };

  SUBCASE("zero variance") {
    const std::vector<double> same(50, 0.7);
    const BootstrapResult b = bootstrap(same.size(), mean_of(same), 200, 1);
    REQUIRE(b.point.has_value());
    CHECK(b.ci_low == doctest::Approx(*b.point));
    CHECK(b.ci_high == doctest::Approx(*b.point));
    CHECK(b.n_valid == 200);
  }

  SUBCASE("bernoulli calibration and determinism") {
    // exactly 1274 of 2000 correct, in shuffled order
    std::vector<double> xs(2000, 0.0);
    std::fill_n(xs.begin(), 1274, 1.0);
    Rng rng(42);
    rng.shuffle(xs);
    const BootstrapResult a = bootstrap(xs.size(), mean_of(xs), 1000, 9);
    const BootstrapResult b = bootstrap(xs.size(), mean_of(xs), 1000, 9);
    const BootstrapResult c = bootstrap_serial(xs.size(), mean_of(xs), 1000, 9);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(std::abs(a.mean - 0.637) < 0.01);
    const double analytic = 1.96 * std::sqrt(0.637 * 0.363 / 2000.0);
    CHECK(std::abs(a.half_width - analytic) < 0.25 * analytic);
    CHECK(a.ci_low <= a.mean);
    CHECK(a.mean <= a.ci_high);
  }

  SUBCASE("undefined resamples are skipped") {
    const IndexMetric picky = [](std::span<const std::uint32_t> idx) {
      return idx[0] == 0 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    };
    const BootstrapResult b = bootstrap(4, picky, 400, 3);
    CHECK(b.n_valid < 400);
    CHECK(b.n_valid > 200);
    CHECK(b.mean == 1.0);
  }
}

TEST_CASE("per-pattern scoring") {
  const std::vector<Outcome> one{outcome(0, true, S, {PatternKind::FanOut}, {PatternKind::FanOut})};
  const PatternMetrics a = pattern_metrics(one);
  CHECK(a.per_kind.at(PatternKind::FanOut).precision == 1.0);
  CHECK(a.per_kind.at(PatternKind::FanOut).recall == 1.0);

  std::vector<Outcome> two{outcome(0, true, S, {PatternKind::FanOut}, {PatternKind::FanOut, PatternKind::SimpleCycle})};
  two[0].verdict->unrecognized_patterns = {"smurfing"};
  const PatternMetrics b = pattern_metrics(two);
  CHECK(b.per_kind.at(PatternKind::FanOut).precision == 1.0);
  CHECK(b.per_kind.at(PatternKind::FanOut).recall == 1.0);
  CHECK(b.per_kind.at(PatternKind::SimpleCycle).precision == 0.0);
  CHECK_FALSE(b.per_kind.at(PatternKind::SimpleCycle).recall.has_value());
  CHECK_FALSE(b.per_kind.at(PatternKind::Stack).precision.has_value());
  CHECK(b.hallucinated_mentions == 1);
  CHECK(b.per_kind.size() == 8);
}

TEST_CASE("offline run equals an independent tally") {
  const auto cases = build_synthetic_set(16, 8, ExtractionConfig{}, 5);
  const DemoSet demos = default_demos(1);
  EvalOptions opts;
  opts.n_resamples = 200;
  opts.bootstrap_seed = 4;
  const EvalReport r = run_eval(cases, demos, stub(), opts);
  CHECK(r.n_cases == 24);
  CHECK(r.error_count == 0);

  ConfusionCounts tally;
  std::map<PatternKind, std::pair<std::size_t, std::size_t>> recall;  // correct, truth
  for (const auto& c : cases) {
    const auto kinds = detected_kinds(detect(parse_serialized(serialize(c.subgraph))));
    const bool said = !kinds.empty();
    (c.truth_label ? (said ? tally.tp : tally.fn) : (said ? tally.fp : tally.tn)) += 1;
    for (PatternKind k : c.truth_patterns) {
      if (k == PatternKind::None) continue;
      ++recall[k].second;
      if (std::find(kinds.begin(), kinds.end(), k) != kinds.end()) ++recall[k].first;
    }
  }
  CHECK(r.counts == tally);
  const MetricSet m = metrics(tally);
  CHECK(r.classification.at("accuracy").value == m.accuracy);
  CHECK(r.classification.at("f1").value == m.f1);
  for (const auto& [k, cr] : recall) {
    INFO(pattern_name(k));
    CHECK(r.per_pattern.at(k).score.recall == static_cast<double>(cr.first) / static_cast<double>(cr.second));
  }
  CHECK(r.per_pattern.at(PatternKind::FanOut).score.recall == 1.0);

  const EvalReport again = run_eval(cases, demos, stub(), opts);
  CHECK(without_run(again) == without_run(r));
  opts.parallelism = 1;
  CHECK(without_run(run_eval(cases, demos, stub(), opts)) == without_run(r));
}

TEST_CASE("interrupted runs resume to the same report") {
  const auto cases = build_synthetic_set(16, 8, ExtractionConfig{}, 6);
  const DemoSet demos = default_demos(1);
  EvalOptions opts;
  opts.n_resamples = 100;
  const EvalReport full = run_eval(cases, demos, stub(), opts);

  const auto log = temp_path("resume.ndjson");
  opts.outcome_log = log;
  opts.stop_after = 10;
  const EvalReport partial = run_eval(cases, demos, stub(), opts);
  CHECK(partial.error_count == 14);
  CHECK(read_outcome_log(log).size() == 10);

  // a crash mid-write leaves a torn line behind
  {
    std::ofstream out(log, std::ios::app);
    out << "{\"case_id\": 23, \"trut";
  }
  CHECK(read_outcome_log(log).size() == 10);

  opts.stop_after.reset();
  const EvalReport resumed = run_eval(cases, demos, stub(), opts);
  CHECK(without_run(resumed) == without_run(full));
  CHECK(resumed.run["resumed_from_log"] == 10);
  CHECK(resumed.run["completed_this_run"] == 14);
  CHECK(read_outcome_log(log).size() == 24);

  // a log from another case set is refused
  const auto other = build_synthetic_set(16, 8, ExtractionConfig{}, 7);
  CHECK_THROWS_AS(run_eval(other, demos, stub(), opts), Error);
  std::filesystem::remove(log);
}

TEST_CASE("failing completions are recorded, not fatal") {
  const auto cases = build_synthetic_set(3, 3, ExtractionConfig{}, 1);
  EvalOptions opts;
  opts.n_resamples = 50;
  const Completer dead = [](const PromptBundle&) -> Completion { throw TransportError("connection refused"); };
  const EvalReport r = run_eval(cases, default_demos(1), dead, opts);
  CHECK(r.error_count == 6);
  CHECK(r.counts.total() == 0);
  CHECK(r.classification.empty());
  CHECK_NOTHROW(render_text(r));

  const Completer garbled = [](const PromptBundle&) { return Completion{"I refuse to answer."}; };
  const EvalReport g = run_eval(cases, default_demos(1), garbled, opts);
  CHECK(g.error_count == 6);
  CHECK_THROWS_AS(run_eval({}, default_demos(1), garbled, opts), InvalidArgument);
}

TEST_CASE("reports survive JSON and render") {
  const auto cases = build_synthetic_set(8, 8, ExtractionConfig{}, 2);
  EvalOptions opts;
  opts.n_resamples = 100;
  const EvalReport r = run_eval(cases, default_demos(1), stub(), opts);
  const Json j = report_to_json(r);
  CHECK(j["schema"] == "aml.eval-report/1");
  CHECK(report_to_json(report_from_json(j)) == j);
  const std::string text = render_text(r);
  CHECK(text.find("Accuracy") != std::string::npos);
  CHECK(text.find("±") != std::string::npos);
  CHECK(text.find("simple-cycle") != std::string::npos);
  const std::string csv = render_csv(r);
  CHECK(csv.starts_with("section,name,value,ci_low,ci_high,half_width,undefined\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 + 16);
  CHECK_THROWS_AS(report_format_from_string("xml"), InvalidArgument);
}

TEST_CASE("outcome lines round-trip") {
  Outcome o = outcome(3, true, S, {PatternKind::Stack}, {PatternKind::Stack});
  o.raw_text = "Conclusion: Suspicious\n";
  o.usage = TokenUsage{1, 2, 3};
  o.subgraph_fingerprint = 0xFFFFFFFFFFFFFFFFULL;
  const std::string line = outcome_log_line(o);
  CHECK(line.back() == '\n');
  CHECK(std::count(line.begin(), line.end(), '\n') == 1);
  CHECK(outcome_from_json(Json::parse(line)) == o);
}
