// amlctl: command-line front end for the aml toolkit.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include "aml/errors.hpp"
#include "aml/eval.hpp"
#include "aml/extract.hpp"
#include "aml/graph.hpp"
#include "aml/json_io.hpp"
#include "aml/llm.hpp"
#include "aml/prompt.hpp"
#include "aml/report.hpp"
#include "aml/rng.hpp"
#include "aml/serialize.hpp"
#include "aml/synth_data.hpp"
#include "aml/typology.hpp"
#include "aml/verdict.hpp"

namespace {

using namespace aml;

// Bad flag combinations found after parsing; exit code 1 like CLI11 errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  return read_file(path);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

Subgraph load_subgraph(const std::string& path) {
  const std::string text = read_input(path);
  const Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("json: " + path + " is not valid JSON");
  return subgraph_from_json(j);
}

// Shared extraction flags.
struct ExtractFlags {
  unsigned k = 2;
  std::size_t max_nodes = 64;
  std::size_t max_edges = 32;
  std::optional<std::int64_t> window;
  bool uncapped = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--k", k, "Hop radius")->check(CLI::PositiveNumber);
    cmd->add_option("--max-nodes", max_nodes, "Cap on accounts");
    cmd->add_option("--max-edges", max_edges, "Per-direction edge cap at each account");
    cmd->add_option("--window", window, "Only transfers within +/- this many minutes");
    cmd->add_flag("--uncapped", uncapped, "Ignore node and edge caps");
  }
  ExtractionConfig config() const {
    ExtractionConfig c = uncapped ? ExtractionConfig::uncapped(k) : ExtractionConfig{k, max_nodes, max_edges, {}};
    c.window_minutes = window;
    return c;
  }
};

DetectorConfig detector_config(const std::vector<std::string>& pairs) {
  DetectorConfig cfg;
  for (const std::string& kv : pairs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--config expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string v = kv.substr(eq + 1);
    try {
      if (key == "min_fan") cfg.min_fan = static_cast<unsigned>(std::stoul(v));
      else if (key == "window_minutes") cfg.window_minutes = std::stoll(v);
      else if (key == "conservation_tol") cfg.conservation_tol = std::stod(v);
      else if (key == "max_cycle_len") cfg.max_cycle_len = static_cast<unsigned>(std::stoul(v));
      else if (key == "bipartite_min_side") cfg.bipartite_min_side = static_cast<unsigned>(std::stoul(v));
      else if (key == "bipartite_min_density") cfg.bipartite_min_density = std::stod(v);
      else if (key == "max_cycles") cfg.max_cycles = std::stoull(v);
      else throw UsageError("unknown detector key '" + key + "'");
    } catch (const std::logic_error&) {
      throw UsageError("bad value for " + key + ": '" + v + "'");
    }
  }
  cfg.validate();
  return cfg;
}

PatternKind kind_arg(const std::string& name) {
  const auto k = pattern_from_name(name);
  if (!k) throw UsageError("unknown pattern kind '" + name + "'");
  return *k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgraph extraction, prompting and evaluation for transaction-graph AML reasoning", "amlctl"};
  app.set_version_flag("--version", std::string(AML_VERSION));
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a transaction CSV into a graph cache");
  std::string in_csv, schema = "ibm", out_path;
  std::optional<std::string> patterns_path;
  ingest->add_option("--input", in_csv, "Transaction CSV")->required();
  ingest->add_option("--schema", schema, "Schema name (ibm, ibm-pandas) or key=value file");
  ingest->add_option("--patterns", patterns_path, "Laundering-attempt file with pattern labels");
  ingest->add_option("--out", out_path, "Graph cache to write")->required();

  // extract
  auto* extract = app.add_subcommand("extract", "Extract the k-hop subgraph around one transfer");
  std::string graph_path;
  EdgeId edge = 0;
  ExtractFlags xf;
  extract->add_option("--graph", graph_path, "Graph cache")->required();
  extract->add_option("--edge", edge, "Focal edge id")->required();
  xf.add(extract);
  extract->add_option("--out", out_path, "Subgraph JSON (stdout when omitted)");

  // serialize
  auto* ser = app.add_subcommand("serialize", "Render a subgraph as prompt text");
  std::string sub_path;
  bool focal_marker = false;
  ser->add_option("--subgraph", sub_path, "Subgraph JSON, - for stdin")->required();
  ser->add_flag("--focal-marker", focal_marker, "Append the focal transfer line");
  ser->add_option("--out", out_path, "Output file (stdout when omitted)");

  // parse-verdict
  auto* pv = app.add_subcommand("parse-verdict", "Parse a model completion into a verdict");
  std::string completion_path;
  pv->add_option("--in", completion_path, "Completion text, - for stdin")->required();
  pv->add_option("--out", out_path, "Verdict JSON (stdout when omitted)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a typology instance or a synthetic transaction CSV");
  std::string kind_name = "fan-out";
  GenConfig gen;
  std::uint64_t seed = 0;
  std::optional<std::string> csv_out;
  SynthCsvConfig csv_cfg;
  synth->add_option("--kind", kind_name, "Pattern kind, or 'benign'");
  synth->add_option("--fan", gen.fan, "Branch factor / side size / cycle length");
  synth->add_option("--layers", gen.layers, "Stack layers");
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--out", out_path, "Subgraph JSON (stdout when omitted)");
  synth->add_option("--csv", csv_out, "Write a transaction CSV instead of one subgraph");
  synth->add_option("--rows", csv_cfg.rows, "CSV rows");
  synth->add_option("--laundering-fraction", csv_cfg.laundering_fraction, "Share of laundering rows");
  synth->add_option("--patterns", patterns_path, "Laundering-attempt file to write alongside --csv");

  // detect
  auto* det = app.add_subcommand("detect", "Run the typology detectors on a subgraph");
  std::vector<std::string> det_pairs;
  det->add_option("--subgraph", sub_path, "Subgraph JSON, - for stdin")->required();
  det->add_option("--config", det_pairs, "Detector thresholds as key=value");
  det->add_option("--out", out_path, "Matches JSON (stdout when omitted)");

  // build-prompt
  auto* bp = app.add_subcommand("build-prompt", "Assemble the few-shot prompt for a test subgraph");
  std::optional<std::string> texts_dir, demo_graph;
  PromptConfig pcfg;
  std::uint64_t prompt_seed = 1;
  bool no_marker = false;
  bp->add_option("--test", sub_path, "Test subgraph JSON, - for stdin")->required();
  bp->add_option("--seed", prompt_seed, "Demonstration seed");
  bp->add_option("--texts-dir", texts_dir, "Directory overriding the built-in prompt texts");
  bp->add_option("--demo-graph", demo_graph, "Draw demonstrations from this labelled graph cache");
  bp->add_option("--n-suspicious", pcfg.n_suspicious, "Suspicious demonstrations (0-8)");
  bp->add_option("--n-benign", pcfg.n_benign, "Benign demonstrations");
  bp->add_flag("--no-focal-marker", no_marker, "Omit the focal transfer line");
  bp->add_option("--out", out_path, "Prompt file (stdout when omitted)");

  // eval
  auto* ev = app.add_subcommand("eval", "Run the evaluation harness");
  std::string source = "synthetic";
  std::size_t n_pos = 1000, n_neg = 1000, resamples = 1000;
  std::optional<std::uint64_t> eval_seed;
  std::optional<std::string> outcome_log;
  bool offline = false;
  unsigned parallelism = 4;
  ExtractFlags ef;
  ev->add_option("--source", source, "synthetic or dataset")->check(CLI::IsMember({"synthetic", "dataset"}));
  ev->add_option("--graph", graph_path, "Graph cache (dataset source)");
  ev->add_option("--n-pos", n_pos, "Laundering cases");
  ev->add_option("--n-neg", n_neg, "Clean cases");
  ef.add(ev);
  ev->add_option("--seed", eval_seed, "Seed for sampling, demos and bootstrap");
  ev->add_flag("--offline", offline, "Use the detector-backed stub instead of a remote model");
  ev->add_option("--parallelism", parallelism, "Cases in flight");
  ev->add_option("--resamples", resamples, "Bootstrap resamples");
  ev->add_option("--outcome-log", outcome_log, "Resumable per-case log (NDJSON)");
  ev->add_option("--texts-dir", texts_dir, "Directory overriding the built-in prompt texts");
  ev->add_option("--out", out_path, "Report JSON")->required();

  // report
  auto* rep = app.add_subcommand("report", "Render a report as tables");
  std::string report_in, format = "text";
  rep->add_option("--in", report_in, "Report JSON")->required();
  rep->add_option("--format", format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ingest) {
      const TransactionGraph g = load_csv(in_csv, CsvSchema::resolve(schema),
                                          patterns_path ? std::optional<std::filesystem::path>(*patterns_path)
                                                        : std::nullopt);
      save_graph_cache(g, out_path);
      const GraphStats s = graph_stats(g);
      std::cerr << "accounts " << s.accounts << ", banks " << s.banks << ", edges " << s.edges
                << ", laundering " << s.laundering_edges << "\n";
    } else if (*extract) {
      const TransactionGraph g = load_graph_cache(graph_path);
      emit(out_path, subgraph_to_json(extract_khop(g, edge, xf.config())).dump(2) + "\n");
    } else if (*ser) {
      emit(out_path, serialize(load_subgraph(sub_path), SerializeOptions{focal_marker}));
    } else if (*pv) {
      const VerdictResult v = parse_verdict(read_input(completion_path));
      if (const auto* err = std::get_if<VerdictError>(&v)) throw ParseError("verdict: " + err->message);
      emit(out_path, verdict_to_json(std::get<Verdict>(v)).dump(2) + "\n");
    } else if (*synth) {
      if (csv_out) {
        csv_cfg.seed = seed;
        const SynthCsvResult r = write_synth_csv(
            csv_cfg, *csv_out,
            patterns_path ? std::optional<std::filesystem::path>(*patterns_path) : std::nullopt);
        std::cerr << "rows " << r.rows << ", laundering " << r.laundering_rows << " in " << r.attempts
                  << " attempts, accounts " << r.accounts << ", banks " << r.banks << "\n";
      } else if (kind_name == "benign") {
        BenignParams p;
        p.seed = seed;
        emit(out_path, subgraph_to_json(generate_benign(p)).dump(2) + "\n");
      } else {
        gen.kind = kind_arg(kind_name);
        gen.seed = seed;
        emit(out_path, subgraph_to_json(generate(gen)).dump(2) + "\n");
      }
    } else if (*det) {
      const Subgraph sub = load_subgraph(sub_path);
      const auto matches = detect(sub, detector_config(det_pairs));
      emit(out_path, matches_to_json(matches).dump(2) + "\n");
    } else if (*bp) {
      const Subgraph test = load_subgraph(sub_path);
      const PromptTexts texts = texts_dir ? PromptTexts::from_dir(*texts_dir) : PromptTexts::embedded();
      pcfg.header = texts.get("header");
      pcfg.task = texts.get("task");
      pcfg.answer_format = texts.get("answer_format");
      pcfg.demo_seed = prompt_seed;
      pcfg.focal_marker = !no_marker;
      const DemoSet demos = demo_graph ? demos_from_graph(load_graph_cache(*demo_graph), prompt_seed,
                                                          ExtractionConfig{}, texts, pcfg.n_benign)
                                       : default_demos(prompt_seed, texts, pcfg.n_benign);
      emit(out_path, build_prompt(demos, test, pcfg).text);
    } else if (*ev) {
      if (offline && !eval_seed) throw UsageError("--offline requires --seed");
      if (source == "dataset" && graph_path.empty()) throw UsageError("--source dataset requires --graph");
      const std::uint64_t s = eval_seed.value_or(0);
      const ExtractionConfig xc = ef.config();

      std::vector<TestCase> cases;
      if (source == "synthetic") {
        cases = build_synthetic_set(n_pos, n_neg, xc, s);
      } else {
        const TransactionGraph g = load_graph_cache(graph_path);
        cases = build_dataset_set(g, n_pos, n_neg, xc, s);
        if (!g.has_pattern_labels()) {
          for (TestCase& c : cases) c.truth_patterns.clear();
        }
      }

      const PromptTexts texts = texts_dir ? PromptTexts::from_dir(*texts_dir) : PromptTexts::embedded();
      EvalOptions opts;
      opts.prompt.header = texts.get("header");
      opts.prompt.task = texts.get("task");
      opts.prompt.answer_format = texts.get("answer_format");
      opts.prompt.demo_seed = derive_seed(s, 1);
      opts.n_resamples = resamples;
      opts.bootstrap_seed = derive_seed(s, 2);
      opts.parallelism = parallelism;
      if (outcome_log) opts.outcome_log = *outcome_log;
      const DemoSet demos = default_demos(opts.prompt.demo_seed, texts, opts.prompt.n_benign);

      opts.config = Json::object();
      opts.config["source"] = source;
      opts.config["n_pos"] = n_pos;
      opts.config["n_neg"] = n_neg;
      opts.config["k"] = xc.k;
      opts.config["max_nodes"] = xf.uncapped || ef.uncapped ? Json(nullptr) : Json(xc.max_nodes);
      opts.config["seed"] = s;

      Completer complete;
      std::optional<LlmClient> client;
      if (offline) {
        opts.config["mode"] = "offline";
        complete = [](const PromptBundle& p) { return stub_complete(p); };
      } else {
        LlmConfig lc = LlmConfig::from_env();
        lc.max_concurrency = std::max(1u, parallelism);
        if (lc.api_key.empty()) std::cerr << "warning: LLM_API_KEY is not set\n";
        opts.config["mode"] = "remote";
        opts.config["model"] = lc.model;
        opts.config["base_url"] = lc.base_url;
        client.emplace(lc, make_http_transport(), LlmClient::Sleeper{}, s);
        complete = [&client](const PromptBundle& p) { return client->complete(p); };
      }
      const EvalReport r = run_eval(cases, demos, complete, opts);
      write_json_file(out_path, report_to_json(r));
      std::cerr << "cases " << r.n_cases << ", parsed " << r.counts.total() << ", errors " << r.error_count << "\n";
    } else if (*rep) {
      const EvalReport r = report_from_json(read_json_file(report_in));
      std::cout << render(r, report_format_from_string(format));
    }
  } catch (const UsageError& e) {
    std::cerr << "amlctl: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "amlctl: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
