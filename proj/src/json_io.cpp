#include "aml/json_io.hpp"

#include "aml/errors.hpp"
#include "aml/graph.hpp"

namespace aml {

namespace {

[[noreturn]] void bad(const std::string& what) { throw ParseError("json: " + what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) bad(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

std::string str(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

template <class T>
T num(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
  return v.get<T>();
}

bool boolean(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_boolean()) bad(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

PatternKind kind_from(const Json& v) {
  if (!v.is_string()) bad("pattern must be a string");
  const auto k = pattern_from_name(v.get<std::string>());
  if (!k) bad("unknown pattern '" + v.get<std::string>() + "'");
  return *k;
}

Json kinds_to_json(std::span<const PatternKind> kinds) {
  Json a = Json::array();
  for (PatternKind k : kinds) a.push_back(pattern_name(k));
  return a;
}

std::vector<PatternKind> kinds_from(const Json& a) {
  if (!a.is_array()) bad("pattern list must be an array");
  std::vector<PatternKind> out;
  for (const Json& v : a) out.push_back(kind_from(v));
  return out;
}

Json money_to_json(const Money& m) { return Json{{"amount", m.amount_str()}, {"currency", m.currency}}; }

Money money_from(const Json& j) {
  const auto cents = Money::try_parse_cents(str(j, "amount"));
  if (!cents) bad("bad amount '" + str(j, "amount") + "'");
  return Money{*cents, str(j, "currency")};
}

Timestamp time_from(const std::string& s) {
  const auto t = Timestamp::try_parse(s);
  if (!t) bad("bad timestamp '" + s + "'");
  return *t;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_number_from(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) bad(std::string("field '") + key + "' must be a number or null");
  return v.get<double>();
}

}  // namespace

Json edge_to_json(const TransferEdge& e) {
  Json j;
  j["id"] = e.id;
  j["source"] = e.source.value;
  j["dest"] = e.dest.value;
  j["paid"] = money_to_json(e.paid);
  j["received"] = money_to_json(e.received);
  j["payment_format"] = e.payment_format;
  j["timestamp"] = e.timestamp.str();
  if (e.is_laundering) j["is_laundering"] = *e.is_laundering;
  if (e.pattern_label) j["pattern"] = pattern_name(*e.pattern_label);
  return j;
}

TransferEdge edge_from_json(const Json& j) {
  TransferEdge e;
  e.id = num<EdgeId>(j, "id");
  e.source = AccountId{str(j, "source")};
  e.dest = AccountId{str(j, "dest")};
  e.paid = money_from(field(j, "paid"));
  e.received = j.contains("received") ? money_from(j["received"]) : e.paid;
  e.payment_format = str(j, "payment_format");
  e.timestamp = time_from(str(j, "timestamp"));
  if (j.contains("is_laundering")) e.is_laundering = boolean(j, "is_laundering");
  if (j.contains("pattern")) e.pattern_label = kind_from(j["pattern"]);
  return e;
}

Json subgraph_to_json(const Subgraph& s) {
  Json j;
  j["schema"] = kSubgraphSchema;
  j["focal_edge"] = edge_to_json(s.focal_edge);
  Json accounts = Json::array();
  for (const AccountNode& a : s.accounts) {
    Json ja;
    ja["id"] = a.id.value;
    if (a.bank) ja["bank"] = a.bank->value;
    ja["entity_type"] = to_string(a.entity_type);
    if (a.creation_date) ja["creation_date"] = a.creation_date->str();
    accounts.push_back(std::move(ja));
  }
  j["accounts"] = std::move(accounts);
  Json banks = Json::array();
  for (const BankId& b : s.banks) banks.push_back(b.value);
  j["banks"] = std::move(banks);
  Json transfers = Json::array();
  for (const TransferEdge& e : s.transfers) transfers.push_back(edge_to_json(e));
  j["transfers"] = std::move(transfers);
  if (s.truth) {
    j["truth"] = Json{{"is_laundering", s.truth->is_laundering}, {"patterns", kinds_to_json(s.truth->patterns)}};
  }
  return j;
}

Subgraph subgraph_from_json(const Json& j) {
  if (j.contains("schema") && j["schema"] != kSubgraphSchema) bad("unsupported subgraph schema");
  Subgraph s;
  s.focal_edge = edge_from_json(field(j, "focal_edge"));
  for (const Json& ja : field(j, "accounts")) {
    AccountNode a;
    a.id = AccountId{str(ja, "id")};
    if (ja.contains("bank")) a.bank = BankId{str(ja, "bank")};
    if (ja.contains("entity_type")) {
      const auto t = entity_type_from_string(str(ja, "entity_type"));
      if (!t) bad("unknown entity_type");
      a.entity_type = *t;
    }
    if (ja.contains("creation_date")) a.creation_date = time_from(str(ja, "creation_date"));
    s.accounts.push_back(std::move(a));
  }
  for (const Json& b : field(j, "banks")) {
    if (!b.is_string()) bad("bank ids must be strings");
    s.banks.emplace_back(b.get<std::string>());
  }
  for (const Json& e : field(j, "transfers")) s.transfers.push_back(edge_from_json(e));
  if (j.contains("truth") && !j["truth"].is_null()) {
    const Json& t = j["truth"];
    s.truth = GroundTruth{boolean(t, "is_laundering"), kinds_from(field(t, "patterns"))};
  }
  canonicalize(s);
  try {
    validate(s);
  } catch (const InvalidArgument& e) {
    bad(e.what());
  }
  return s;
}

Json matches_to_json(std::span<const PatternMatch> matches) {
  Json a = Json::array();
  for (const PatternMatch& m : matches) {
    Json jm;
    jm["kind"] = pattern_name(m.kind);
    Json p = Json::array();
    for (const AccountId& id : m.participants) p.push_back(id.value);
    jm["participants"] = std::move(p);
    jm["evidence"] = m.evidence;
    jm["score"] = m.score;
    a.push_back(std::move(jm));
  }
  return a;
}

Json verdict_to_json(const Verdict& v) {
  Json j;
  j["label"] = to_string(v.label);
  j["explanation"] = v.explanation;
  j["observed_patterns"] = kinds_to_json(v.observed_patterns);
  j["unrecognized_patterns"] = v.unrecognized_patterns;
  return j;
}

Verdict verdict_from_json(const Json& j) {
  Verdict v;
  const std::string label = str(j, "label");
  if (label == "Suspicious") v.label = VerdictLabel::Suspicious;
  else if (label == "Not Suspicious") v.label = VerdictLabel::NotSuspicious;
  else bad("unknown verdict label '" + label + "'");
  v.explanation = str(j, "explanation");
  v.observed_patterns = kinds_from(field(j, "observed_patterns"));
  for (const Json& s : field(j, "unrecognized_patterns")) v.unrecognized_patterns.push_back(s.get<std::string>());
  return v;
}

Json outcome_to_json(const Outcome& o) {
  Json j;
  j["case_id"] = o.case_id;
  j["truth_label"] = o.truth_label;
  j["truth_patterns"] = kinds_to_json(o.truth_patterns);
  j["subgraph_fingerprint"] = o.subgraph_fingerprint;
  j["verdict"] = o.verdict ? verdict_to_json(*o.verdict) : Json(nullptr);
  j["raw_text"] = o.raw_text;
  j["latency_ms"] = o.latency_ms;
  j["attempts"] = o.attempts;
  if (o.usage) {
    j["usage"] = Json{{"prompt", o.usage->prompt}, {"completion", o.usage->completion}, {"total", o.usage->total}};
  }
  j["error"] = o.error ? Json(*o.error) : Json(nullptr);
  return j;
}

Outcome outcome_from_json(const Json& j) {
  Outcome o;
  o.case_id = num<std::size_t>(j, "case_id");
  o.truth_label = boolean(j, "truth_label");
  o.truth_patterns = kinds_from(field(j, "truth_patterns"));
  o.subgraph_fingerprint = num<std::uint64_t>(j, "subgraph_fingerprint");
  if (!field(j, "verdict").is_null()) o.verdict = verdict_from_json(j["verdict"]);
  o.raw_text = str(j, "raw_text");
  o.latency_ms = num<std::int64_t>(j, "latency_ms");
  o.attempts = num<unsigned>(j, "attempts");
  if (j.contains("usage")) {
    const Json& u = j["usage"];
    o.usage = TokenUsage{num<std::int64_t>(u, "prompt"), num<std::int64_t>(u, "completion"),
                         num<std::int64_t>(u, "total")};
  }
  if (!field(j, "error").is_null()) o.error = str(j, "error");
  return o;
}

Json bootstrap_to_json(const BootstrapResult& b) {
  Json j;
  j["point"] = optional_number(b.point);
  j["mean"] = b.mean;
  j["ci_low"] = b.ci_low;
  j["ci_high"] = b.ci_high;
  j["half_width"] = b.half_width;
  j["n_resamples"] = b.n_resamples;
  j["n_valid"] = b.n_valid;
  j["seed"] = b.seed;
  return j;
}

BootstrapResult bootstrap_from_json(const Json& j) {
  BootstrapResult b;
  b.point = optional_number_from(j, "point");
  b.mean = num<double>(j, "mean");
  b.ci_low = num<double>(j, "ci_low");
  b.ci_high = num<double>(j, "ci_high");
  b.half_width = num<double>(j, "half_width");
  b.n_resamples = num<std::size_t>(j, "n_resamples");
  b.n_valid = num<std::size_t>(j, "n_valid");
  b.seed = num<std::uint64_t>(j, "seed");
  return b;
}

Json report_to_json(const EvalReport& r) {
  Json j;
  j["schema"] = EvalReport::kSchema;
  j["config"] = r.config;
  j["counts"] = Json{{"cases", r.n_cases},
                     {"error_count", r.error_count},
                     {"tp", r.counts.tp},
                     {"fp", r.counts.fp},
                     {"fn", r.counts.fn},
                     {"tn", r.counts.tn}};
  Json cls = Json::object();
  for (const std::string_view name : {"accuracy", "precision", "recall", "f1"}) {
    const auto it = r.classification.find(std::string(name));
    if (it == r.classification.end()) continue;
    cls[std::string(name)] = Json{{"value", it->second.value},
                                  {"undefined", it->second.undefined},
                                  {"bootstrap", bootstrap_to_json(it->second.ci)}};
  }
  j["classification"] = std::move(cls);
  Json pp = Json::object();
  for (const auto& [kind, p] : r.per_pattern) {
    pp[std::string(pattern_name(kind))] = Json{{"mentions", p.score.mentions},
                                               {"correct", p.score.correct},
                                               {"truth", p.score.truth},
                                               {"precision", optional_number(p.score.precision)},
                                               {"recall", optional_number(p.score.recall)},
                                               {"precision_bootstrap", bootstrap_to_json(p.precision_ci)},
                                               {"recall_bootstrap", bootstrap_to_json(p.recall_ci)}};
  }
  j["per_pattern"] = std::move(pp);
  j["hallucinated_mentions"] = r.hallucinated_mentions;
  j["pattern_truth_available"] = r.pattern_truth_available;
  j["run"] = r.run;
  return j;
}

EvalReport report_from_json(const Json& j) {
  if (!j.contains("schema") || j["schema"] != EvalReport::kSchema) bad("not an evaluation report");
  EvalReport r;
  r.config = field(j, "config");
  const Json& c = field(j, "counts");
  r.n_cases = num<std::size_t>(c, "cases");
  r.error_count = num<std::size_t>(c, "error_count");
  r.counts = ConfusionCounts{num<std::size_t>(c, "tp"), num<std::size_t>(c, "fp"), num<std::size_t>(c, "fn"),
                             num<std::size_t>(c, "tn")};
  for (const auto& [name, m] : field(j, "classification").items()) {
    r.classification[name] =
        MetricReport{num<double>(m, "value"), boolean(m, "undefined"), bootstrap_from_json(field(m, "bootstrap"))};
  }
  for (const auto& [name, p] : field(j, "per_pattern").items()) {
    const auto kind = pattern_from_name(name);
    if (!kind) bad("unknown pattern '" + name + "'");
    PatternReport pr;
    pr.score.mentions = num<std::size_t>(p, "mentions");
    pr.score.correct = num<std::size_t>(p, "correct");
    pr.score.truth = num<std::size_t>(p, "truth");
    pr.score.precision = optional_number_from(p, "precision");
    pr.score.recall = optional_number_from(p, "recall");
    pr.precision_ci = bootstrap_from_json(field(p, "precision_bootstrap"));
    pr.recall_ci = bootstrap_from_json(field(p, "recall_bootstrap"));
    r.per_pattern[*kind] = pr;
  }
  r.hallucinated_mentions = num<std::size_t>(j, "hallucinated_mentions");
  r.pattern_truth_available = boolean(j, "pattern_truth_available");
  if (j.contains("run")) r.run = j["run"];
  return r;
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(path.string() + " is not valid JSON");
  return j;
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

}  // namespace aml
