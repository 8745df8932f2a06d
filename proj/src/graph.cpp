#include "aml/graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "aml/csv.hpp"
#include "aml/errors.hpp"

namespace aml {

// ---------------------------------------------------------------- schema

CsvSchema CsvSchema::ibm() { return CsvSchema{}; }

CsvSchema CsvSchema::named(std::string_view name) {
  if (name == "ibm") return ibm();
  if (name == "ibm-pandas") {
    CsvSchema s;
    s.name = "ibm-pandas";
    s.to_account = "Account.1";
    return s;
  }
  throw InvalidArgument("unknown CSV schema '" + std::string(name) + "'");
}

CsvSchema CsvSchema::from_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  CsvSchema s;
  s.name = path.filename().string();
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
    const std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "timestamp") s.timestamp = value;
    else if (key == "from_bank") s.from_bank = value;
    else if (key == "from_account") s.from_account = value;
    else if (key == "to_bank") s.to_bank = value;
    else if (key == "to_account") s.to_account = value;
    else if (key == "amount_received") s.amount_received = value;
    else if (key == "receiving_currency") s.receiving_currency = value;
    else if (key == "amount_paid") s.amount_paid = value;
    else if (key == "payment_currency") s.payment_currency = value;
    else if (key == "payment_format") s.payment_format = value;
    else if (key == "is_laundering") {
      if (value.empty()) s.is_laundering.reset();
      else s.is_laundering = value;
    } else {
      throw ParseError("unknown schema key '" + key + "'", lineno);
    }
  }
  return s;
}

CsvSchema CsvSchema::resolve(std::string_view name_or_path) {
  if (name_or_path == "ibm" || name_or_path == "ibm-pandas") return named(name_or_path);
  return from_file(std::filesystem::path(name_or_path));
}

// ---------------------------------------------------------------- graph

std::optional<AccountIndex> TransactionGraph::find_account(const AccountId& id) const {
  const auto it = account_lookup_.find(id.value);
  if (it == account_lookup_.end()) return std::nullopt;
  return it->second;
}

AccountIndex TransactionGraph::index_of(const AccountId& id) const {
  if (auto i = find_account(id)) return *i;
  throw NotFound("unknown account '" + id.value + "'");
}

TransferEdge TransactionGraph::edge(EdgeId id) const {
  if (id >= edges_.size()) throw NotFound("unknown edge id " + std::to_string(id));
  const EdgeRecord& r = edges_[id];
  TransferEdge e;
  e.id = id;
  e.source = accounts_[r.source].id;
  e.dest = accounts_[r.dest].id;
  e.paid = Money{r.paid_cents, currencies_[r.paid_currency]};
  e.received = Money{r.received_cents, currencies_[r.received_currency]};
  e.payment_format = formats_[r.payment_format];
  e.timestamp = Timestamp{r.timestamp};
  if (r.laundering >= 0) e.is_laundering = r.laundering == 1;
  if (r.pattern != EdgeRecord::kNoLabel) e.pattern_label = static_cast<PatternKind>(r.pattern);
  return e;
}

void TransactionGraph::build_indexes() {
  const std::size_t n = accounts_.size();
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const EdgeRecord& r : edges_) {
    ++out_offsets_[r.source + 1];
    ++in_offsets_[r.dest + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_ids_.assign(edges_.size(), 0);
  in_ids_.assign(edges_.size(), 0);
  std::vector<std::uint64_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::uint64_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (EdgeId id = 0; id < edges_.size(); ++id) {
    out_ids_[out_fill[edges_[id].source]++] = id;
    in_ids_[in_fill[edges_[id].dest]++] = id;
  }
  // ids are inserted ascending, so a stable sort on timestamp yields
  // (timestamp, id) order
  const auto by_time = [this](EdgeId a, EdgeId b) {
    return edges_[a].timestamp < edges_[b].timestamp;
  };
  for (std::size_t a = 0; a < n; ++a) {
    std::stable_sort(out_ids_.begin() + static_cast<std::ptrdiff_t>(out_offsets_[a]),
                     out_ids_.begin() + static_cast<std::ptrdiff_t>(out_offsets_[a + 1]), by_time);
    std::stable_sort(in_ids_.begin() + static_cast<std::ptrdiff_t>(in_offsets_[a]),
                     in_ids_.begin() + static_cast<std::ptrdiff_t>(in_offsets_[a + 1]), by_time);
  }
  has_pattern_labels_ = std::any_of(edges_.begin(), edges_.end(), [](const EdgeRecord& r) {
    return r.pattern != EdgeRecord::kNoLabel;
  });
}

// ---------------------------------------------------------------- builder

std::uint16_t GraphBuilder::intern(std::vector<std::string>& table,
                                   std::unordered_map<std::string, std::uint16_t>& lookup,
                                   std::string_view s) {
  const auto it = lookup.find(std::string(s));
  if (it != lookup.end()) return it->second;
  if (table.size() >= 0xFFFF) throw InvalidArgument("too many distinct strings in a string table");
  const auto idx = static_cast<std::uint16_t>(table.size());
  table.emplace_back(s);
  lookup.emplace(std::string(s), idx);
  return idx;
}

AccountIndex GraphBuilder::add_account(const AccountId& id, const BankId& bank,
                                       EntityType entity_type,
                                       std::optional<Timestamp> creation_date) {
  if (id.empty()) throw InvalidArgument("empty account id");
  if (bank.empty()) throw InvalidArgument("empty bank id for account '" + id.value + "'");
  const auto it = graph_.account_lookup_.find(id.value);
  if (it != graph_.account_lookup_.end()) {
    const AccountNode& existing = graph_.accounts_[it->second];
    if (existing.bank != bank) {
      throw InvalidArgument("account '" + id.value + "' seen at both '" + existing.bank->value +
                            "' and '" + bank.value + "'");
    }
    return it->second;
  }
  if (!bank_lookup_.contains(bank.value)) {
    bank_lookup_.emplace(bank.value, 0);
    graph_.banks_.push_back(bank);
  }
  const auto idx = static_cast<AccountIndex>(graph_.accounts_.size());
  graph_.accounts_.push_back(AccountNode{id, bank, entity_type, creation_date});
  graph_.account_lookup_.emplace(id.value, idx);
  pending_out_.emplace_back();
  return idx;
}

EdgeId GraphBuilder::add_transfer(const Transfer& t) {
  if (t.source >= graph_.accounts_.size() || t.dest >= graph_.accounts_.size()) {
    throw InvalidArgument("transfer endpoint is not a registered account");
  }
  if (t.paid_cents < 0 || t.received_cents < 0) throw InvalidArgument("negative amount");
  if (t.paid_currency.empty() || t.received_currency.empty()) {
    throw InvalidArgument("empty currency");
  }
  EdgeRecord r;
  r.timestamp = t.timestamp.minutes;
  r.paid_cents = t.paid_cents;
  r.received_cents = t.received_cents;
  r.source = t.source;
  r.dest = t.dest;
  r.paid_currency = intern(graph_.currencies_, currency_lookup_, t.paid_currency);
  r.received_currency = intern(graph_.currencies_, currency_lookup_, t.received_currency);
  r.payment_format = intern(graph_.formats_, format_lookup_, t.payment_format);
  if (t.is_laundering) r.laundering = *t.is_laundering ? 1 : 0;
  if (t.pattern) r.pattern = static_cast<std::uint8_t>(*t.pattern);
  const auto id = static_cast<EdgeId>(graph_.edges_.size());
  graph_.edges_.push_back(r);
  pending_out_[t.source].push_back(id);
  return id;
}

void GraphBuilder::set_pattern_label(EdgeId id, PatternKind kind) {
  graph_.edges_.at(id).pattern = static_cast<std::uint8_t>(kind);
}

std::span<const EdgeId> GraphBuilder::pending_out(AccountIndex a) const {
  return pending_out_.at(a);
}

TransactionGraph GraphBuilder::build() && {
  graph_.build_indexes();
  pending_out_.clear();
  return std::move(graph_);
}

// ---------------------------------------------------------------- csv ingest

std::optional<PatternKind> pattern_from_ibm_heading(std::string_view heading) {
  std::string h;
  for (char c : heading) {
    if (c == ':') break;
    h.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  while (!h.empty() && h.back() == ' ') h.pop_back();
  if (h == "FAN-OUT") return PatternKind::FanOut;
  if (h == "FAN-IN") return PatternKind::FanIn;
  if (h == "GATHER-SCATTER") return PatternKind::GatherScatter;
  if (h == "SCATTER-GATHER") return PatternKind::ScatterGather;
  if (h == "CYCLE" || h == "SIMPLE-CYCLE") return PatternKind::SimpleCycle;
  if (h == "RANDOM") return PatternKind::Random;
  if (h == "BIPARTITE") return PatternKind::Bipartite;
  if (h == "STACK") return PatternKind::Stack;
  return std::nullopt;
}

namespace {

struct ColumnMap {
  std::size_t timestamp, from_bank, from_account, to_bank, to_account, amount_received,
      receiving_currency, amount_paid, payment_currency, payment_format;
  std::optional<std::size_t> is_laundering;
  std::size_t width = 0;
};

ColumnMap resolve_columns(const std::vector<std::string>& header, const CsvSchema& s) {
  std::vector<bool> used(header.size(), false);
  const auto take = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (!used[i] && header[i] == name) {
        used[i] = true;
        return i;
      }
    }
    throw ParseError("header does not match schema '" + s.name + "': missing column '" + name + "'", 1);
  };
  ColumnMap m{};
  m.timestamp = take(s.timestamp);
  m.from_bank = take(s.from_bank);
  m.from_account = take(s.from_account);
  m.to_bank = take(s.to_bank);
  m.to_account = take(s.to_account);
  m.amount_received = take(s.amount_received);
  m.receiving_currency = take(s.receiving_currency);
  m.amount_paid = take(s.amount_paid);
  m.payment_currency = take(s.payment_currency);
  m.payment_format = take(s.payment_format);
  if (s.is_laundering) m.is_laundering = take(*s.is_laundering);
  m.width = header.size();
  return m;
}

struct ParsedRow {
  Timestamp ts;
  const std::string* from_bank;
  const std::string* from_account;
  const std::string* to_bank;
  const std::string* to_account;
  std::int64_t received;
  std::int64_t paid;
  std::optional<bool> laundering;
};

ParsedRow parse_row(const std::vector<std::string>& f, const ColumnMap& m, std::size_t line) {
  if (f.size() != m.width) {
    throw ParseError("expected " + std::to_string(m.width) + " fields, found " +
                         std::to_string(f.size()),
                     line);
  }
  ParsedRow r{};
  const auto ts = Timestamp::try_parse(f[m.timestamp]);
  if (!ts) throw ParseError("invalid timestamp '" + f[m.timestamp] + "'", line);
  r.ts = *ts;
  r.from_bank = &f[m.from_bank];
  r.from_account = &f[m.from_account];
  r.to_bank = &f[m.to_bank];
  r.to_account = &f[m.to_account];
  if (r.from_bank->empty() || r.from_account->empty() || r.to_bank->empty() ||
      r.to_account->empty()) {
    throw ParseError("empty bank or account field", line);
  }
  const auto received = Money::try_parse_cents(f[m.amount_received]);
  if (!received) throw ParseError("invalid amount '" + f[m.amount_received] + "'", line);
  const auto paid = Money::try_parse_cents(f[m.amount_paid]);
  if (!paid) throw ParseError("invalid amount '" + f[m.amount_paid] + "'", line);
  r.received = *received;
  r.paid = *paid;
  if (f[m.receiving_currency].empty() || f[m.payment_currency].empty()) {
    throw ParseError("empty currency", line);
  }
  if (m.is_laundering) {
    const std::string& v = f[*m.is_laundering];
    if (v == "1") r.laundering = true;
    else if (v == "0") r.laundering = false;
    else if (!v.empty()) throw ParseError("invalid laundering flag '" + v + "'", line);
  }
  return r;
}

void apply_pattern_file(GraphBuilder& builder, std::string_view text, const ColumnMap& m) {
  PatternKind current = PatternKind::None;
  bool in_block = false;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  std::vector<std::string> fields;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    constexpr std::string_view kBegin = "BEGIN LAUNDERING ATTEMPT - ";
    constexpr std::string_view kEnd = "END LAUNDERING ATTEMPT";
    if (line.starts_with(kBegin)) {
      const auto kind = pattern_from_ibm_heading(line.substr(kBegin.size()));
      if (!kind) {
        throw ParseError("unknown laundering attempt type '" + std::string(line.substr(kBegin.size())) + "'",
                         lineno);
      }
      current = *kind;
      in_block = true;
      continue;
    }
    if (line.starts_with(kEnd)) {
      in_block = false;
      continue;
    }
    if (!in_block) throw ParseError("transaction row outside a laundering attempt block", lineno);
    CsvReader reader(line);
    reader.next(fields);
    // the attempt file has the same columns as the transaction file
    const ParsedRow row = parse_row(fields, m, lineno);
    const auto src = builder.find_account(account_id_from_raw(*row.from_account));
    const auto dst = builder.find_account(account_id_from_raw(*row.to_account));
    bool matched = false;
    if (src && dst) {
      for (EdgeId id : builder.pending_out(*src)) {
        const EdgeRecord& r = builder.record(id);
        if (r.dest == *dst && r.timestamp == row.ts.minutes && r.paid_cents == row.paid &&
            r.pattern == EdgeRecord::kNoLabel) {
          builder.set_pattern_label(id, current);
          matched = true;
          break;
        }
      }
    }
    if (!matched) {
      throw ParseError("laundering attempt row does not match any loaded transaction", lineno);
    }
  }
}

}  // namespace

TransactionGraph load_csv_text(std::string_view csv, const CsvSchema& schema,
                               std::optional<std::string_view> patterns) {
  CsvReader reader(csv);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError("missing header row", 1);
  if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
  const ColumnMap m = resolve_columns(fields, schema);

  GraphBuilder builder;
  while (reader.next(fields)) {
    const std::size_t line = reader.line();
    const ParsedRow row = parse_row(fields, m, line);
    try {
      const AccountIndex src =
          builder.add_account(account_id_from_raw(*row.from_account), bank_id_from_raw(*row.from_bank));
      const AccountIndex dst =
          builder.add_account(account_id_from_raw(*row.to_account), bank_id_from_raw(*row.to_bank));
      GraphBuilder::Transfer t;
      t.source = src;
      t.dest = dst;
      t.paid_cents = row.paid;
      t.paid_currency = fields[m.payment_currency];
      t.received_cents = row.received;
      t.received_currency = fields[m.receiving_currency];
      t.payment_format = fields[m.payment_format];
      t.timestamp = row.ts;
      t.is_laundering = row.laundering;
      builder.add_transfer(t);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line);
    }
  }
  if (patterns) apply_pattern_file(builder, *patterns, m);
  return std::move(builder).build();
}

TransactionGraph load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                          const std::optional<std::filesystem::path>& patterns) {
  const std::string text = read_file(path);
  if (patterns) {
    const std::string ptext = read_file(*patterns);
    return load_csv_text(text, schema, std::string_view(ptext));
  }
  return load_csv_text(text, schema);
}

// ---------------------------------------------------------------- queries

std::span<const EdgeId> window_slice(const TransactionGraph& g, std::span<const EdgeId> index,
                                     const TimeWindow& window) {
  const auto lo = std::partition_point(index.begin(), index.end(), [&](EdgeId id) {
    return g.record(id).timestamp < window.begin.minutes;
  });
  const auto hi = std::partition_point(lo, index.end(), [&](EdgeId id) {
    return g.record(id).timestamp <= window.end.minutes;
  });
  return {lo, hi};
}

namespace {

std::vector<TransferEdge> materialize(const TransactionGraph& g, std::span<const EdgeId> ids,
                                      const std::optional<TimeWindow>& window) {
  const auto slice = window ? window_slice(g, ids, *window) : ids;
  std::vector<TransferEdge> out;
  out.reserve(slice.size());
  for (EdgeId id : slice) out.push_back(g.edge(id));
  return out;
}

}  // namespace

std::vector<TransferEdge> out_edges(const TransactionGraph& g, const AccountId& account,
                                    std::optional<TimeWindow> window) {
  return materialize(g, g.out_index(g.index_of(account)), window);
}

std::vector<TransferEdge> in_edges(const TransactionGraph& g, const AccountId& account,
                                   std::optional<TimeWindow> window) {
  return materialize(g, g.in_index(g.index_of(account)), window);
}

GraphStats graph_stats(const TransactionGraph& g) {
  GraphStats s;
  s.accounts = g.account_count();
  s.banks = g.bank_count();
  s.edges = g.edge_count();
  for (const EdgeRecord& r : g.records()) {
    if (!s.first || r.timestamp < s.first->minutes) s.first = Timestamp{r.timestamp};
    if (!s.last || r.timestamp > s.last->minutes) s.last = Timestamp{r.timestamp};
    if (r.laundering == 1) ++s.laundering_edges;
  }
  return s;
}

// ---------------------------------------------------------------- files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace aml
