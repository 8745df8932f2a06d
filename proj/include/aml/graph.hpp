#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aml/types.hpp"

namespace aml {

/// Column names for each field of a transaction row. Roles are resolved
/// against the header in declaration order; a name that occurs twice in the
/// header (the public IBM files use "Account" for both parties) is matched
/// to its first unused occurrence. Extra header columns are ignored.
struct CsvSchema {
  std::string name = "ibm";
  std::string timestamp = "Timestamp";
  std::string from_bank = "From Bank";
  std::string from_account = "Account";
  std::string to_bank = "To Bank";
  std::string to_account = "Account";
  std::string amount_received = "Amount Received";
  std::string receiving_currency = "Receiving Currency";
  std::string amount_paid = "Amount Paid";
  std::string payment_currency = "Payment Currency";
  std::string payment_format = "Payment Format";
  std::optional<std::string> is_laundering = "Is Laundering";

  /// The layout of the public IBM AML transaction files.
  static CsvSchema ibm();
  /// "ibm", or "ibm-pandas" (second account column renamed "Account.1").
  static CsvSchema named(std::string_view name);
  /// key=value lines, keys as the member names above; unspecified keys keep
  /// the ibm default. `is_laundering=` with an empty value drops the column.
  static CsvSchema from_file(const std::filesystem::path& path);
  /// `named` when the argument is a known schema name, otherwise a file path.
  static CsvSchema resolve(std::string_view name_or_path);
};

/// Compact per-edge storage. Strings are interned in the graph's tables.
struct EdgeRecord {
  std::int64_t timestamp = 0;  // minutes
  std::int64_t paid_cents = 0;
  std::int64_t received_cents = 0;
  AccountIndex source = 0;
  AccountIndex dest = 0;
  std::uint16_t paid_currency = 0;
  std::uint16_t received_currency = 0;
  std::uint16_t payment_format = 0;
  std::int8_t laundering = -1;      // -1 unknown, 0 / 1
  std::uint8_t pattern = kNoLabel;  // PatternKind value or kNoLabel

  static constexpr std::uint8_t kNoLabel = 0xFF;
};

/// Immutable indexed multigraph of accounts, banks and transfers. Per-account
/// out/in edge lists are sorted by (timestamp, edge id). Built by
/// GraphBuilder; safe to share between threads once constructed.
class TransactionGraph {
 public:
  TransactionGraph() = default;

  std::size_t account_count() const noexcept { return accounts_.size(); }
  std::size_t bank_count() const noexcept { return banks_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const AccountNode> accounts() const noexcept { return accounts_; }
  std::span<const BankId> banks() const noexcept { return banks_; }
  std::span<const std::string> currencies() const noexcept { return currencies_; }
  std::span<const std::string> payment_formats() const noexcept { return formats_; }

  const AccountNode& account(AccountIndex i) const { return accounts_.at(i); }
  std::optional<AccountIndex> find_account(const AccountId& id) const;
  /// Throws NotFound for an unknown account.
  AccountIndex index_of(const AccountId& id) const;

  const EdgeRecord& record(EdgeId id) const { return edges_.at(id); }
  std::span<const EdgeRecord> records() const noexcept { return edges_; }
  /// Materializes edge `id`; throws NotFound when out of range.
  TransferEdge edge(EdgeId id) const;

  std::span<const EdgeId> out_index(AccountIndex a) const {
    return {out_ids_.data() + out_offsets_[a], out_ids_.data() + out_offsets_[a + 1]};
  }
  std::span<const EdgeId> in_index(AccountIndex a) const {
    return {in_ids_.data() + in_offsets_[a], in_ids_.data() + in_offsets_[a + 1]};
  }

  /// True when at least one edge carries a typology label.
  bool has_pattern_labels() const noexcept { return has_pattern_labels_; }

 private:
  friend class GraphBuilder;
  friend void save_graph_cache(const TransactionGraph&, const std::filesystem::path&);
  friend TransactionGraph load_graph_cache(const std::filesystem::path&);

  void build_indexes();

  std::vector<AccountNode> accounts_;
  std::unordered_map<std::string, AccountIndex> account_lookup_;
  std::vector<BankId> banks_;
  std::vector<std::string> currencies_;
  std::vector<std::string> formats_;
  std::vector<EdgeRecord> edges_;
  std::vector<std::uint64_t> out_offsets_{0};
  std::vector<EdgeId> out_ids_;
  std::vector<std::uint64_t> in_offsets_{0};
  std::vector<EdgeId> in_ids_;
  bool has_pattern_labels_ = false;
};

/// Accumulates accounts and transfers, then freezes them into a graph.
class GraphBuilder {
 public:
  /// Registers an account on first sighting. A repeated sighting must name
  /// the same bank; throws InvalidArgument otherwise.
  AccountIndex add_account(const AccountId& id, const BankId& bank,
                           EntityType entity_type = EntityType::Unknown,
                           std::optional<Timestamp> creation_date = std::nullopt);

  struct Transfer {
    AccountIndex source = 0;
    AccountIndex dest = 0;
    std::int64_t paid_cents = 0;
    std::string_view paid_currency;
    std::int64_t received_cents = 0;
    std::string_view received_currency;
    std::string_view payment_format;
    Timestamp timestamp;
    std::optional<bool> is_laundering;
    std::optional<PatternKind> pattern;
  };
  EdgeId add_transfer(const Transfer& t);

  void set_pattern_label(EdgeId id, PatternKind kind);

  std::size_t edge_count() const noexcept { return graph_.edges_.size(); }
  std::optional<AccountIndex> find_account(const AccountId& id) const {
    return graph_.find_account(id);
  }
  const EdgeRecord& record(EdgeId id) const { return graph_.edges_.at(id); }

  /// Out-edges of `a` in insertion order (valid until the next add).
  std::span<const EdgeId> pending_out(AccountIndex a) const;

  TransactionGraph build() &&;

 private:
  std::uint16_t intern(std::vector<std::string>& table,
                       std::unordered_map<std::string, std::uint16_t>& lookup,
                       std::string_view s);

  TransactionGraph graph_;
  std::unordered_map<std::string, std::uint16_t> bank_lookup_;
  std::unordered_map<std::string, std::uint16_t> currency_lookup_;
  std::unordered_map<std::string, std::uint16_t> format_lookup_;
  std::vector<std::vector<EdgeId>> pending_out_;
};

/// Account and bank ids are namespaced on ingest.
inline AccountId account_id_from_raw(std::string_view raw) {
  return AccountId{"acct_" + std::string(raw)};
}
inline BankId bank_id_from_raw(std::string_view raw) { return BankId{"bank_" + std::string(raw)}; }

/// Loads a transaction CSV. When `patterns` is given it names an IBM-style
/// laundering-attempt file ("BEGIN LAUNDERING ATTEMPT - FAN-OUT" ... "END
/// ...") whose rows are matched to loaded edges to attach typology labels.
/// Errors carry the 1-based line number of the offending row.
TransactionGraph load_csv(const std::filesystem::path& path, const CsvSchema& schema = CsvSchema::ibm(),
                          const std::optional<std::filesystem::path>& patterns = std::nullopt);

/// Same as load_csv over in-memory text.
TransactionGraph load_csv_text(std::string_view csv, const CsvSchema& schema = CsvSchema::ibm(),
                               std::optional<std::string_view> patterns = std::nullopt);

/// Maps an IBM attempt heading ("FAN-OUT", "CYCLE", ...) to a kind.
std::optional<PatternKind> pattern_from_ibm_heading(std::string_view heading);

/// Edges with source == account (or dest == account for in_edges) and,
/// when a window is given, timestamp inside it; ascending (timestamp, id).
/// Throws NotFound for an unknown account.
std::vector<TransferEdge> out_edges(const TransactionGraph& g, const AccountId& account,
                                    std::optional<TimeWindow> window = std::nullopt);
std::vector<TransferEdge> in_edges(const TransactionGraph& g, const AccountId& account,
                                   std::optional<TimeWindow> window = std::nullopt);

/// Edge ids of an index list restricted to a window, via binary search.
std::span<const EdgeId> window_slice(const TransactionGraph& g, std::span<const EdgeId> index,
                                     const TimeWindow& window);

struct GraphStats {
  std::size_t accounts = 0;
  std::size_t banks = 0;
  std::size_t edges = 0;
  std::optional<Timestamp> first;
  std::optional<Timestamp> last;
  std::size_t laundering_edges = 0;

  bool operator==(const GraphStats&) const = default;
};

GraphStats graph_stats(const TransactionGraph& g);

/// Binary snapshot of a graph; layout documented in docs/formats.md.
void save_graph_cache(const TransactionGraph& g, const std::filesystem::path& path);
TransactionGraph load_graph_cache(const std::filesystem::path& path);

/// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace aml
