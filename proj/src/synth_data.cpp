#include "aml/synth_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <array>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "aml/errors.hpp"
#include "aml/graph.hpp"
#include "aml/rng.hpp"
#include "aml/typology.hpp"

namespace aml {

void SynthCsvConfig::validate() const {
  if (rows == 0) throw InvalidArgument("rows must be positive");
  if (!(laundering_fraction >= 0.0 && laundering_fraction <= 1.0)) {
    throw InvalidArgument("laundering_fraction must lie in [0, 1]");
  }
  if (n_banks == 0) throw InvalidArgument("n_banks must be positive");
  if (n_accounts == 1) throw InvalidArgument("need at least two accounts");
}

namespace {

constexpr std::array<std::string_view, 5> kCurrencies{"US Dollar", "Euro", "UK Pound", "Yuan", "Rupee"};
constexpr std::array<std::string_view, 7> kFormats{"ACH",  "Cheque",       "Credit Card", "Wire",
                                                  "Cash", "Reinvestment", "Bitcoin"};

// Rows outlive the generated subgraphs, so strings must point at static storage.
std::string_view static_format(const std::string& f) {
  for (std::string_view s : kFormats) {
    if (s == f) return s;
  }
  throw InvalidArgument("unexpected payment format " + f);
}

struct Row {
  std::int64_t ts = 0;
  std::uint32_t from_bank = 0, to_bank = 0;
  std::uint64_t from = 0, to = 0;
  std::int64_t cents = 0;
  std::string_view currency;
  std::string_view format;
  std::int32_t attempt = -1;  // index into attempts, -1 for background
  PatternKind kind = PatternKind::None;
};

// Background accounts use 8xxxxxxxx, attempt accounts 9xxxxxxxx.
constexpr std::uint64_t kBackgroundBase = 0x800000000ULL;
constexpr std::uint64_t kAttemptBase = 0x900000000ULL;

void append_row(std::string& out, const Row& r) {
  const std::string ts = Timestamp{r.ts}.str();
  const std::string amount = Money::format_cents(r.cents);
  char buf[320];
  const int n = std::snprintf(buf, sizeof buf, "%s,%u,%09llX,%u,%09llX,%s,%.*s,%s,%.*s,%.*s,%d\n", ts.c_str(),
                              r.from_bank, static_cast<unsigned long long>(r.from), r.to_bank,
                              static_cast<unsigned long long>(r.to), amount.c_str(),
                              static_cast<int>(r.currency.size()), r.currency.data(), amount.c_str(),
                              static_cast<int>(r.currency.size()), r.currency.data(),
                              static_cast<int>(r.format.size()), r.format.data(), r.attempt >= 0 ? 1 : 0);
  out.append(buf, static_cast<std::size_t>(n));
}

std::string ibm_heading(PatternKind k) {
  if (k == PatternKind::SimpleCycle) return "CYCLE";
  std::string h(pattern_name(k));
  for (char& c : h) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return h;
}

}  // namespace

SynthCsvResult synth_csv(const SynthCsvConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t pool = cfg.n_accounts ? cfg.n_accounts : std::max<std::size_t>(16, cfg.rows / 10);
  const std::int64_t start = Timestamp::from_civil(2022, 9, 1).minutes;
  constexpr std::int64_t kSpan = 30 * 1440;

  std::vector<Row> rows;
  rows.reserve(cfg.rows);
  std::vector<PatternKind> attempt_kind;

  const auto target = static_cast<std::size_t>(std::llround(cfg.laundering_fraction * static_cast<double>(cfg.rows)));
  std::uint64_t next_attempt_account = kAttemptBase;
  std::size_t laundering = 0;
  for (std::size_t i = 0; laundering < target; ++i) {
    GenConfig g;
    g.kind = kLaunderingKinds[i % kLaunderingKinds.size()];
    g.amount_base = Money{rng.uniform_int(1'000, 1'000'000) * 100, std::string(kCurrencies[rng.index(2)])};
    g.seed = derive_seed(cfg.seed, i);
    const Subgraph sub = generate(g);
    if (laundering + sub.transfers.size() > cfg.rows) break;
    std::unordered_map<std::string, std::uint64_t> ids;
    std::unordered_map<std::string, std::uint32_t> bank_of;
    for (const AccountNode& a : sub.accounts) {
      ids[a.id.value] = next_attempt_account++;
      // "bank_N" ids from the generator keep their number
      bank_of[a.id.value] = static_cast<std::uint32_t>(std::stoul(a.bank->value.substr(5)));
    }
    const auto attempt = static_cast<std::int32_t>(attempt_kind.size());
    attempt_kind.push_back(g.kind);
    for (const TransferEdge& e : sub.transfers) {
      Row r;
      r.ts = e.timestamp.minutes;
      r.from = ids.at(e.source.value);
      r.to = ids.at(e.dest.value);
      r.from_bank = bank_of.at(e.source.value);
      r.to_bank = bank_of.at(e.dest.value);
      r.cents = e.paid.cents;
      r.currency = e.paid.currency == kCurrencies[0] ? kCurrencies[0] : kCurrencies[1];
      r.format = static_format(e.payment_format);
      r.attempt = attempt;
      r.kind = g.kind;
      rows.push_back(r);
    }
    laundering += sub.transfers.size();
  }

  std::vector<std::uint32_t> home(pool);
  for (auto& b : home) b = static_cast<std::uint32_t>(1 + rng.index(cfg.n_banks));
  while (rows.size() < cfg.rows) {
    Row r;
    const std::size_t a = rng.index(pool);
    std::size_t b = rng.index(pool - 1);
    if (b >= a) ++b;
    r.from = kBackgroundBase + a;
    r.to = kBackgroundBase + b;
    r.from_bank = home[a];
    r.to_bank = home[b];
    r.ts = start + rng.uniform_int(0, kSpan);
    r.cents = rng.uniform_int(100, 2'000'000);
    // mostly dollars, like the public files
    r.currency = rng.bernoulli(0.7) ? kCurrencies[0] : kCurrencies[1 + rng.index(kCurrencies.size() - 1)];
    r.format = kFormats[rng.index(kFormats.size() - 1)];  // no Bitcoin
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.ts < y.ts; });

  SynthCsvResult res;
  res.rows = rows.size();
  res.laundering_rows = laundering;
  res.attempts = attempt_kind.size();
  res.csv.reserve(rows.size() * 110 + 200);
  res.csv +=
      "Timestamp,From Bank,Account,To Bank,Account,Amount Received,Receiving Currency,Amount Paid,"
      "Payment Currency,Payment Format,Is Laundering\n";
  std::unordered_set<std::uint64_t> accounts;
  std::unordered_set<std::uint32_t> banks;
  std::vector<std::string> blocks(attempt_kind.size());
  for (const Row& r : rows) {
    append_row(res.csv, r);
    accounts.insert(r.from);
    accounts.insert(r.to);
    banks.insert(r.from_bank);
    banks.insert(r.to_bank);
    if (r.attempt >= 0) append_row(blocks[static_cast<std::size_t>(r.attempt)], r);
  }
  res.accounts = accounts.size();
  res.banks = banks.size();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string h = ibm_heading(attempt_kind[i]);
    res.patterns += "BEGIN LAUNDERING ATTEMPT - " + h + "\n" + blocks[i] + "END LAUNDERING ATTEMPT - " + h + "\n\n";
  }
  return res;
}

SynthCsvResult write_synth_csv(const SynthCsvConfig& cfg, const std::filesystem::path& csv_path,
                               const std::optional<std::filesystem::path>& patterns_path) {
  SynthCsvResult res = synth_csv(cfg);
  write_file(csv_path, res.csv);
  if (patterns_path) write_file(*patterns_path, res.patterns);
  return res;
}

}  // namespace aml
