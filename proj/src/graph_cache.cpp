#include <cstring>

#include "aml/errors.hpp"
#include "aml/graph.hpp"

namespace aml {

namespace {

constexpr char kMagic[8] = {'A', 'M', 'L', 'G', 'R', 'A', 'P', 'H'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  const std::string& bytes() const { return buf_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(le(8)); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw ParseError("graph cache truncated");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_graph_cache(const TransactionGraph& g, const std::filesystem::path& path) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);

  w.u64(g.banks_.size());
  std::unordered_map<std::string, std::uint32_t> bank_index;
  for (std::uint32_t i = 0; i < g.banks_.size(); ++i) {
    w.str(g.banks_[i].value);
    bank_index.emplace(g.banks_[i].value, i);
  }
  w.u64(g.currencies_.size());
  for (const auto& c : g.currencies_) w.str(c);
  w.u64(g.formats_.size());
  for (const auto& f : g.formats_) w.str(f);

  w.u64(g.accounts_.size());
  for (const AccountNode& a : g.accounts_) {
    w.str(a.id.value);
    w.u32(bank_index.at(a.bank->value));
    w.u8(static_cast<std::uint8_t>(a.entity_type));
    w.u8(a.creation_date ? 1 : 0);
    w.i64(a.creation_date ? a.creation_date->minutes : 0);
  }

  w.u64(g.edges_.size());
  for (const EdgeRecord& r : g.edges_) {
    w.i64(r.timestamp);
    w.i64(r.paid_cents);
    w.i64(r.received_cents);
    w.u32(r.source);
    w.u32(r.dest);
    w.u16(r.paid_currency);
    w.u16(r.received_currency);
    w.u16(r.payment_format);
    w.u8(static_cast<std::uint8_t>(r.laundering));
    w.u8(r.pattern);
  }
  write_file(path, w.bytes());
}

TransactionGraph load_graph_cache(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  Reader r(data);
  if (r.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw ParseError("'" + path.string() + "' is not a graph cache");
  }
  if (const auto v = r.u32(); v != kVersion) {
    throw ParseError("unsupported graph cache version " + std::to_string(v));
  }
  TransactionGraph g;
  const std::uint64_t n_banks = r.u64();
  for (std::uint64_t i = 0; i < n_banks; ++i) g.banks_.emplace_back(r.str());
  const std::uint64_t n_cur = r.u64();
  for (std::uint64_t i = 0; i < n_cur; ++i) g.currencies_.push_back(r.str());
  const std::uint64_t n_fmt = r.u64();
  for (std::uint64_t i = 0; i < n_fmt; ++i) g.formats_.push_back(r.str());

  const std::uint64_t n_acc = r.u64();
  g.accounts_.reserve(n_acc);
  for (std::uint64_t i = 0; i < n_acc; ++i) {
    AccountNode a;
    a.id = AccountId{r.str()};
    const std::uint32_t bank = r.u32();
    if (bank >= g.banks_.size()) throw ParseError("graph cache: bank index out of range");
    a.bank = g.banks_[bank];
    const std::uint8_t et = r.u8();
    if (et > static_cast<std::uint8_t>(EntityType::Corporate)) {
      throw ParseError("graph cache: bad entity type");
    }
    a.entity_type = static_cast<EntityType>(et);
    const bool has_creation = r.u8() != 0;
    const std::int64_t creation = r.i64();
    if (has_creation) a.creation_date = Timestamp{creation};
    g.account_lookup_.emplace(a.id.value, static_cast<AccountIndex>(i));
    g.accounts_.push_back(std::move(a));
  }

  const std::uint64_t n_edges = r.u64();
  g.edges_.reserve(n_edges);
  for (std::uint64_t i = 0; i < n_edges; ++i) {
    EdgeRecord e;
    e.timestamp = r.i64();
    e.paid_cents = r.i64();
    e.received_cents = r.i64();
    e.source = r.u32();
    e.dest = r.u32();
    e.paid_currency = r.u16();
    e.received_currency = r.u16();
    e.payment_format = r.u16();
    e.laundering = static_cast<std::int8_t>(r.u8());
    e.pattern = r.u8();
    if (e.source >= n_acc || e.dest >= n_acc || e.paid_currency >= n_cur ||
        e.received_currency >= n_cur || e.payment_format >= n_fmt) {
      throw ParseError("graph cache: edge references out of range");
    }
    g.edges_.push_back(e);
  }
  if (!r.at_end()) throw ParseError("graph cache: trailing bytes");
  g.build_indexes();
  return g;
}

}  // namespace aml
