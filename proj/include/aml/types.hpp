#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace aml {

/// Opaque string identifier with a tag so account and bank ids never mix.
template <class Tag>
struct StringId {
  std::string value;

  StringId() = default;
  explicit StringId(std::string v) : value(std::move(v)) {}

  bool empty() const noexcept { return value.empty(); }
  auto operator<=>(const StringId&) const = default;
  bool operator==(const StringId&) const = default;
};

using AccountId = StringId<struct AccountTag>;
using BankId = StringId<struct BankTag>;

/// Minute-precision, timezone-naive calendar time stored as minutes since
/// 1970-01-01 00:00. Text form is "YYYY/MM/DD HH:MM".
struct Timestamp {
  std::int64_t minutes = 0;

  static Timestamp parse(std::string_view text);  // throws ParseError
  static std::optional<Timestamp> try_parse(std::string_view text) noexcept;
  static Timestamp from_civil(int year, unsigned month, unsigned day, unsigned hour = 0,
                              unsigned minute = 0);
  std::string str() const;

  auto operator<=>(const Timestamp&) const = default;
  bool operator==(const Timestamp&) const = default;
};

/// Closed interval [begin, end].
struct TimeWindow {
  Timestamp begin;
  Timestamp end;

  bool contains(Timestamp t) const noexcept { return begin <= t && t <= end; }
};

/// Non-negative fixed-point amount with two fractional digits, plus the
/// currency name as it appears in the source data.
struct Money {
  std::int64_t cents = 0;
  std::string currency;

  /// Parses a decimal such as "225756.22", "12", "0.5". Digits beyond the
  /// second decimal are rounded half away from zero.
  static std::int64_t parse_cents(std::string_view text);  // throws ParseError
  static std::optional<std::int64_t> try_parse_cents(std::string_view text) noexcept;
  static std::string format_cents(std::int64_t cents);

  std::string amount_str() const { return format_cents(cents); }
  double value() const noexcept { return static_cast<double>(cents) / 100.0; }

  auto operator<=>(const Money&) const = default;
  bool operator==(const Money&) const = default;
};

enum class EntityType : std::uint8_t { Unknown, Individual, Corporate };

std::string_view to_string(EntityType t) noexcept;
std::optional<EntityType> entity_type_from_string(std::string_view s) noexcept;

/// The eight laundering typologies plus None for benign ground truth.
enum class PatternKind : std::uint8_t {
  FanOut,
  FanIn,
  GatherScatter,
  ScatterGather,
  SimpleCycle,
  Random,
  Bipartite,
  Stack,
  None,
};

inline constexpr std::array<PatternKind, 8> kLaunderingKinds = {
    PatternKind::FanOut,      PatternKind::FanIn,  PatternKind::GatherScatter,
    PatternKind::ScatterGather, PatternKind::SimpleCycle, PatternKind::Random,
    PatternKind::Bipartite,   PatternKind::Stack,
};

/// Canonical lowercase name: "fan-out", "simple-cycle", "none", ...
std::string_view pattern_name(PatternKind k) noexcept;
/// Inverse of pattern_name (exact match only; see verdict.hpp for the
/// tolerant normalizer).
std::optional<PatternKind> pattern_from_name(std::string_view name) noexcept;

using EdgeId = std::uint32_t;
using AccountIndex = std::uint32_t;

struct TransferEdge {
  EdgeId id = 0;
  AccountId source;
  AccountId dest;
  Money paid;
  Money received;
  std::string payment_format;
  Timestamp timestamp;
  std::optional<bool> is_laundering;
  std::optional<PatternKind> pattern_label;

  bool operator==(const TransferEdge&) const = default;
};

struct AccountNode {
  AccountId id;
  /// Always set for accounts of a TransactionGraph; may be absent for
  /// accounts parsed from text that carries no membership line.
  std::optional<BankId> bank;
  EntityType entity_type = EntityType::Unknown;
  std::optional<Timestamp> creation_date;

  bool operator==(const AccountNode&) const = default;
};

}  // namespace aml

template <class Tag>
struct std::hash<aml::StringId<Tag>> {
  std::size_t operator()(const aml::StringId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.value);
  }
};
