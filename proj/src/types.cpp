#include "aml/types.hpp"

#include <chrono>
#include <cstdio>

#include "aml/errors.hpp"

namespace aml {

namespace {

bool parse_fixed_digits(std::string_view s, std::size_t pos, std::size_t n, unsigned& out) {
  if (pos + n > s.size()) return false;
  unsigned v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  out = v;
  return true;
}

}  // namespace

Timestamp Timestamp::from_civil(int year, unsigned month, unsigned day, unsigned hour,
                                unsigned minute) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
  if (!ymd.ok() || hour > 23 || minute > 59) {
    throw InvalidArgument("invalid calendar date-time");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return Timestamp{static_cast<std::int64_t>(days) * 1440 + hour * 60 + minute};
}

std::optional<Timestamp> Timestamp::try_parse(std::string_view s) noexcept {
  // YYYY/MM/DD HH:MM
  if (s.size() != 16 || s[4] != '/' || s[7] != '/' || s[10] != ' ' || s[13] != ':') {
    return std::nullopt;
  }
  unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0;
  if (!parse_fixed_digits(s, 0, 4, y) || !parse_fixed_digits(s, 5, 2, mo) ||
      !parse_fixed_digits(s, 8, 2, d) || !parse_fixed_digits(s, 11, 2, h) ||
      !parse_fixed_digits(s, 14, 2, mi)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{static_cast<int>(y)}, std::chrono::month{mo},
                           std::chrono::day{d}};
  if (!ymd.ok() || h > 23 || mi > 59) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return Timestamp{static_cast<std::int64_t>(days) * 1440 + h * 60 + mi};
}

Timestamp Timestamp::parse(std::string_view text) {
  if (auto t = try_parse(text)) return *t;
  throw ParseError("invalid timestamp '" + std::string(text) + "', expected YYYY/MM/DD HH:MM");
}

std::string Timestamp::str() const {
  using namespace std::chrono;
  std::int64_t days = minutes / 1440;
  std::int64_t rem = minutes % 1440;
  if (rem < 0) {
    rem += 1440;
    days -= 1;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d/%02u/%02u %02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 60), static_cast<int>(rem % 60));
  return buf;
}

std::optional<std::int64_t> Money::try_parse_cents(std::string_view s) noexcept {
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  std::int64_t whole = 0;
  std::size_t int_digits = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
    if (++int_digits > 16) return std::nullopt;
    whole = whole * 10 + (s[i] - '0');
    ++i;
  }
  std::int64_t frac = 0;
  std::size_t frac_digits = 0;
  bool round_up = false;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      if (frac_digits < 2) {
        frac = frac * 10 + (s[i] - '0');
      } else if (frac_digits == 2) {
        round_up = s[i] >= '5';
      }
      ++frac_digits;
      ++i;
    }
    if (int_digits == 0 && frac_digits == 0) return std::nullopt;
  } else if (int_digits == 0) {
    return std::nullopt;
  }
  if (i != s.size()) return std::nullopt;
  if (frac_digits == 1) frac *= 10;
  return whole * 100 + frac + (round_up ? 1 : 0);
}

std::int64_t Money::parse_cents(std::string_view text) {
  if (auto c = try_parse_cents(text)) return *c;
  throw ParseError("invalid amount '" + std::string(text) + "'");
}

std::string Money::format_cents(std::int64_t cents) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(cents / 100),
                static_cast<long long>(cents % 100));
  return buf;
}

std::string_view to_string(EntityType t) noexcept {
  switch (t) {
    case EntityType::Individual: return "Individual";
    case EntityType::Corporate: return "Corporate";
    case EntityType::Unknown: break;
  }
  return "Unknown";
}

std::optional<EntityType> entity_type_from_string(std::string_view s) noexcept {
  if (s == "Individual") return EntityType::Individual;
  if (s == "Corporate") return EntityType::Corporate;
  if (s == "Unknown") return EntityType::Unknown;
  return std::nullopt;
}

std::string_view pattern_name(PatternKind k) noexcept {
  switch (k) {
    case PatternKind::FanOut: return "fan-out";
    case PatternKind::FanIn: return "fan-in";
    case PatternKind::GatherScatter: return "gather-scatter";
    case PatternKind::ScatterGather: return "scatter-gather";
    case PatternKind::SimpleCycle: return "simple-cycle";
    case PatternKind::Random: return "random";
    case PatternKind::Bipartite: return "bipartite";
    case PatternKind::Stack: return "stack";
    case PatternKind::None: break;
  }
  return "none";
}

std::optional<PatternKind> pattern_from_name(std::string_view name) noexcept {
  for (PatternKind k : kLaunderingKinds) {
    if (pattern_name(k) == name) return k;
  }
  if (name == "none") return PatternKind::None;
  return std::nullopt;
}

}  // namespace aml
