#include "aml/typology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "aml/errors.hpp"
#include "aml/rng.hpp"

namespace aml {

void GenConfig::validate() const {
  if (kind == PatternKind::None) throw InvalidArgument("kind none has no generator; use generate_benign");
  if (fan < 2) throw InvalidArgument("fan must be at least 2");
  if (kind == PatternKind::SimpleCycle && fan < 3) throw InvalidArgument("a cycle needs at least 3 accounts");
  if (kind == PatternKind::Stack && layers < 2) throw InvalidArgument("stack needs at least 2 layers");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw InvalidArgument("jitter must lie in [0, 1)");
  if (span_minutes <= 0) throw InvalidArgument("span must be positive");
  if (amount_base.cents <= 0 || amount_base.currency.empty()) {
    throw InvalidArgument("amount_base must be positive with a currency");
  }
}

namespace {

constexpr std::array<std::string_view, 7> kFormats{"ACH",  "Cheque",       "Credit Card", "Wire",
                                                   "Cash", "Reinvestment", "Bitcoin"};

const Timestamp kEpochStart = Timestamp::from_civil(2022, 9, 1);

class Builder {
 public:
  Builder(std::uint64_t seed, std::int64_t start_jitter_minutes) : rng_(seed) {
    start_ = Timestamp{kEpochStart.minutes + rng_.uniform_int(0, start_jitter_minutes)};
    const std::size_t n_banks = 2 + rng_.index(2);
    std::set<std::int64_t> ids;
    while (ids.size() < n_banks) ids.insert(rng_.uniform_int(1, 30000));
    for (std::int64_t b : ids) banks_.emplace_back("bank_" + std::to_string(b));
  }

  Rng& rng() { return rng_; }

  AccountId account() {
    char buf[16];
    for (;;) {
      std::snprintf(buf, sizeof buf, "%09llX", static_cast<unsigned long long>(rng_.next() & 0xFFFFFFFFFULL));
      if (used_.insert(buf).second) break;
    }
    AccountId id{std::string("acct_") + buf};
    sub_.accounts.push_back(AccountNode{id, banks_[rng_.index(banks_.size())], EntityType::Unknown, std::nullopt});
    return id;
  }

  std::vector<AccountId> accounts(std::size_t n) {
    std::vector<AccountId> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(account());
    return out;
  }

  /// n distinct minute offsets in [lo, hi], ascending.
  std::vector<std::int64_t> times(std::size_t n, std::int64_t lo, std::int64_t hi) {
    if (hi - lo + 1 < static_cast<std::int64_t>(n)) {
      throw InvalidArgument("time span too short for " + std::to_string(n) + " transfers");
    }
    std::set<std::int64_t> picked;
    while (picked.size() < n) picked.insert(rng_.uniform_int(lo, hi));
    return {picked.begin(), picked.end()};
  }

  std::int64_t jittered(std::int64_t base, double jitter) {
    const double f = 1.0 + jitter * (2.0 * rng_.uniform01() - 1.0);
    return std::max<std::int64_t>(1, std::llround(static_cast<double>(base) * f));
  }

  void transfer(const AccountId& src, const AccountId& dst, std::int64_t offset, std::int64_t cents,
                const std::string& currency, std::optional<std::string_view> format = std::nullopt) {
    TransferEdge e;
    e.id = static_cast<EdgeId>(sub_.transfers.size());
    e.source = src;
    e.dest = dst;
    e.paid = Money{cents, currency};
    e.received = e.paid;
    e.payment_format = std::string(format.value_or(kFormats[rng_.index(kFormats.size())]));
    e.timestamp = Timestamp{start_.minutes + offset};
    sub_.transfers.push_back(std::move(e));
  }

  Subgraph finish(std::optional<PatternKind> laundering) {
    for (TransferEdge& e : sub_.transfers) {
      e.is_laundering = laundering.has_value();
      if (laundering) e.pattern_label = *laundering;
    }
    std::set<BankId> used;
    for (const AccountNode& a : sub_.accounts) used.insert(*a.bank);
    sub_.banks.assign(used.begin(), used.end());
    sub_.focal_edge = sub_.transfers[rng_.index(sub_.transfers.size())];
    sub_.truth = laundering ? GroundTruth{true, {*laundering}} : GroundTruth{false, {PatternKind::None}};
    canonicalize(sub_);
    return std::move(sub_);
  }

 private:
  Rng rng_;
  Timestamp start_;
  std::vector<BankId> banks_;
  std::set<std::string> used_;
  Subgraph sub_;
};

/// Splits `total` cents into n jittered positive parts that sum exactly.
std::vector<std::int64_t> split_amount(Builder& b, std::int64_t total, std::size_t n, double jitter) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& x : w) {
    x = 1.0 + jitter * (2.0 * b.rng().uniform01() - 1.0);
    sum += x;
  }
  std::vector<std::int64_t> parts(n);
  std::int64_t used = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    parts[i] = std::max<std::int64_t>(1, std::llround(static_cast<double>(total) * w[i] / sum));
    used += parts[i];
  }
  parts[n - 1] = std::max<std::int64_t>(1, total - used);
  return parts;
}

}  // namespace

Subgraph generate(const GenConfig& cfg) {
  cfg.validate();
  Builder b(cfg.seed, 30 * 1440);
  const std::string& cur = cfg.amount_base.currency;
  const std::int64_t base = cfg.amount_base.cents;
  const std::int64_t span = cfg.span_minutes;
  const std::size_t fan = cfg.fan;

  switch (cfg.kind) {
    case PatternKind::FanOut:
    case PatternKind::FanIn: {
      const AccountId hub = b.account();
      const auto others = b.accounts(fan);
      const auto ts = b.times(fan, 0, span);
      for (std::size_t i = 0; i < fan; ++i) {
        const std::int64_t amt = b.jittered(base, cfg.jitter);
        if (cfg.kind == PatternKind::FanOut) b.transfer(hub, others[i], ts[i], amt, cur);
        else b.transfer(others[i], hub, ts[i], amt, cur);
      }
      break;
    }
    case PatternKind::GatherScatter: {
      const AccountId mid = b.account();
      const auto sources = b.accounts(fan);
      const auto dests = b.accounts(fan);
      const auto in_ts = b.times(fan, 0, span / 2 - 1);
      const auto out_ts = b.times(fan, span / 2, span);
      std::int64_t total = 0;
      for (std::size_t i = 0; i < fan; ++i) {
        const std::int64_t amt = b.jittered(base, cfg.jitter);
        total += amt;
        b.transfer(sources[i], mid, in_ts[i], amt, cur);
      }
      const double fee = 0.05 * b.rng().uniform01();
      const auto parts = split_amount(b, std::llround(static_cast<double>(total) * (1.0 - fee)), fan, cfg.jitter);
      for (std::size_t i = 0; i < fan; ++i) b.transfer(mid, dests[i], out_ts[i], parts[i], cur);
      break;
    }
    case PatternKind::ScatterGather: {
      const AccountId src = b.account();
      const auto mids = b.accounts(fan);
      const AccountId sink = b.account();
      const auto first = b.times(fan, 0, span / 2 - 1);
      const auto second = b.times(fan, span / 2, span);
      for (std::size_t i = 0; i < fan; ++i) {
        const std::int64_t amt = b.jittered(base, cfg.jitter);
        b.transfer(src, mids[i], first[i], amt, cur);
        const double fee = 0.05 * b.rng().uniform01();
        b.transfer(mids[i], sink, second[i], std::max<std::int64_t>(1, std::llround(amt * (1.0 - fee))), cur);
      }
      break;
    }
    case PatternKind::SimpleCycle: {
      const auto ring = b.accounts(fan);
      const auto ts = b.times(fan, 0, span);
      std::int64_t amt = b.jittered(base, cfg.jitter);
      for (std::size_t i = 0; i < fan; ++i) {
        b.transfer(ring[i], ring[(i + 1) % fan], ts[i], amt, cur);
        amt = std::max<std::int64_t>(1, std::llround(static_cast<double>(amt) * (1.0 - 0.03 * b.rng().uniform01())));
      }
      break;
    }
    case PatternKind::Bipartite: {
      const auto left = b.accounts(fan);
      const auto right = b.accounts(fan);
      const auto ts = b.times(fan * fan, 0, span);
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i < fan; ++i) {
        for (std::size_t j = 0; j < fan; ++j) pairs.emplace_back(i, j);
      }
      b.rng().shuffle(pairs);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        b.transfer(left[pairs[k].first], right[pairs[k].second], ts[k], b.jittered(base, cfg.jitter), cur);
      }
      break;
    }
    case PatternKind::Stack: {
      std::vector<std::vector<AccountId>> sides;
      for (unsigned l = 0; l <= cfg.layers; ++l) sides.push_back(b.accounts(fan));
      for (unsigned l = 0; l < cfg.layers; ++l) {
        const std::int64_t lo = span * l / cfg.layers;
        const std::int64_t hi = span * (l + 1) / cfg.layers - 1;
        const auto ts = b.times(fan * fan, lo, hi);
        std::size_t k = 0;
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < fan; ++i) {
          for (std::size_t j = 0; j < fan; ++j) pairs.emplace_back(i, j);
        }
        b.rng().shuffle(pairs);
        for (const auto& [i, j] : pairs) {
          b.transfer(sides[l][i], sides[l + 1][j], ts[k++], b.jittered(base, cfg.jitter), cur);
        }
      }
      break;
    }
    case PatternKind::Random: {
      // a random connected tree over fan + 1 accounts, plus fan extra edges
      const auto nodes = b.accounts(fan + 1);
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (std::size_t i = 1; i <= fan; ++i) {
        const std::size_t j = b.rng().index(i);
        if (b.rng().bernoulli(0.5)) edges.emplace_back(i, j);
        else edges.emplace_back(j, i);
      }
      for (std::size_t e = 0; e < fan; ++e) {
        const std::size_t i = b.rng().index(fan + 1);
        std::size_t j = b.rng().index(fan);
        if (j >= i) ++j;
        edges.emplace_back(i, j);
      }
      const auto ts = b.times(edges.size(), 0, span);
      for (std::size_t k = 0; k < edges.size(); ++k) {
        b.transfer(nodes[edges[k].first], nodes[edges[k].second], ts[k], b.jittered(base, cfg.jitter), cur);
      }
      break;
    }
    case PatternKind::None: break;  // rejected by validate
  }
  return b.finish(cfg.kind);
}

namespace {

constexpr std::array<std::string_view, 3> kBenignCurrencies{"US Dollar", "Euro", "UK Pound"};
constexpr std::array<std::string_view, 3> kBenignFormats{"ACH", "Wire", "Cheque"};

/// Fixed counterparties, each pair with one amount and one format, paid on
/// a round-robin schedule. Pairs form a DAG where no account has more than
/// two counterparties in either direction.
Subgraph benign_attempt(const BenignParams& p, std::uint64_t seed) {
  Builder b(seed, 30 * 1440);
  const auto accts = b.accounts(p.n_accounts);
  struct Pair {
    std::size_t src, dst;
    std::int64_t cents;
    std::string currency;
    std::string_view format;
  };
  std::vector<Pair> pairs;
  const auto add_pair = [&](std::size_t s, std::size_t d) {
    pairs.push_back(Pair{s, d, b.rng().uniform_int(50, 5000) * 100,
                         std::string(kBenignCurrencies[b.rng().index(kBenignCurrencies.size())]),
                         kBenignFormats[b.rng().index(kBenignFormats.size())]});
  };
  for (std::size_t i = 0; i + 1 < accts.size(); ++i) {
    add_pair(i, i + 1);
    if (i + 2 < accts.size() && b.rng().bernoulli(0.5)) add_pair(i, i + 2);
  }
  const std::int64_t interval = p.span_minutes / p.n_edges;
  for (unsigned k = 0; k < p.n_edges; ++k) {
    const Pair& pr = pairs[k % pairs.size()];
    b.transfer(accts[pr.src], accts[pr.dst], interval * k, pr.cents, pr.currency, pr.format);
  }
  return b.finish(std::nullopt);
}

}  // namespace

Subgraph generate_benign(const BenignParams& params) {
  if (params.n_edges < 1) throw InvalidArgument("benign generator needs at least one edge");
  if (params.n_accounts < 2) throw InvalidArgument("benign generator needs at least two accounts");
  if (params.span_minutes < params.n_edges) throw InvalidArgument("span too short for the edge count");
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Subgraph s = benign_attempt(params, derive_seed(params.seed, attempt));
    if (detect(s).empty()) return s;
  }
  throw Error("benign generator found no detector-clean sample in 100 attempts");
}

}  // namespace aml
