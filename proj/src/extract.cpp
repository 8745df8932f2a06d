#include "aml/extract.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "aml/errors.hpp"
#include "aml/hash.hpp"
#include "aml/serialize.hpp"

namespace aml {

void ExtractionConfig::validate() const {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  if (max_nodes == 0 || max_edges_per_account == 0) {
    throw InvalidArgument("extraction caps must be at least 1");
  }
  if (window_minutes && *window_minutes < 0) {
    throw InvalidArgument("time window must be non-negative");
  }
}

namespace {

std::int64_t distance(std::int64_t a, std::int64_t b) { return a > b ? a - b : b - a; }

/// The `cap` edges of a time-sorted list nearest to `t`, ordered by
/// (|dt|, id). Whole |dt| levels are gathered from both sides of `t` until
/// the cap is met, then sorted and truncated.
std::vector<EdgeId> nearest_edges(const TransactionGraph& g, std::span<const EdgeId> ids,
                                  std::int64_t t, std::size_t cap) {
  const auto key = [&](EdgeId id) {
    return std::pair{distance(g.record(id).timestamp, t), id};
  };
  std::vector<EdgeId> out;
  if (ids.size() <= cap) {
    out.assign(ids.begin(), ids.end());
  } else {
    const auto mid = std::partition_point(ids.begin(), ids.end(),
                                          [&](EdgeId id) { return g.record(id).timestamp < t; });
    auto right = mid;                           // next unread at or after t
    auto left = mid;                            // one past next unread before t
    while (out.size() < cap && (left != ids.begin() || right != ids.end())) {
      std::int64_t d = std::numeric_limits<std::int64_t>::max();
      if (left != ids.begin()) d = std::min(d, t - g.record(*(left - 1)).timestamp);
      if (right != ids.end()) d = std::min(d, g.record(*right).timestamp - t);
      while (left != ids.begin() && t - g.record(*(left - 1)).timestamp == d) out.push_back(*--left);
      while (right != ids.end() && g.record(*right).timestamp - t == d) out.push_back(*right++);
    }
  }
  std::sort(out.begin(), out.end(), [&](EdgeId a, EdgeId b) { return key(a) < key(b); });
  if (out.size() > cap) out.resize(cap);
  return out;
}

struct Extractor {
  const TransactionGraph& g;
  const ExtractionConfig& cfg;
  const EdgeRecord& focal;
  std::optional<TimeWindow> window;

  std::span<const EdgeId> windowed(std::span<const EdgeId> ids) const {
    return window ? window_slice(g, ids, *window) : ids;
  }
  std::vector<EdgeId> nearest_out(AccountIndex a) const {
    return nearest_edges(g, windowed(g.out_index(a)), focal.timestamp, cfg.max_edges_per_account);
  }
  std::vector<EdgeId> nearest_in(AccountIndex a) const {
    return nearest_edges(g, windowed(g.in_index(a)), focal.timestamp, cfg.max_edges_per_account);
  }
};

}  // namespace

Subgraph extract_khop(const TransactionGraph& g, EdgeId focal_id, const ExtractionConfig& cfg) {
  cfg.validate();
  if (focal_id >= g.edge_count()) throw NotFound("unknown edge id " + std::to_string(focal_id));
  const EdgeRecord& focal = g.record(focal_id);
  Extractor ex{g, cfg, focal, std::nullopt};
  if (cfg.window_minutes) {
    ex.window = TimeWindow{Timestamp{focal.timestamp - *cfg.window_minutes},
                           Timestamp{focal.timestamp + *cfg.window_minutes}};
  }

  // BFS in first-touch order
  std::vector<AccountIndex> order;
  std::unordered_map<AccountIndex, unsigned> depth;
  std::deque<AccountIndex> queue;
  const auto admit = [&](AccountIndex a, unsigned d) {
    if (depth.contains(a) || order.size() >= cfg.max_nodes) return;
    depth.emplace(a, d);
    order.push_back(a);
    if (d < cfg.k) queue.push_back(a);
  };
  // focal endpoints are admitted regardless of max_nodes
  depth.emplace(focal.source, 0);
  order.push_back(focal.source);
  queue.push_back(focal.source);
  if (!depth.contains(focal.dest)) {
    depth.emplace(focal.dest, 0);
    order.push_back(focal.dest);
    queue.push_back(focal.dest);
  }

  std::unordered_map<AccountIndex, std::vector<EdgeId>> out_cache;
  std::unordered_map<AccountIndex, std::vector<EdgeId>> in_cache;
  const auto cached_out = [&](AccountIndex a) -> const std::vector<EdgeId>& {
    auto it = out_cache.find(a);
    if (it == out_cache.end()) it = out_cache.emplace(a, ex.nearest_out(a)).first;
    return it->second;
  };
  const auto cached_in = [&](AccountIndex a) -> const std::vector<EdgeId>& {
    auto it = in_cache.find(a);
    if (it == in_cache.end()) it = in_cache.emplace(a, ex.nearest_in(a)).first;
    return it->second;
  };

  std::vector<EdgeId> touched;
  while (!queue.empty() && order.size() < cfg.max_nodes) {
    const AccountIndex u = queue.front();
    queue.pop_front();
    const unsigned d = depth.at(u);
    const auto& outs = cached_out(u);
    const auto& ins = cached_in(u);
    touched.clear();
    touched.insert(touched.end(), outs.begin(), outs.end());
    touched.insert(touched.end(), ins.begin(), ins.end());
    std::sort(touched.begin(), touched.end(), [&](EdgeId a, EdgeId b) {
      return std::pair{distance(g.record(a).timestamp, focal.timestamp), a} <
             std::pair{distance(g.record(b).timestamp, focal.timestamp), b};
    });
    for (EdgeId e : touched) {
      const EdgeRecord& r = g.record(e);
      admit(r.source == u ? r.dest : r.source, d + 1);
    }
  }

  // transfers among admitted accounts
  std::unordered_set<EdgeId> kept{focal_id};
  for (AccountIndex a : order) {
    for (EdgeId e : cached_out(a)) {
      const AccountIndex dst = g.record(e).dest;
      if (!depth.contains(dst)) continue;
      const auto& ins = cached_in(dst);
      if (cfg.max_edges_per_account == ExtractionConfig::kUnbounded ||
          std::find(ins.begin(), ins.end(), e) != ins.end()) {
        kept.insert(e);
      }
    }
  }

  Subgraph sub;
  sub.focal_edge = g.edge(focal_id);
  sub.accounts.reserve(order.size());
  for (AccountIndex a : order) {
    const AccountNode& n = g.account(a);
    sub.accounts.push_back(n);
    if (n.bank) sub.banks.push_back(*n.bank);
  }
  sub.transfers.reserve(kept.size());
  for (EdgeId e : kept) sub.transfers.push_back(g.edge(e));
  if (sub.focal_edge.is_laundering) {
    GroundTruth t;
    t.is_laundering = *sub.focal_edge.is_laundering;
    if (sub.focal_edge.pattern_label) {
      t.patterns.push_back(*sub.focal_edge.pattern_label);
    } else if (!t.is_laundering) {
      t.patterns.push_back(PatternKind::None);
    }
    sub.truth = t;
  }
  canonicalize(sub);
  return sub;
}

std::vector<Subgraph> extract_batch_serial(const TransactionGraph& g,
                                           std::span<const EdgeId> focal,
                                           const ExtractionConfig& cfg) {
  std::vector<Subgraph> out;
  out.reserve(focal.size());
  for (EdgeId e : focal) out.push_back(extract_khop(g, e, cfg));
  return out;
}

std::vector<Subgraph> extract_batch(const TransactionGraph& g, std::span<const EdgeId> focal,
                                    const ExtractionConfig& cfg) {
  cfg.validate();
  for (EdgeId e : focal) {
    if (e >= g.edge_count()) throw NotFound("unknown edge id " + std::to_string(e));
  }
  std::vector<Subgraph> out(focal.size());
  const auto n = static_cast<std::int64_t>(focal.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = extract_khop(g, focal[static_cast<std::size_t>(i)], cfg);
  }
  return out;
}

std::uint64_t subgraph_fingerprint(const Subgraph& sub) { return fnv1a64(serialize(sub)); }

TransactionGraph graph_from_subgraph(const Subgraph& sub) {
  GraphBuilder b;
  std::unordered_map<std::string, AccountIndex> index;
  for (const AccountNode& a : sub.accounts) {
    index[a.id.value] =
        b.add_account(a.id, a.bank.value_or(BankId{"bank_unknown"}), a.entity_type, a.creation_date);
  }
  for (const TransferEdge& e : sub.transfers) {
    const auto s = index.find(e.source.value);
    const auto d = index.find(e.dest.value);
    if (s == index.end() || d == index.end()) {
      throw InvalidArgument("transfer endpoint not declared: " + e.source.value + " -> " + e.dest.value);
    }
    GraphBuilder::Transfer t;
    t.source = s->second;
    t.dest = d->second;
    t.paid_cents = e.paid.cents;
    t.paid_currency = e.paid.currency;
    t.received_cents = e.received.cents;
    t.received_currency = e.received.currency;
    t.payment_format = e.payment_format;
    t.timestamp = e.timestamp;
    t.is_laundering = e.is_laundering;
    t.pattern = e.pattern_label;
    b.add_transfer(t);
  }
  return std::move(b).build();
}

}  // namespace aml
