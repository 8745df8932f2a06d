#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "aml/errors.hpp"
#include "aml/typology.hpp"

namespace aml {

void DetectorConfig::validate() const {
  if (min_fan == 0 || window_minutes <= 0 || bipartite_min_side == 0 || max_cycles == 0) {
    throw InvalidArgument("detector thresholds must be positive");
  }
  if (!(conservation_tol > 0.0 && conservation_tol < 1.0)) {
    throw InvalidArgument("conservation_tol must lie in (0, 1)");
  }
  if (max_cycle_len < 3) throw InvalidArgument("max_cycle_len must be at least 3");
  if (!(bipartite_min_density > 0.0 && bipartite_min_density <= 1.0)) {
    throw InvalidArgument("bipartite_min_density must lie in (0, 1]");
  }
}

bool match_less(const PatternMatch& a, const PatternMatch& b) {
  return std::tie(a.kind, a.participants, a.evidence) < std::tie(b.kind, b.participants, b.evidence);
}

std::vector<PatternKind> detected_kinds(std::span<const PatternMatch> matches) {
  std::vector<PatternKind> kinds;
  for (const PatternMatch& m : matches) kinds.push_back(m.kind);
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  return kinds;
}

namespace {

using Node = std::uint32_t;
using Pos = std::uint32_t;

struct LocalEdge {
  Node src;
  Node dst;
  std::int64_t ts;
  std::int64_t cents;
  const std::string* currency;
  EdgeId id;
};

/// Index-based view of a subgraph: accounts numbered in id order, edges in
/// (timestamp, id) order, per-node adjacency by edge position.
struct View {
  std::vector<AccountId> names;
  std::vector<LocalEdge> edges;
  std::vector<std::vector<Pos>> out;
  std::vector<std::vector<Pos>> in;
  std::unordered_map<EdgeId, Pos> by_id;

  View(const Subgraph& sub, std::span<const TransferEdge* const> only = {}) {
    std::set<AccountId> ids;
    for (const AccountNode& a : sub.accounts) ids.insert(a.id);
    for (const TransferEdge& e : sub.transfers) {
      ids.insert(e.source);
      ids.insert(e.dest);
    }
    names.assign(ids.begin(), ids.end());
    std::unordered_map<std::string, Node> index;
    for (Node i = 0; i < names.size(); ++i) index.emplace(names[i].value, i);
    const auto add = [&](const TransferEdge& e) {
      edges.push_back(LocalEdge{index.at(e.source.value), index.at(e.dest.value), e.timestamp.minutes,
                                e.paid.cents, &e.paid.currency, e.id});
    };
    if (only.empty()) {
      for (const TransferEdge& e : sub.transfers) add(e);
    } else {
      for (const TransferEdge* e : only) add(*e);
    }
    std::sort(edges.begin(), edges.end(), [](const LocalEdge& a, const LocalEdge& b) {
      return std::tie(a.ts, a.id) < std::tie(b.ts, b.id);
    });
    out.resize(names.size());
    in.resize(names.size());
    for (Pos p = 0; p < edges.size(); ++p) {
      out[edges[p].src].push_back(p);
      in[edges[p].dst].push_back(p);
      by_id.emplace(edges[p].id, p);
    }
  }

  std::size_t size() const { return names.size(); }
};

PatternMatch make_match(const View& v, PatternKind kind, std::vector<Node> nodes,
                        const std::vector<Pos>& evidence, double score) {
  PatternMatch m;
  m.kind = kind;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (Node n : nodes) m.participants.push_back(v.names[n]);
  for (Pos p : evidence) m.evidence.push_back(v.edges[p].id);
  std::sort(m.evidence.begin(), m.evidence.end());
  m.score = std::clamp(score, 0.0, 1.0);
  return m;
}

double fan_score(std::size_t count, unsigned min_fan) {
  return 1.0 - (static_cast<double>(min_fan) - 1.0) / static_cast<double>(count);
}

// ---------------------------------------------------------------- fan

void detect_fan(const View& v, const DetectorConfig& cfg, bool outward,
                std::vector<PatternMatch>& out) {
  const PatternKind kind = outward ? PatternKind::FanOut : PatternKind::FanIn;
  for (Node u = 0; u < v.size(); ++u) {
    std::vector<Pos> list;
    for (Pos p : outward ? v.out[u] : v.in[u]) {
      const Node other = outward ? v.edges[p].dst : v.edges[p].src;
      if (other != u) list.push_back(p);
    }
    if (list.size() < cfg.min_fan) continue;
    const auto other_of = [&](Pos p) { return outward ? v.edges[p].dst : v.edges[p].src; };
    std::map<Node, int> counts;
    std::size_t l = 0, best = 0, best_l = 0, best_r = 0;
    for (std::size_t r = 0; r < list.size(); ++r) {
      ++counts[other_of(list[r])];
      while (v.edges[list[r]].ts - v.edges[list[l]].ts > cfg.window_minutes) {
        const auto it = counts.find(other_of(list[l]));
        if (--it->second == 0) counts.erase(it);
        ++l;
      }
      if (counts.size() > best) {
        best = counts.size();
        best_l = l;
        best_r = r;
      }
    }
    if (best < cfg.min_fan) continue;
    std::vector<Pos> evidence;
    std::vector<Node> nodes{u};
    std::set<Node> seen;
    for (std::size_t i = best_l; i <= best_r; ++i) {
      if (seen.insert(other_of(list[i])).second) {
        evidence.push_back(list[i]);
        nodes.push_back(other_of(list[i]));
      }
    }
    out.push_back(make_match(v, kind, nodes, evidence, fan_score(best, cfg.min_fan)));
  }
}

// ---------------------------------------------------------------- scatter-gather

void detect_scatter_gather(const View& v, const DetectorConfig& cfg,
                           std::vector<PatternMatch>& out) {
  for (Node s = 0; s < v.size(); ++s) {
    std::map<Node, Pos> first_hop;  // earliest s->m per intermediary
    for (Pos p : v.out[s]) {
      const Node m = v.edges[p].dst;
      if (m != s) first_hop.try_emplace(m, p);
    }
    if (first_hop.size() < cfg.min_fan) continue;
    std::map<Node, std::map<Node, std::pair<Pos, Pos>>> paths;  // sink -> m -> hops
    for (const auto& [m, p1] : first_hop) {
      for (Pos p2 : v.out[m]) {
        const Node t = v.edges[p2].dst;
        if (t == s || t == m || v.edges[p2].ts <= v.edges[p1].ts) continue;
        paths[t].try_emplace(m, p1, p2);
      }
    }
    for (const auto& [t, via] : paths) {
      std::vector<std::pair<Node, std::pair<Pos, Pos>>> usable;
      for (const auto& entry : via) {
        if (entry.first != t) usable.push_back(entry);
      }
      if (usable.size() < cfg.min_fan) continue;
      std::vector<Node> nodes{s, t};
      std::vector<Pos> evidence;
      for (const auto& [m, hops] : usable) {
        nodes.push_back(m);
        evidence.push_back(hops.first);
        evidence.push_back(hops.second);
      }
      out.push_back(make_match(v, PatternKind::ScatterGather, nodes, evidence,
                               fan_score(usable.size(), cfg.min_fan)));
    }
  }
}

// ---------------------------------------------------------------- gather-scatter

struct Conservation {
  bool same_currency = true;
  double imbalance = 0.0;
};

Conservation conservation(const View& v, const std::vector<Pos>& ins, const std::vector<Pos>& outs) {
  Conservation c;
  const std::string* cur = nullptr;
  std::int64_t sum_in = 0, sum_out = 0;
  for (Pos p : ins) {
    if (cur && *cur != *v.edges[p].currency) c.same_currency = false;
    cur = v.edges[p].currency;
    sum_in += v.edges[p].cents;
  }
  for (Pos p : outs) {
    if (cur && *cur != *v.edges[p].currency) c.same_currency = false;
    cur = v.edges[p].currency;
    sum_out += v.edges[p].cents;
  }
  if (!c.same_currency) return c;
  c.imbalance = sum_in == 0 ? std::numeric_limits<double>::infinity()
                            : std::abs(static_cast<double>(sum_in - sum_out)) / static_cast<double>(sum_in);
  return c;
}

std::optional<double> gather_scatter_score(const Conservation& c, const DetectorConfig& cfg) {
  if (!c.same_currency) return 0.5;
  if (c.imbalance > cfg.conservation_tol) return std::nullopt;
  return 1.0 - 0.5 * c.imbalance / cfg.conservation_tol;
}

void detect_gather_scatter(const View& v, const DetectorConfig& cfg,
                           std::vector<PatternMatch>& out) {
  for (Node m = 0; m < v.size(); ++m) {
    std::vector<Pos> ins, outs;
    for (Pos p : v.in[m]) {
      if (v.edges[p].src != m) ins.push_back(p);
    }
    for (Pos p : v.out[m]) {
      if (v.edges[p].dst != m) outs.push_back(p);
    }
    if (ins.size() < cfg.min_fan || outs.size() < cfg.min_fan) continue;
    std::int64_t prev_split = std::numeric_limits<std::int64_t>::min();
    for (Pos split_pos : ins) {
      const std::int64_t split = v.edges[split_pos].ts;
      if (split == prev_split) continue;
      prev_split = split;
      std::map<Node, Pos> sources;
      for (Pos p : ins) {
        if (v.edges[p].ts > split) break;
        sources.try_emplace(v.edges[p].src, p);
      }
      if (sources.size() < cfg.min_fan) continue;
      std::map<Node, Pos> dests;
      for (Pos p : outs) {
        const Node d = v.edges[p].dst;
        if (v.edges[p].ts > split && !sources.contains(d)) dests.try_emplace(d, p);
      }
      if (dests.size() < cfg.min_fan) continue;
      std::vector<Pos> in_ev, out_ev;
      std::vector<Node> nodes{m};
      for (const auto& [n, p] : sources) {
        in_ev.push_back(p);
        nodes.push_back(n);
      }
      for (const auto& [n, p] : dests) {
        out_ev.push_back(p);
        nodes.push_back(n);
      }
      const auto score = gather_scatter_score(conservation(v, in_ev, out_ev), cfg);
      if (!score) continue;
      std::vector<Pos> evidence = in_ev;
      evidence.insert(evidence.end(), out_ev.begin(), out_ev.end());
      out.push_back(make_match(v, PatternKind::GatherScatter, nodes, evidence, *score));
      break;
    }
  }
}

// ---------------------------------------------------------------- cycles

using PairKey = std::uint64_t;
PairKey pair_key(Node a, Node b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

std::unordered_map<PairKey, std::vector<Pos>> pair_edges(const View& v) {
  std::unordered_map<PairKey, std::vector<Pos>> pairs;
  for (Pos p = 0; p < v.edges.size(); ++p) pairs[pair_key(v.edges[p].src, v.edges[p].dst)].push_back(p);
  return pairs;
}

/// Earliest strictly-increasing choice of transfers around `cycle`, trying
/// each starting account in turn.
std::optional<std::vector<Pos>> temporal_cycle(const View& v,
                                               const std::unordered_map<PairKey, std::vector<Pos>>& pairs,
                                               const std::vector<Node>& cycle) {
  const std::size_t len = cycle.size();
  for (std::size_t r = 0; r < len; ++r) {
    std::vector<Pos> chosen;
    std::int64_t prev = std::numeric_limits<std::int64_t>::min();
    bool ok = true;
    for (std::size_t i = 0; i < len && ok; ++i) {
      const Node a = cycle[(r + i) % len];
      const Node b = cycle[(r + i + 1) % len];
      const auto& list = pairs.at(pair_key(a, b));
      const auto it = std::find_if(list.begin(), list.end(), [&](Pos p) { return v.edges[p].ts > prev; });
      if (it == list.end()) {
        ok = false;
      } else {
        chosen.push_back(*it);
        prev = v.edges[*it].ts;
      }
    }
    if (ok) return chosen;
  }
  return std::nullopt;
}

void detect_cycles(const View& v, const DetectorConfig& cfg, std::vector<PatternMatch>& out) {
  std::vector<std::vector<Node>> succ(v.size());
  for (Node u = 0; u < v.size(); ++u) {
    for (Pos p : v.out[u]) {
      if (v.edges[p].dst != u) succ[u].push_back(v.edges[p].dst);
    }
    std::sort(succ[u].begin(), succ[u].end());
    succ[u].erase(std::unique(succ[u].begin(), succ[u].end()), succ[u].end());
  }
  const auto pairs = pair_edges(v);
  std::size_t found = 0;
  std::vector<Node> path;
  std::vector<char> on_path(v.size(), 0);

  // iterative-deepening style recursive DFS; the start is the smallest node
  // of the cycle so each directed cycle is visited once
  const auto dfs = [&](auto&& self, Node start, Node u) -> void {
    for (Node w : succ[u]) {
      if (found >= cfg.max_cycles) return;
      if (w == start) {
        if (path.size() >= 3) {
          if (auto chosen = temporal_cycle(v, pairs, path)) {
            out.push_back(make_match(v, PatternKind::SimpleCycle, path, *chosen, 1.0));
            ++found;
          }
        }
        continue;
      }
      if (w < start || on_path[w] || path.size() >= cfg.max_cycle_len) continue;
      path.push_back(w);
      on_path[w] = 1;
      self(self, start, w);
      on_path[w] = 0;
      path.pop_back();
    }
  };
  for (Node s = 0; s < v.size() && found < cfg.max_cycles; ++s) {
    path.assign(1, s);
    on_path[s] = 1;
    dfs(dfs, s, s);
    on_path[s] = 0;
  }
}

// ---------------------------------------------------------------- bipartite

struct Sides {
  std::vector<Node> a;  // sorted
  std::vector<Node> b;  // sorted
  auto operator<=>(const Sides&) const = default;
};

bool contains(const std::vector<Node>& sorted, Node n) {
  return std::binary_search(sorted.begin(), sorted.end(), n);
}

bool meets(std::size_t count, std::size_t of, double density) {
  return static_cast<double>(count) + 1e-9 >= density * static_cast<double>(of);
}

std::size_t density_threshold(std::size_t total, double density) {
  return static_cast<std::size_t>(std::ceil(density * static_cast<double>(total) - 1e-9));
}

/// Transfers between or within the sides that the rule forbids.
bool side_conflict(const View& v, const Sides& s) {
  for (const LocalEdge& e : v.edges) {
    const bool sa = contains(s.a, e.src), sb = contains(s.b, e.src);
    const bool da = contains(s.a, e.dst), db = contains(s.b, e.dst);
    if ((sa && da) || (sb && db) || (sb && da)) return true;
  }
  return false;
}

/// Earliest transfer per connected (a, b) pair, in (a, b) order.
std::map<std::pair<Node, Node>, Pos> side_pairs(const View& v, const Sides& s) {
  std::map<std::pair<Node, Node>, Pos> pairs;
  for (Pos p = 0; p < v.edges.size(); ++p) {
    const LocalEdge& e = v.edges[p];
    if (contains(s.a, e.src) && contains(s.b, e.dst)) pairs.try_emplace({e.src, e.dst}, p);
  }
  return pairs;
}

/// Smallest-ish evidence: an edge cover of both sides with redundant
/// edges pruned, topped up to the density threshold.
std::vector<Pos> bipartite_evidence(const std::map<std::pair<Node, Node>, Pos>& pairs, const Sides& s,
                                    double density) {
  std::vector<std::pair<Node, Node>> chosen;
  std::map<Node, int> deg;
  for (Node a : s.a) {
    for (const auto& [key, p] : pairs) {
      if (key.first == a) {
        chosen.push_back(key);
        ++deg[key.first];
        ++deg[key.second];
        break;
      }
    }
  }
  for (Node b : s.b) {
    if (deg[b] > 0) continue;
    for (const auto& [key, p] : pairs) {
      if (key.second == b) {
        chosen.push_back(key);
        ++deg[key.first];
        ++deg[key.second];
        break;
      }
    }
  }
  for (auto it = chosen.begin(); it != chosen.end();) {
    if (deg[it->first] > 1 && deg[it->second] > 1) {
      --deg[it->first];
      --deg[it->second];
      it = chosen.erase(it);
    } else {
      ++it;
    }
  }
  const std::size_t need = density_threshold(s.a.size() * s.b.size(), density);
  std::set<std::pair<Node, Node>> in(chosen.begin(), chosen.end());
  for (const auto& [key, p] : pairs) {
    if (in.size() >= need) break;
    in.insert(key);
  }
  std::vector<Pos> evidence;
  for (const auto& key : in) evidence.push_back(pairs.at(key));
  return evidence;
}

struct BipartiteHit {
  Sides sides;
  std::vector<Pos> evidence;
  double density;
};

std::vector<BipartiteHit> find_bipartite(const View& v, const DetectorConfig& cfg) {
  const std::size_t n = v.size();
  std::vector<std::vector<Node>> dests(n), srcs(n);
  for (const LocalEdge& e : v.edges) {
    if (e.src == e.dst) continue;
    dests[e.src].push_back(e.dst);
    srcs[e.dst].push_back(e.src);
  }
  for (auto* lists : {&dests, &srcs}) {
    for (auto& l : *lists) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }
  }
  const auto overlap = [](const std::vector<Node>& x, const std::vector<Node>& sorted) {
    std::size_t c = 0;
    for (Node n : x) c += contains(sorted, n) ? 1 : 0;
    return c;
  };
  const double d = cfg.bipartite_min_density;

  std::set<Sides> seen;
  std::vector<BipartiteHit> hits;
  for (Node seed = 0; seed < n; ++seed) {
    if (dests[seed].size() < cfg.bipartite_min_side) continue;
    Sides s;
    s.b = dests[seed];
    for (int round = 0; round < 2; ++round) {
      s.a.clear();
      for (Node x = 0; x < n; ++x) {
        if (!contains(s.b, x) && !dests[x].empty() && meets(overlap(dests[x], s.b), s.b.size(), d)) {
          s.a.push_back(x);
        }
      }
      std::vector<Node> b;
      for (Node y = 0; y < n; ++y) {
        if (!contains(s.a, y) && !srcs[y].empty() && meets(overlap(srcs[y], s.a), s.a.size(), d)) {
          b.push_back(y);
        }
      }
      s.b = std::move(b);
    }
    // drop accounts that transfer within their own side, then anything left
    // without a cross edge
    const auto drop_internal = [&](std::vector<Node>& side) {
      std::vector<Node> keep;
      for (Node x : side) {
        bool internal = false;
        for (Node y : dests[x]) internal = internal || contains(side, y);
        for (Node y : srcs[x]) internal = internal || contains(side, y);
        for (Pos p : v.out[x]) internal = internal || v.edges[p].dst == x;
        if (!internal) keep.push_back(x);
      }
      side = std::move(keep);
    };
    drop_internal(s.a);
    drop_internal(s.b);
    std::vector<Node> a, b;
    for (Node x : s.a) if (overlap(dests[x], s.b) > 0) a.push_back(x);
    for (Node y : s.b) if (overlap(srcs[y], a) > 0) b.push_back(y);
    s.a = std::move(a);
    s.b = std::move(b);

    if (s.a.size() < cfg.bipartite_min_side || s.b.size() < cfg.bipartite_min_side) continue;
    if (!seen.insert(s).second) continue;
    if (side_conflict(v, s)) continue;
    const auto pairs = side_pairs(v, s);
    const double density = static_cast<double>(pairs.size()) / static_cast<double>(s.a.size() * s.b.size());
    if (!meets(pairs.size(), s.a.size() * s.b.size(), d)) continue;
    hits.push_back(BipartiteHit{s, bipartite_evidence(pairs, s, d), density});
  }
  return hits;
}

void detect_bipartite_and_stack(const View& v, const DetectorConfig& cfg,
                                std::vector<PatternMatch>& out) {
  const auto hits = find_bipartite(v, cfg);
  for (const BipartiteHit& h : hits) {
    std::vector<Node> nodes = h.sides.a;
    nodes.insert(nodes.end(), h.sides.b.begin(), h.sides.b.end());
    out.push_back(make_match(v, PatternKind::Bipartite, nodes, h.evidence, h.density));
  }
  for (const BipartiteHit& first : hits) {
    for (const BipartiteHit& second : hits) {
      if (first.sides.b != second.sides.a) continue;
      const auto& a = first.sides.a;
      const auto& b = first.sides.b;
      const auto& c = second.sides.b;
      if (std::any_of(a.begin(), a.end(), [&](Node x) { return contains(c, x); })) continue;
      std::int64_t last_first = std::numeric_limits<std::int64_t>::min();
      std::int64_t first_second = std::numeric_limits<std::int64_t>::max();
      for (const LocalEdge& e : v.edges) {
        if (contains(a, e.src) && contains(b, e.dst)) last_first = std::max(last_first, e.ts);
        if (contains(b, e.src) && contains(c, e.dst)) first_second = std::min(first_second, e.ts);
      }
      if (last_first >= first_second) continue;
      std::vector<Node> nodes = a;
      nodes.insert(nodes.end(), b.begin(), b.end());
      nodes.insert(nodes.end(), c.begin(), c.end());
      std::vector<Pos> evidence = first.evidence;
      evidence.insert(evidence.end(), second.evidence.begin(), second.evidence.end());
      out.push_back(make_match(v, PatternKind::Stack, nodes, evidence,
                               std::min(first.density, second.density)));
    }
  }
}

}  // namespace

std::vector<PatternMatch> detect(const Subgraph& sub, const DetectorConfig& cfg) {
  cfg.validate();
  const View v(sub);
  std::vector<PatternMatch> out;
  detect_fan(v, cfg, true, out);
  detect_fan(v, cfg, false, out);
  detect_gather_scatter(v, cfg, out);
  detect_scatter_gather(v, cfg, out);
  detect_cycles(v, cfg, out);
  detect_bipartite_and_stack(v, cfg, out);
  std::sort(out.begin(), out.end(), match_less);
  return out;
}

std::vector<std::vector<PatternMatch>> detect_batch_serial(std::span<const Subgraph> subs,
                                                           const DetectorConfig& cfg) {
  std::vector<std::vector<PatternMatch>> out;
  out.reserve(subs.size());
  for (const Subgraph& s : subs) out.push_back(detect(s, cfg));
  return out;
}

std::vector<std::vector<PatternMatch>> detect_batch(std::span<const Subgraph> subs,
                                                    const DetectorConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<PatternMatch>> out(subs.size());
  const auto n = static_cast<std::int64_t>(subs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = detect(subs[static_cast<std::size_t>(i)], cfg);
  }
  return out;
}

// ---------------------------------------------------------------- validation

namespace {

std::vector<Node> participants_of(const View& v, const PatternMatch& m) {
  std::vector<Node> nodes;
  for (const AccountId& id : m.participants) {
    const auto it = std::lower_bound(v.names.begin(), v.names.end(), id);
    if (it == v.names.end() || *it != id) return {};
    nodes.push_back(static_cast<Node>(it - v.names.begin()));
  }
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

bool fan_holds(const View& full, const View& ev, const std::vector<Node>& nodes,
               const DetectorConfig& cfg, bool outward) {
  if (ev.edges.empty()) return false;
  const Node center = outward ? ev.edges.front().src : ev.edges.front().dst;
  std::set<Node> others;
  for (const LocalEdge& e : ev.edges) {
    if ((outward ? e.src : e.dst) != center) return false;
    const Node other = outward ? e.dst : e.src;
    if (other == center || !others.insert(other).second) return false;
  }
  if (others.size() < cfg.min_fan) return false;
  if (ev.edges.back().ts - ev.edges.front().ts > cfg.window_minutes) return false;
  std::vector<Node> expect(others.begin(), others.end());
  expect.push_back(center);
  std::sort(expect.begin(), expect.end());
  (void)full;
  return expect == nodes;
}

bool scatter_gather_holds(const View& ev, const std::vector<Node>& nodes, const DetectorConfig& cfg) {
  if (ev.edges.size() < 2) return false;
  const Node s = ev.edges.front().src;
  const Node t = ev.edges.back().dst;
  if (s == t) return false;
  std::map<Node, std::pair<int, int>> hops;  // m -> (first hop pos, second hop pos)
  for (Pos p = 0; p < ev.edges.size(); ++p) {
    const LocalEdge& e = ev.edges[p];
    if (e.src == s && e.dst != t) {
      auto& h = hops[e.dst];
      if (h.first != 0) return false;
      h.first = static_cast<int>(p) + 1;
    } else if (e.dst == t && e.src != s) {
      auto& h = hops[e.src];
      if (h.second != 0) return false;
      h.second = static_cast<int>(p) + 1;
    } else {
      return false;
    }
  }
  std::vector<Node> expect{s, t};
  for (const auto& [m, h] : hops) {
    if (h.first == 0 || h.second == 0) return false;
    if (ev.edges[h.first - 1].ts >= ev.edges[h.second - 1].ts) return false;
    expect.push_back(m);
  }
  if (hops.size() < cfg.min_fan) return false;
  std::sort(expect.begin(), expect.end());
  return expect == nodes;
}

bool gather_scatter_holds(const View& ev, const std::vector<Node>& nodes, const DetectorConfig& cfg) {
  if (ev.edges.empty()) return false;
  // the middle touches every evidence edge
  std::optional<Node> middle;
  for (Node cand : {ev.edges.front().src, ev.edges.front().dst}) {
    if (std::all_of(ev.edges.begin(), ev.edges.end(),
                    [&](const LocalEdge& e) { return e.src == cand || e.dst == cand; })) {
      middle = cand;
      break;
    }
  }
  if (!middle) return false;
  const Node m = *middle;
  std::set<Node> sources, dests;
  std::vector<Pos> ins, outs;
  std::int64_t last_in = std::numeric_limits<std::int64_t>::min();
  std::int64_t first_out = std::numeric_limits<std::int64_t>::max();
  for (Pos p = 0; p < ev.edges.size(); ++p) {
    const LocalEdge& e = ev.edges[p];
    if (e.src == e.dst) return false;
    if (e.dst == m) {
      if (!sources.insert(e.src).second) return false;
      ins.push_back(p);
      last_in = std::max(last_in, e.ts);
    } else {
      if (!dests.insert(e.dst).second) return false;
      outs.push_back(p);
      first_out = std::min(first_out, e.ts);
    }
  }
  if (sources.size() < cfg.min_fan || dests.size() < cfg.min_fan) return false;
  if (last_in >= first_out) return false;
  for (Node d : dests) {
    if (sources.contains(d)) return false;
  }
  if (!gather_scatter_score(conservation(ev, ins, outs), cfg)) return false;
  std::vector<Node> expect{m};
  expect.insert(expect.end(), sources.begin(), sources.end());
  expect.insert(expect.end(), dests.begin(), dests.end());
  std::sort(expect.begin(), expect.end());
  return expect == nodes;
}

bool cycle_holds(const View& ev, const std::vector<Node>& nodes, const DetectorConfig& cfg) {
  const std::size_t len = ev.edges.size();
  if (len < 3 || len > cfg.max_cycle_len || nodes.size() != len) return false;
  std::map<Node, Pos> next;
  for (Pos p = 0; p < len; ++p) {
    if (!next.emplace(ev.edges[p].src, p).second) return false;
  }
  // follow the cycle from the earliest edge; timestamps must rise all the way
  Pos p = 0;
  std::vector<Node> seen;
  for (std::size_t i = 0; i < len; ++i) {
    const LocalEdge& e = ev.edges[p];
    seen.push_back(e.src);
    const auto it = next.find(e.dst);
    if (it == next.end()) return false;
    if (i + 1 < len && ev.edges[it->second].ts <= e.ts) return false;
    p = it->second;
  }
  if (p != 0) return false;
  std::sort(seen.begin(), seen.end());
  return std::adjacent_find(seen.begin(), seen.end()) == seen.end() && seen == nodes;
}

bool bipartite_layer_holds(const View& full, const View& ev, const std::vector<Pos>& layer,
                           const DetectorConfig& cfg, Sides& sides_out) {
  std::set<Node> a, b;
  std::set<std::pair<Node, Node>> pairs;
  for (Pos p : layer) {
    a.insert(ev.edges[p].src);
    b.insert(ev.edges[p].dst);
    if (!pairs.emplace(ev.edges[p].src, ev.edges[p].dst).second) return false;
  }
  Sides s{{a.begin(), a.end()}, {b.begin(), b.end()}};
  for (Node x : s.a) {
    if (contains(s.b, x)) return false;
  }
  if (s.a.size() < cfg.bipartite_min_side || s.b.size() < cfg.bipartite_min_side) return false;
  if (!meets(pairs.size(), s.a.size() * s.b.size(), cfg.bipartite_min_density)) return false;
  // conflicts are judged on the full subgraph, in its own numbering
  Sides full_sides;
  for (Node x : s.a) {
    full_sides.a.push_back(static_cast<Node>(
        std::lower_bound(full.names.begin(), full.names.end(), ev.names[x]) - full.names.begin()));
  }
  for (Node x : s.b) {
    full_sides.b.push_back(static_cast<Node>(
        std::lower_bound(full.names.begin(), full.names.end(), ev.names[x]) - full.names.begin()));
  }
  if (side_conflict(full, full_sides)) return false;
  sides_out = std::move(full_sides);
  return true;
}

}  // namespace

bool match_holds(const PatternMatch& m, const Subgraph& sub, const DetectorConfig& cfg) {
  const View full(sub);
  std::vector<const TransferEdge*> chosen;
  for (EdgeId id : m.evidence) {
    const auto it = std::find_if(sub.transfers.begin(), sub.transfers.end(),
                                 [&](const TransferEdge& e) { return e.id == id; });
    if (it == sub.transfers.end()) return false;
    chosen.push_back(&*it);
  }
  if (chosen.empty()) return false;
  // the evidence view shares the full account numbering
  const View ev(sub, chosen);
  const std::vector<Node> nodes = participants_of(full, m);
  if (nodes.size() != m.participants.size()) return false;

  switch (m.kind) {
    case PatternKind::FanOut: return fan_holds(full, ev, nodes, cfg, true);
    case PatternKind::FanIn: return fan_holds(full, ev, nodes, cfg, false);
    case PatternKind::ScatterGather: return scatter_gather_holds(ev, nodes, cfg);
    case PatternKind::GatherScatter: return gather_scatter_holds(ev, nodes, cfg);
    case PatternKind::SimpleCycle: return cycle_holds(ev, nodes, cfg);
    case PatternKind::Bipartite: {
      std::vector<Pos> all(ev.edges.size());
      for (Pos p = 0; p < all.size(); ++p) all[p] = p;
      Sides s;
      if (!bipartite_layer_holds(full, ev, all, cfg, s)) return false;
      std::vector<Node> expect = s.a;
      expect.insert(expect.end(), s.b.begin(), s.b.end());
      std::sort(expect.begin(), expect.end());
      return expect == nodes;
    }
    case PatternKind::Stack: {
      std::set<Node> srcs, dsts;
      for (const LocalEdge& e : ev.edges) {
        srcs.insert(e.src);
        dsts.insert(e.dst);
      }
      std::vector<Pos> layer1, layer2;
      for (Pos p = 0; p < ev.edges.size(); ++p) {
        const LocalEdge& e = ev.edges[p];
        const bool src_is_a = !dsts.contains(e.src);
        const bool dst_is_c = !srcs.contains(e.dst);
        if (src_is_a && !dst_is_c) layer1.push_back(p);
        else if (!src_is_a && dst_is_c) layer2.push_back(p);
        else return false;
      }
      Sides first, second;
      if (!bipartite_layer_holds(full, ev, layer1, cfg, first)) return false;
      if (!bipartite_layer_holds(full, ev, layer2, cfg, second)) return false;
      if (first.b != second.a) return false;
      std::int64_t last_first = std::numeric_limits<std::int64_t>::min();
      std::int64_t first_second = std::numeric_limits<std::int64_t>::max();
      for (const LocalEdge& e : full.edges) {
        if (contains(first.a, e.src) && contains(first.b, e.dst)) last_first = std::max(last_first, e.ts);
        if (contains(second.a, e.src) && contains(second.b, e.dst)) first_second = std::min(first_second, e.ts);
      }
      if (last_first >= first_second) return false;
      std::vector<Node> expect = first.a;
      expect.insert(expect.end(), first.b.begin(), first.b.end());
      expect.insert(expect.end(), second.b.begin(), second.b.end());
      std::sort(expect.begin(), expect.end());
      return expect == nodes;
    }
    case PatternKind::Random:
    case PatternKind::None: return false;
  }
  return false;
}

}  // namespace aml
