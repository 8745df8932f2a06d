#pragma once

// Brute-force reference implementations. Slow on purpose; each one shares
// no code with the library kernel it checks.

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "aml/graph.hpp"
#include "aml/subgraph.hpp"

namespace aml::oracle {

struct KhopSets {
  std::set<std::string> accounts;
  std::set<EdgeId> edges;
};

// Repeated relaxation over the full edge list: k rounds, each adds every
// account adjacent (either direction) to the current frontier set.
inline KhopSets khop(const TransactionGraph& g, EdgeId focal, unsigned k) {
  const auto recs = g.records();
  std::set<AccountIndex> in{recs[focal].source, recs[focal].dest};
  for (unsigned round = 0; round < k; ++round) {
    std::set<AccountIndex> next = in;
    for (const EdgeRecord& r : recs) {
      if (in.contains(r.source)) next.insert(r.dest);
      if (in.contains(r.dest)) next.insert(r.source);
    }
    in = std::move(next);
  }
  KhopSets out;
  for (AccountIndex a : in) out.accounts.insert(g.account(a).id.value);
  for (EdgeId e = 0; e < recs.size(); ++e) {
    if (in.contains(recs[e].source) && in.contains(recs[e].dest)) out.edges.insert(e);
  }
  return out;
}

// All directed simple cycles of length 3..max_len that admit one transfer
// per hop with strictly increasing timestamps from some starting account.
// Cycles are returned as account sequences rotated to start at the
// smallest id.
inline std::set<std::vector<std::string>> temporal_cycles(const Subgraph& sub, unsigned max_len) {
  std::vector<std::string> names;
  for (const AccountNode& a : sub.accounts) names.push_back(a.id.value);
  std::sort(names.begin(), names.end());
  std::map<std::pair<std::string, std::string>, std::vector<std::int64_t>> times;
  for (const TransferEdge& e : sub.transfers) {
    if (e.source != e.dest) times[{e.source.value, e.dest.value}].push_back(e.timestamp.minutes);
  }

  // try every combination of one timestamp per hop
  const auto feasible = [&](const std::vector<std::string>& cyc) {
    const std::size_t len = cyc.size();
    for (std::size_t r = 0; r < len; ++r) {
      std::vector<const std::vector<std::int64_t>*> hops;
      for (std::size_t i = 0; i < len; ++i) {
        hops.push_back(&times.at({cyc[(r + i) % len], cyc[(r + i + 1) % len]}));
      }
      std::vector<std::size_t> pick(len, 0);
      while (true) {
        bool rising = true;
        for (std::size_t i = 1; i < len && rising; ++i) rising = (*hops[i])[pick[i]] > (*hops[i - 1])[pick[i - 1]];
        if (rising) return true;
        std::size_t d = 0;
        while (d < len && ++pick[d] == hops[d]->size()) pick[d++] = 0;
        if (d == len) break;
      }
    }
    return false;
  };

  std::set<std::vector<std::string>> out;
  std::vector<std::string> path;
  const auto extend = [&](auto&& self) -> void {
    if (path.size() >= 3 && times.contains({path.back(), path.front()})) {
      auto rot = path;
      std::rotate(rot.begin(), std::min_element(rot.begin(), rot.end()), rot.end());
      if (!out.contains(rot) && feasible(rot)) out.insert(rot);
    }
    if (path.size() == max_len) return;
    for (const std::string& n : names) {
      if (std::find(path.begin(), path.end(), n) != path.end()) continue;
      if (!times.contains({path.back(), n})) continue;
      path.push_back(n);
      self(self);
      path.pop_back();
    }
  };
  for (const std::string& s : names) {
    path = {s};
    extend(extend);
  }
  return out;
}

// Accounts with >= min_fan distinct counterparties (outgoing when `out`)
// inside some closed window of length `window` starting at one of their
// transfers.
inline std::set<std::string> fan_centers(const Subgraph& sub, unsigned min_fan, std::int64_t window, bool out) {
  std::set<std::string> centers;
  for (const AccountNode& a : sub.accounts) {
    for (const TransferEdge& start : sub.transfers) {
      if ((out ? start.source : start.dest) != a.id || start.source == start.dest) continue;
      std::set<std::string> others;
      for (const TransferEdge& e : sub.transfers) {
        if ((out ? e.source : e.dest) != a.id || e.source == e.dest) continue;
        const std::int64_t dt = e.timestamp.minutes - start.timestamp.minutes;
        if (dt >= 0 && dt <= window) others.insert(out ? e.dest.value : e.source.value);
      }
      if (others.size() >= min_fan) centers.insert(a.id.value);
    }
  }
  return centers;
}

}  // namespace aml::oracle
