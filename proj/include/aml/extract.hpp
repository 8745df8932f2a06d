#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "aml/graph.hpp"
#include "aml/subgraph.hpp"

namespace aml {

struct ExtractionConfig {
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  unsigned k = 2;
  /// Cap on account nodes, focal endpoints included.
  std::size_t max_nodes = 64;
  /// Per-direction cap on the edges considered at each account.
  std::size_t max_edges_per_account = 32;
  /// When set, only transfers within +/- this many minutes of the focal
  /// timestamp are traversed or included.
  std::optional<std::int64_t> window_minutes;

  static ExtractionConfig uncapped(unsigned k) {
    return ExtractionConfig{k, kUnbounded, kUnbounded, std::nullopt};
  }
  /// Throws InvalidArgument on k = 0 or a zero cap.
  void validate() const;
};

/// Breadth-first expansion over the undirected transfer view from both focal
/// endpoints, to depth k. Bank memberships decorate but never add hops.
///
/// When a cap binds, the edges examined at an account are the
/// `max_edges_per_account` nearest in time to the focal transfer (ties by
/// edge id), and new accounts are admitted in first-touch order until
/// `max_nodes` is reached. A transfer between two admitted accounts is kept
/// when it is among the nearest edges of both its source (outgoing) and its
/// destination (incoming); the focal transfer is always kept.
///
/// Throws NotFound for an unknown edge and InvalidArgument for a bad config.
Subgraph extract_khop(const TransactionGraph& g, EdgeId focal, const ExtractionConfig& cfg);

/// Many extractions over one shared graph. OpenMP-parallel over focal
/// edges; results are in input order and identical to the serial version.
std::vector<Subgraph> extract_batch(const TransactionGraph& g, std::span<const EdgeId> focal,
                                    const ExtractionConfig& cfg);
std::vector<Subgraph> extract_batch_serial(const TransactionGraph& g,
                                           std::span<const EdgeId> focal,
                                           const ExtractionConfig& cfg);

/// FNV-1a 64 of the canonical serialization (without focal marker).
std::uint64_t subgraph_fingerprint(const Subgraph& sub);

/// Builds a standalone graph from a subgraph. Edge i of the result is
/// sub.transfers[i]. Accounts without a bank are placed in "bank_unknown".
TransactionGraph graph_from_subgraph(const Subgraph& sub);

}  // namespace aml
