#pragma once

#include <optional>
#include <vector>

#include "aml/types.hpp"

namespace aml {

struct GroundTruth {
  bool is_laundering = false;
  /// Sorted, unique. {None} for benign synthetic cases.
  std::vector<PatternKind> patterns;

  bool operator==(const GroundTruth&) const = default;
};

/// A localized neighborhood around one focal transfer.
///
/// Canonical form: accounts sorted by id, banks sorted, transfers in
/// transfer_less order. Functions that produce subgraphs return them in
/// canonical form; serialize() does not rely on it.
struct Subgraph {
  TransferEdge focal_edge;
  std::vector<AccountNode> accounts;
  std::vector<BankId> banks;
  std::vector<TransferEdge> transfers;
  std::optional<GroundTruth> truth;

  bool operator==(const Subgraph&) const = default;
};

/// Canonical transfer order: timestamp, source, dest, paid amount, then the
/// remaining attributes and finally the edge id, giving a total order.
bool transfer_less(const TransferEdge& a, const TransferEdge& b);

void canonicalize(Subgraph& sub);

/// Checks the structural invariants: focal edge present among transfers,
/// every transfer endpoint declared, every account bank declared, no
/// duplicate account or bank ids. Throws InvalidArgument.
void validate(const Subgraph& sub);

/// Equality on what the text format carries: account ids, bank ids,
/// memberships, and the multiset of (source, dest, paid, format, timestamp).
bool same_content(const Subgraph& a, const Subgraph& b);

}  // namespace aml
