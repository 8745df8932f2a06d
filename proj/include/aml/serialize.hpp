#pragma once

#include <string>
#include <string_view>

#include "aml/subgraph.hpp"

namespace aml {

struct SerializeOptions {
  /// Appends a blank line and "**Focal:** <src> transfers_to <dst> @ <time>"
  /// identifying the candidate transfer.
  bool focal_marker = false;
};

/// Renders the subgraph as structured text:
///
///     **Nodes:**
///     - acct_80FF89190 (type: Account)
///     - bank_217 (type: Bank)
///
///     **Edges:**
///     - acct_810147BB0 belongs_to bank_217
///     - acct_810147BB0 transfers_to acct_8101A5D70
///         amount: 225756.22 Shekel
///         via: Reinvestment
///         timestamp: 2022/09/01 00:02
///
/// Accounts then banks (each lexicographic), memberships by account id,
/// transfers in transfer_less order. Only the paid amount is printed. The
/// output does not depend on the in-memory order of the collections.
std::string serialize(const Subgraph& sub, const SerializeOptions& opts = {});

/// Inverse of serialize. Node and edge lines may appear in any order.
/// Transfers get ids 0..n-1 in text order and received = paid. The focal
/// edge is the one named by a focal marker, else the first transfer.
/// Throws ParseError with the offending line number.
Subgraph parse_serialized(std::string_view text);

}  // namespace aml
