#include "aml/subgraph.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_set>

#include "aml/errors.hpp"

namespace aml {

bool transfer_less(const TransferEdge& a, const TransferEdge& b) {
  return std::tie(a.timestamp, a.source, a.dest, a.paid.cents, a.paid.currency, a.payment_format,
                  a.received.cents, a.received.currency, a.id) <
         std::tie(b.timestamp, b.source, b.dest, b.paid.cents, b.paid.currency, b.payment_format,
                  b.received.cents, b.received.currency, b.id);
}

void canonicalize(Subgraph& sub) {
  std::sort(sub.accounts.begin(), sub.accounts.end(),
            [](const AccountNode& a, const AccountNode& b) { return a.id < b.id; });
  std::sort(sub.banks.begin(), sub.banks.end());
  sub.banks.erase(std::unique(sub.banks.begin(), sub.banks.end()), sub.banks.end());
  std::sort(sub.transfers.begin(), sub.transfers.end(), transfer_less);
  if (sub.truth) {
    auto& p = sub.truth->patterns;
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
}

void validate(const Subgraph& sub) {
  std::unordered_set<std::string> accounts;
  for (const AccountNode& a : sub.accounts) {
    if (a.id.empty()) throw InvalidArgument("empty account id");
    if (!accounts.insert(a.id.value).second) {
      throw InvalidArgument("duplicate account '" + a.id.value + "'");
    }
  }
  std::unordered_set<std::string> banks;
  for (const BankId& b : sub.banks) {
    if (b.empty()) throw InvalidArgument("empty bank id");
    if (!banks.insert(b.value).second) throw InvalidArgument("duplicate bank '" + b.value + "'");
  }
  for (const AccountNode& a : sub.accounts) {
    if (a.bank && !banks.contains(a.bank->value)) {
      throw InvalidArgument("bank '" + a.bank->value + "' of account '" + a.id.value +
                            "' is not declared");
    }
  }
  bool focal_found = false;
  for (const TransferEdge& e : sub.transfers) {
    if (!accounts.contains(e.source.value) || !accounts.contains(e.dest.value)) {
      throw InvalidArgument("transfer endpoint not declared: " + e.source.value + " -> " +
                            e.dest.value);
    }
    if (e.paid.cents < 0 || e.paid.currency.empty()) throw InvalidArgument("invalid amount");
    focal_found = focal_found || e == sub.focal_edge;
  }
  if (!sub.transfers.empty() && !focal_found) {
    throw InvalidArgument("focal edge is not among the transfers");
  }
}

bool same_content(const Subgraph& a, const Subgraph& b) {
  const auto accounts = [](const Subgraph& s) {
    std::vector<std::pair<std::string, std::string>> v;
    for (const AccountNode& n : s.accounts) v.emplace_back(n.id.value, n.bank ? n.bank->value : "");
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto banks = [](const Subgraph& s) {
    auto v = s.banks;
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto transfers = [](const Subgraph& s) {
    std::vector<std::tuple<std::int64_t, std::string, std::string, std::int64_t, std::string, std::string>> v;
    for (const TransferEdge& e : s.transfers) {
      v.emplace_back(e.timestamp.minutes, e.source.value, e.dest.value, e.paid.cents,
                     e.paid.currency, e.payment_format);
    }
    std::sort(v.begin(), v.end());
    return v;
  };
  return accounts(a) == accounts(b) && banks(a) == banks(b) && transfers(a) == transfers(b);
}

}  // namespace aml
