#pragma once

#include <string>

#include "aml/graph.hpp"
#include "aml/rng.hpp"
#include "aml/subgraph.hpp"

namespace aml::test {

inline TransferEdge transfer(EdgeId id, const std::string& src, const std::string& dst, std::int64_t cents,
                             const std::string& currency, const std::string& format, const std::string& when) {
  TransferEdge e;
  e.id = id;
  e.source = AccountId{src};
  e.dest = AccountId{dst};
  e.paid = Money{cents, currency};
  e.received = e.paid;
  e.payment_format = format;
  e.timestamp = Timestamp::parse(when);
  return e;
}

// The five-account, two-bank neighbourhood used in the format examples.
// Only acct_810147BB0 carries a membership; the rest have no bank line.
inline Subgraph sample_subgraph() {
  Subgraph s;
  for (const char* id : {"acct_80FF89190", "acct_810147BB0", "acct_8101A5D70", "acct_81141610D", "acct_8117F9960"}) {
    s.accounts.push_back(AccountNode{AccountId{id}, std::nullopt, EntityType::Unknown, std::nullopt});
  }
  s.accounts[1].bank = BankId{"bank_217"};
  s.banks = {BankId{"bank_217"}, BankId{"bank_4049"}};
  s.transfers = {
      transfer(0, "acct_810147BB0", "acct_8101A5D70", 22575622, "Shekel", "Reinvestment", "2022/09/01 00:02"),
      transfer(1, "acct_810147BB0", "acct_8101A5D70", 236439, "Shekel", "Cheque", "2022/09/01 05:26"),
      transfer(2, "acct_810147BB0", "acct_8101A5D70", 409191, "Shekel", "Cheque", "2022/09/01 07:50"),
      transfer(3, "acct_80FF89190", "acct_810147BB0", 150000, "Shekel", "Wire", "2022/09/01 09:15"),
      transfer(4, "acct_81141610D", "acct_80FF89190", 99999, "Shekel", "ACH", "2022/09/02 11:00"),
      transfer(5, "acct_8117F9960", "acct_810147BB0", 5000, "Shekel", "Cash", "2022/09/03 12:30"),
  };
  s.focal_edge = s.transfers[3];
  canonicalize(s);
  return s;
}

// Uniform random multigraph: `n` accounts over a few banks, `m` transfers at
// random minutes in one month. Self-transfers are allowed.
inline TransactionGraph random_graph(std::uint64_t seed, std::size_t n, std::size_t m, bool self_loops = true) {
  Rng rng(seed);
  GraphBuilder b;
  std::vector<AccountIndex> idx;
  for (std::size_t i = 0; i < n; ++i) {
    idx.push_back(b.add_account(AccountId{"acct_" + std::to_string(1000 + i)},
                                BankId{"bank_" + std::to_string(i % 3)}));
  }
  const std::int64_t t0 = Timestamp::from_civil(2022, 9, 1).minutes;
  for (std::size_t e = 0; e < m; ++e) {
    GraphBuilder::Transfer t;
    t.source = idx[rng.index(n)];
    t.dest = idx[rng.index(n)];
    if (!self_loops && n > 1) {
      while (t.dest == t.source) t.dest = idx[rng.index(n)];
    }
    t.paid_cents = rng.uniform_int(1, 1'000'000);
    t.received_cents = t.paid_cents;
    t.paid_currency = "US Dollar";
    t.received_currency = "US Dollar";
    t.payment_format = "Wire";
    t.timestamp = Timestamp{t0 + rng.uniform_int(0, 30 * 1440)};
    t.is_laundering = rng.bernoulli(0.3);
    b.add_transfer(t);
  }
  return std::move(b).build();
}

}  // namespace aml::test

namespace aml::test {

// Random subgraph over n accounts and m transfers with times drawn from a
// small range so equal timestamps are common. No self-transfers.
inline Subgraph random_subgraph(std::uint64_t seed, std::size_t n, std::size_t m, std::int64_t time_range = 40) {
  Rng rng(seed);
  Subgraph s;
  s.banks = {BankId{"bank_1"}};
  for (std::size_t i = 0; i < n; ++i) {
    s.accounts.push_back(AccountNode{AccountId{"acct_" + std::to_string(100 + i)}, BankId{"bank_1"}});
  }
  const std::int64_t t0 = Timestamp::from_civil(2022, 9, 1).minutes;
  for (std::size_t e = 0; e < m; ++e) {
    const std::size_t a = rng.index(n);
    std::size_t b = rng.index(n - 1);
    if (b >= a) ++b;
    TransferEdge t;
    t.id = static_cast<EdgeId>(e);
    t.source = s.accounts[a].id;
    t.dest = s.accounts[b].id;
    t.paid = Money{rng.uniform_int(100, 100'000), "US Dollar"};
    t.received = t.paid;
    t.payment_format = "Wire";
    t.timestamp = Timestamp{t0 + rng.uniform_int(0, time_range)};
    s.transfers.push_back(t);
  }
  s.focal_edge = s.transfers.front();
  canonicalize(s);
  return s;
}

}  // namespace aml::test
