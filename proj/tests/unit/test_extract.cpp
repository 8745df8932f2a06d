#include <doctest.h>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "aml/errors.hpp"
#include "aml/extract.hpp"
#include "aml/hash.hpp"
#include "aml/serialize.hpp"

using namespace aml;

namespace {

std::set<std::string> account_set(const Subgraph& s) {
  std::set<std::string> out;
  for (const auto& a : s.accounts) out.insert(a.id.value);
  return out;
}

std::set<EdgeId> edge_set(const Subgraph& s) {
  std::set<EdgeId> out;
  for (const auto& e : s.transfers) out.insert(e.id);
  return out;
}

TransactionGraph sample_graph() {
  GraphBuilder b;
  const auto add = [&](const char* id, const char* bank) { return b.add_account(AccountId{id}, BankId{bank}); };
  const auto a90 = add("acct_80FF89190", "bank_4049");
  const auto bb0 = add("acct_810147BB0", "bank_217");
  const auto d70 = add("acct_8101A5D70", "bank_4049");
  const auto f10 = add("acct_81141610D", "bank_217");
  const auto f60 = add("acct_8117F9960", "bank_4049");
  const auto far = add("acct_FAR", "bank_9");
  const auto xfer = [&](AccountIndex s, AccountIndex d, const char* when) {
    GraphBuilder::Transfer t;
    t.source = s;
    t.dest = d;
    t.paid_cents = t.received_cents = 100;
    t.paid_currency = t.received_currency = "Shekel";
    t.payment_format = "Cheque";
    t.timestamp = Timestamp::parse(when);
    return b.add_transfer(t);
  };
  xfer(a90, bb0, "2022/09/01 00:00");
  xfer(bb0, d70, "2022/09/01 00:02");
  xfer(f10, a90, "2022/09/01 01:00");
  xfer(f60, bb0, "2022/09/01 02:00");
  xfer(far, f10, "2022/09/01 03:00");  // two hops from the focal pair
  return std::move(b).build();
}

}  // namespace

TEST_CASE("isolated edge") {
  GraphBuilder b;
  GraphBuilder::Transfer t;
  t.source = b.add_account(AccountId{"acct_1"}, BankId{"bank_1"});
  t.dest = b.add_account(AccountId{"acct_2"}, BankId{"bank_2"});
  t.paid_currency = t.received_currency = "Euro";
  t.payment_format = "Wire";
  b.add_transfer(t);
  const auto g = std::move(b).build();
  const Subgraph s = extract_khop(g, 0, ExtractionConfig{});
  CHECK(s.accounts.size() == 2);
  CHECK(s.banks.size() == 2);
  CHECK(s.transfers.size() == 1);
  CHECK(s.focal_edge == s.transfers[0]);
  CHECK_NOTHROW(validate(s));
}

TEST_CASE("five accounts and two banks around the example focal transfer") {
  const auto g = sample_graph();
  const Subgraph s = extract_khop(g, 0, ExtractionConfig{1});
  CHECK(account_set(s) == std::set<std::string>{"acct_80FF89190", "acct_810147BB0", "acct_8101A5D70",
                                                "acct_81141610D", "acct_8117F9960"});
  CHECK(s.banks == std::vector<BankId>{BankId{"bank_217"}, BankId{"bank_4049"}});
  CHECK(s.transfers.size() == 4);
  const Subgraph wide = extract_khop(g, 0, ExtractionConfig{2});
  CHECK(wide.accounts.size() == 6);
  CHECK(wide.banks.size() == 3);
}

TEST_CASE("uncapped extraction equals the brute-force neighbourhood") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = test::random_graph(seed, 60, 200);
    for (EdgeId focal : {EdgeId{0}, EdgeId{57}, EdgeId{199}}) {
      for (unsigned k : {1u, 2u, 3u}) {
        const Subgraph s = extract_khop(g, focal, ExtractionConfig::uncapped(k));
        const auto want = oracle::khop(g, focal, k);
        CHECK(account_set(s) == want.accounts);
        CHECK(edge_set(s) == want.edges);
      }
    }
  }
}

TEST_CASE("caps bound the result and keep the focal transfer") {
  const auto g = test::random_graph(5, 40, 400);
  ExtractionConfig cfg{2, 10, 4, std::nullopt};
  for (EdgeId focal = 0; focal < 50; ++focal) {
    const Subgraph s = extract_khop(g, focal, cfg);
    CHECK(s.accounts.size() <= 10);
    CHECK(edge_set(s).contains(focal));
    CHECK_NOTHROW(validate(s));
    const Subgraph full = extract_khop(g, focal, ExtractionConfig::uncapped(2));
    const auto full_edges = edge_set(full);
    for (EdgeId e : edge_set(s)) CHECK(full_edges.contains(e));
  }
}

TEST_CASE("time window restricts transfers") {
  const auto g = test::random_graph(8, 30, 300);
  ExtractionConfig cfg = ExtractionConfig::uncapped(2);
  cfg.window_minutes = 3 * 1440;
  for (EdgeId focal = 0; focal < 20; ++focal) {
    const Subgraph s = extract_khop(g, focal, cfg);
    for (const auto& e : s.transfers) {
      CHECK(std::llabs(e.timestamp.minutes - s.focal_edge.timestamp.minutes) <= 3 * 1440);
    }
  }
}

TEST_CASE("extraction is deterministic and batch matches serial") {
  const auto g = test::random_graph(9, 100, 500);
  std::vector<EdgeId> focal;
  for (EdgeId e = 0; e < 500; e += 7) focal.push_back(e);
  const auto par = extract_batch(g, focal, ExtractionConfig{});
  const auto ser = extract_batch_serial(g, focal, ExtractionConfig{});
  CHECK(par == ser);
  CHECK(extract_khop(g, 14, ExtractionConfig{}) == extract_khop(g, 14, ExtractionConfig{}));
}

TEST_CASE("bad inputs") {
  const auto g = test::random_graph(1, 5, 5);
  CHECK_THROWS_AS(extract_khop(g, 99, ExtractionConfig{}), NotFound);
  CHECK_THROWS_AS(extract_khop(g, 0, ExtractionConfig{0}), InvalidArgument);
  CHECK_THROWS_AS(extract_khop(g, 0, ExtractionConfig{2, 0, 5, std::nullopt}), InvalidArgument);
}

TEST_CASE("fingerprints") {
  Subgraph s = test::sample_subgraph();
  CHECK(subgraph_fingerprint(s) == subgraph_fingerprint(s));
  CHECK(subgraph_fingerprint(s) == fnv1a64(serialize(s)));
  Subgraph t = s;
  t.transfers[2].paid.cents += 1;
  CHECK(subgraph_fingerprint(t) != subgraph_fingerprint(s));
}

TEST_CASE("graph_from_subgraph keeps transfer order") {
  const Subgraph s = test::sample_subgraph();
  const auto g = graph_from_subgraph(s);
  REQUIRE(g.edge_count() == s.transfers.size());
  for (EdgeId i = 0; i < g.edge_count(); ++i) {
    CHECK(g.edge(i).source == s.transfers[i].source);
    CHECK(g.edge(i).paid == s.transfers[i].paid);
  }
  CHECK(g.find_account(AccountId{"acct_80FF89190"}).has_value());
}
