#include <doctest.h>

#include "../support/fixtures.hpp"
#include "aml/errors.hpp"
#include "aml/serialize.hpp"
#include "aml/typology.hpp"

using namespace aml;

namespace {

bool contains(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

std::vector<Subgraph> corpus(std::size_t n) {
  std::vector<Subgraph> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 9 == 8) {
      BenignParams p;
      p.seed = i;
      out.push_back(generate_benign(p));
    } else {
      GenConfig g;
      g.kind = kLaunderingKinds[i % 9];
      g.fan = 3 + static_cast<unsigned>(i % 3);
      g.seed = i;
      out.push_back(generate(g));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("example neighbourhood renders the documented lines") {
  const std::string text = serialize(test::sample_subgraph());
  CHECK(text.starts_with("**Nodes:**\n- acct_80FF89190 (type: Account)\n"));
  CHECK(contains(text, "- bank_217 (type: Bank)\n- bank_4049 (type: Bank)\n\n**Edges:**\n"));
  CHECK(contains(text, "- acct_810147BB0 belongs_to bank_217\n"));
  CHECK(contains(text,
                 "- acct_810147BB0 transfers_to acct_8101A5D70\n"
                 "    amount: 225756.22 Shekel\n"
                 "    via: Reinvestment\n"
                 "    timestamp: 2022/09/01 00:02\n"));
  CHECK(contains(text, "    amount: 2364.39 Shekel\n    via: Cheque\n    timestamp: 2022/09/01 05:26\n"));
  CHECK_FALSE(contains(text, "**Focal:**"));
  CHECK(contains(serialize(test::sample_subgraph(), {true}),
                 "\n\n**Focal:** acct_80FF89190 transfers_to acct_810147BB0 @ 2022/09/01 09:15\n"));
}

TEST_CASE("zero amounts keep two decimals") {
  Subgraph s;
  s.accounts = {AccountNode{AccountId{"acct_a"}, BankId{"bank_1"}}, AccountNode{AccountId{"acct_b"}, BankId{"bank_1"}}};
  s.banks = {BankId{"bank_1"}};
  s.transfers = {test::transfer(0, "acct_a", "acct_b", 0, "Euro", "Cash", "2022/01/01 00:00")};
  s.focal_edge = s.transfers[0];
  CHECK(contains(serialize(s), "    amount: 0.00 Euro\n"));
}

TEST_CASE("output ignores in-memory order") {
  Subgraph s = test::sample_subgraph();
  const std::string a = serialize(s);
  std::reverse(s.accounts.begin(), s.accounts.end());
  std::reverse(s.transfers.begin(), s.transfers.end());
  std::reverse(s.banks.begin(), s.banks.end());
  CHECK(serialize(s) == a);
}

TEST_CASE("round trip over generated subgraphs") {
  for (const Subgraph& s : corpus(100)) {
    for (bool marker : {false, true}) {
      const std::string text = serialize(s, {marker});
      const Subgraph back = parse_serialized(text);
      CHECK(same_content(back, s));
      CHECK(serialize(back, {marker}) == text);
      if (marker) CHECK(back.focal_edge.source == s.focal_edge.source);
    }
  }
}

TEST_CASE("parsing a hand-written example box") {
  // the box with its elided tail removed and nodes in their original order
  const std::string box =
      "**Nodes:**\n"
      "- acct_810147BB0 (type: Account)\n"
      "- acct_8101A5D70 (type: Account)\n"
      "- acct_81141610D (type: Account)\n"
      "- acct_8117F9960 (type: Account)\n"
      "- acct_80FF89190 (type: Account)\n"
      "- bank_217 (type: Bank)\n"
      "- bank_4049 (type: Bank)\n"
      "\n"
      "**Edges:**\n"
      "- acct_810147BB0 belongs_to bank_217\n"
      "\n"
      "- acct_810147BB0 transfers_to acct_8101A5D70\n"
      "    amount: 225756.22 Shekel\n"
      "    via: Reinvestment\n"
      "    timestamp: 2022/09/01 00:02\n"
      "\n"
      "- acct_810147BB0 transfers_to acct_8101A5D70\n"
      "    amount: 2364.39 Shekel\n"
      "    via: Cheque\n"
      "    timestamp: 2022/09/01 05:26\n"
      "\n"
      "- acct_810147BB0 transfers_to acct_8101A5D70\n"
      "    amount: 4091.91 Shekel\n"
      "    via: Cheque\n"
      "    timestamp: 2022/09/01 07:50\n";
  const Subgraph s = parse_serialized(box);
  CHECK(s.accounts.size() + s.banks.size() == 7);
  CHECK(s.accounts.size() == 5);
  std::size_t memberships = 0;
  for (const auto& a : s.accounts) memberships += a.bank ? 1 : 0;
  CHECK(memberships + s.transfers.size() >= 4);
  CHECK(s.focal_edge.paid.cents == 22575622);
}

TEST_CASE("parse errors carry line numbers") {
  const std::string undeclared =
      "**Nodes:**\n- acct_a (type: Account)\n\n**Edges:**\n- acct_a transfers_to acct_zz\n"
      "    amount: 1.00 Euro\n    via: Wire\n    timestamp: 2022/01/01 00:00\n";
  try {
    parse_serialized(undeclared);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
    CHECK(contains(e.what(), "acct_zz"));
  }
  CHECK_THROWS_AS(parse_serialized("**Nodes:**\n- acct_a (type: Planet)\n"), ParseError);
  CHECK_THROWS_AS(parse_serialized(
                      "**Nodes:**\n- acct_a (type: Account)\n- acct_b (type: Account)\n\n**Edges:**\n"
                      "- acct_a transfers_to acct_b\n    amount: x Euro\n    via: Wire\n    timestamp: 2022/01/01 00:00\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_serialized(""), ParseError);
}
