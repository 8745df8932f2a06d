#include "aml/serialize.hpp"

#include <algorithm>
#include <unordered_map>

#include "aml/errors.hpp"

namespace aml {

namespace {

constexpr std::string_view kNodesHeader = "**Nodes:**";
constexpr std::string_view kEdgesHeader = "**Edges:**";
constexpr std::string_view kFocalPrefix = "**Focal:** ";
constexpr std::string_view kIndent = "    ";

void append_transfer(std::string& out, const TransferEdge& e) {
  out += "- ";
  out += e.source.value;
  out += " transfers_to ";
  out += e.dest.value;
  out += '\n';
  out += kIndent;
  out += "amount: ";
  out += e.paid.amount_str();
  out += ' ';
  out += e.paid.currency;
  out += '\n';
  out += kIndent;
  out += "via: ";
  out += e.payment_format;
  out += '\n';
  out += kIndent;
  out += "timestamp: ";
  out += e.timestamp.str();
  out += '\n';
}

}  // namespace

std::string serialize(const Subgraph& sub, const SerializeOptions& opts) {
  std::vector<const AccountNode*> accounts;
  accounts.reserve(sub.accounts.size());
  for (const AccountNode& a : sub.accounts) accounts.push_back(&a);
  std::sort(accounts.begin(), accounts.end(),
            [](const AccountNode* a, const AccountNode* b) { return a->id < b->id; });
  std::vector<const BankId*> banks;
  for (const BankId& b : sub.banks) banks.push_back(&b);
  std::sort(banks.begin(), banks.end(), [](const BankId* a, const BankId* b) { return *a < *b; });
  std::vector<const TransferEdge*> transfers;
  transfers.reserve(sub.transfers.size());
  for (const TransferEdge& e : sub.transfers) transfers.push_back(&e);
  std::sort(transfers.begin(), transfers.end(),
            [](const TransferEdge* a, const TransferEdge* b) { return transfer_less(*a, *b); });

  std::string out;
  out.reserve(64 + 40 * accounts.size() + 120 * transfers.size());
  out += kNodesHeader;
  out += '\n';
  for (const AccountNode* a : accounts) {
    out += "- " + a->id.value + " (type: Account)\n";
  }
  for (const BankId* b : banks) {
    out += "- " + b->value + " (type: Bank)\n";
  }
  out += '\n';
  out += kEdgesHeader;
  out += '\n';
  for (const AccountNode* a : accounts) {
    if (a->bank) out += "- " + a->id.value + " belongs_to " + a->bank->value + '\n';
  }
  for (const TransferEdge* e : transfers) append_transfer(out, *e);
  if (opts.focal_marker) {
    out += '\n';
    out += kFocalPrefix;
    out += sub.focal_edge.source.value + " transfers_to " + sub.focal_edge.dest.value + " @ " +
           sub.focal_edge.timestamp.str() + '\n';
  }
  return out;
}

namespace {

struct LineCursor {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t lineno = 0;

  bool next(std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++lineno;
    return true;
  }
};

std::string_view strip_prefix(std::string_view s, std::string_view prefix) {
  return s.substr(prefix.size());
}

std::string_view trim_left(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

}  // namespace

Subgraph parse_serialized(std::string_view text) {
  enum class Section { Start, Nodes, Edges, Focal };
  Section section = Section::Start;
  Subgraph sub;
  std::unordered_map<std::string, std::size_t> account_at;
  std::unordered_map<std::string, bool> bank_seen;
  struct Focal {
    std::string src, dst;
    Timestamp ts;
    std::size_t line;
  };
  std::optional<Focal> focal;

  LineCursor cur{text};
  std::string_view line;
  const auto require_account = [&](std::string_view id, std::size_t ln) -> std::size_t {
    const auto it = account_at.find(std::string(id));
    if (it == account_at.end()) {
      throw ParseError("edge references undeclared node '" + std::string(id) + "'", ln);
    }
    return it->second;
  };

  while (cur.next(line)) {
    const std::size_t ln = cur.lineno;
    if (is_blank(line)) continue;
    if (line == kNodesHeader) {
      if (section != Section::Start) throw ParseError("unexpected **Nodes:** header", ln);
      section = Section::Nodes;
      continue;
    }
    if (line == kEdgesHeader) {
      if (section != Section::Nodes) throw ParseError("unexpected **Edges:** header", ln);
      section = Section::Edges;
      continue;
    }
    if (line.starts_with(kFocalPrefix)) {
      if (section != Section::Edges) throw ParseError("focal marker outside the edge section", ln);
      section = Section::Focal;
      std::string_view rest = strip_prefix(line, kFocalPrefix);
      const auto at = rest.rfind(" @ ");
      const auto arrow = rest.find(" transfers_to ");
      if (at == std::string_view::npos || arrow == std::string_view::npos || arrow > at) {
        throw ParseError("malformed focal marker", ln);
      }
      Focal f;
      f.src = std::string(rest.substr(0, arrow));
      f.dst = std::string(rest.substr(arrow + 14, at - arrow - 14));
      const auto ts = Timestamp::try_parse(rest.substr(at + 3));
      if (!ts) throw ParseError("invalid timestamp in focal marker", ln);
      f.ts = *ts;
      f.line = ln;
      focal = f;
      continue;
    }
    switch (section) {
      case Section::Start:
        throw ParseError("expected **Nodes:** header", ln);
      case Section::Focal:
        throw ParseError("content after focal marker", ln);
      case Section::Nodes: {
        if (!line.starts_with("- ")) throw ParseError("expected node line", ln);
        const std::string_view body = line.substr(2);
        const auto sp = body.find(' ');
        if (sp == std::string_view::npos || sp == 0) throw ParseError("malformed node line", ln);
        const std::string id(body.substr(0, sp));
        const std::string_view kind = body.substr(sp + 1);
        if (kind == "(type: Account)") {
          if (account_at.contains(id)) throw ParseError("duplicate node '" + id + "'", ln);
          account_at.emplace(id, sub.accounts.size());
          sub.accounts.push_back(AccountNode{AccountId{id}, std::nullopt, EntityType::Unknown, std::nullopt});
        } else if (kind == "(type: Bank)") {
          if (bank_seen.contains(id)) throw ParseError("duplicate node '" + id + "'", ln);
          bank_seen.emplace(id, true);
          sub.banks.emplace_back(id);
        } else {
          throw ParseError("unknown node type in '" + std::string(line) + "'", ln);
        }
        break;
      }
      case Section::Edges: {
        if (!line.starts_with("- ")) throw ParseError("expected edge line", ln);
        const std::string_view body = line.substr(2);
        if (const auto p = body.find(" belongs_to "); p != std::string_view::npos) {
          const std::string_view acct = body.substr(0, p);
          const std::string bank(body.substr(p + 12));
          const std::size_t ai = require_account(acct, ln);
          if (!bank_seen.contains(bank)) {
            throw ParseError("edge references undeclared node '" + bank + "'", ln);
          }
          if (sub.accounts[ai].bank) {
            throw ParseError("account '" + std::string(acct) + "' has two memberships", ln);
          }
          sub.accounts[ai].bank = BankId{bank};
          break;
        }
        const auto p = body.find(" transfers_to ");
        if (p == std::string_view::npos) throw ParseError("unknown relation in edge line", ln);
        TransferEdge e;
        e.id = static_cast<EdgeId>(sub.transfers.size());
        e.source = AccountId{std::string(body.substr(0, p))};
        e.dest = AccountId{std::string(body.substr(p + 14))};
        require_account(e.source.value, ln);
        require_account(e.dest.value, ln);

        const auto attribute = [&](std::string_view key) -> std::string_view {
          std::string_view attr;
          if (!cur.next(attr)) throw ParseError("missing '" + std::string(key) + "' line", cur.lineno + 1);
          if (attr.empty() || attr.front() != ' ') {
            throw ParseError("expected indented '" + std::string(key) + "' line", cur.lineno);
          }
          attr = trim_left(attr);
          if (!attr.starts_with(key) || attr.substr(key.size(), 2) != ": ") {
            throw ParseError("expected '" + std::string(key) + ":' attribute", cur.lineno);
          }
          return attr.substr(key.size() + 2);
        };
        const std::string_view amount = attribute("amount");
        const auto sp = amount.find(' ');
        if (sp == std::string_view::npos || sp + 1 >= amount.size()) {
          throw ParseError("amount needs a value and a currency", cur.lineno);
        }
        const auto cents = Money::try_parse_cents(amount.substr(0, sp));
        if (!cents) throw ParseError("unparseable amount '" + std::string(amount.substr(0, sp)) + "'", cur.lineno);
        e.paid = Money{*cents, std::string(amount.substr(sp + 1))};
        e.received = e.paid;
        const std::string_view via = attribute("via");
        if (via.empty()) throw ParseError("empty payment format", cur.lineno);
        e.payment_format = std::string(via);
        const std::string_view ts = attribute("timestamp");
        const auto t = Timestamp::try_parse(ts);
        if (!t) throw ParseError("unparseable timestamp '" + std::string(ts) + "'", cur.lineno);
        e.timestamp = *t;
        sub.transfers.push_back(std::move(e));
        break;
      }
    }
  }
  if (section == Section::Start) throw ParseError("missing **Nodes:** header", 1);
  if (section == Section::Nodes) throw ParseError("missing **Edges:** header", cur.lineno);

  if (focal) {
    const auto it = std::find_if(sub.transfers.begin(), sub.transfers.end(), [&](const TransferEdge& e) {
      return e.source.value == focal->src && e.dest.value == focal->dst && e.timestamp == focal->ts;
    });
    if (it == sub.transfers.end()) throw ParseError("focal marker names no listed transfer", focal->line);
    sub.focal_edge = *it;
  } else if (!sub.transfers.empty()) {
    sub.focal_edge = sub.transfers.front();
  }
  canonicalize(sub);
  return sub;
}

}  // namespace aml
