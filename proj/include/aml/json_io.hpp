#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "aml/eval.hpp"
#include "aml/subgraph.hpp"
#include "aml/typology.hpp"
#include "aml/verdict.hpp"

namespace aml {

using Json = nlohmann::ordered_json;

/// Amounts travel as decimal strings ("225756.22") so that no value passes
/// through floating point. Layouts are documented in docs/formats.md.
Json edge_to_json(const TransferEdge& e);
TransferEdge edge_from_json(const Json& j);

inline constexpr std::string_view kSubgraphSchema = "aml.subgraph/1";
Json subgraph_to_json(const Subgraph& s);
/// Throws ParseError on a missing field or bad value; validates the result.
Subgraph subgraph_from_json(const Json& j);

Json matches_to_json(std::span<const PatternMatch> matches);

Json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const Json& j);

Json outcome_to_json(const Outcome& o);
Outcome outcome_from_json(const Json& j);

Json bootstrap_to_json(const BootstrapResult& b);
BootstrapResult bootstrap_from_json(const Json& j);

Json report_to_json(const EvalReport& r);
EvalReport report_from_json(const Json& j);

/// Reads and parses a JSON file; IoError or ParseError on failure.
Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace aml
