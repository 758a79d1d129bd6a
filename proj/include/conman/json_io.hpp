#pragma once

// JSON forms of the documents the engine reads and writes. Parsers are
// strict: unknown keys, wrong types and unknown enum names are SchemaError.

#include <string_view>

#include "json.hpp"

#include "conman/channel.hpp"
#include "conman/context.hpp"
#include "conman/cost.hpp"
#include "conman/policy.hpp"

namespace conman {

using ojson = nlohmann::ordered_json;

/// Parses text into a JSON value; SyntaxError on malformed input.
nlohmann::json parse_json_text(std::string_view text);

/// {"policies": [...]}; validates each policy, ValidationError aggregates violations.
PolicySet policy_set_from_json(const nlohmann::json& doc);

/// [{"factor","lo","hi","direction","end_to_end"}] merged over the built-in ranges.
FactorCatalog catalog_from_json(const nlohmann::json& arr);
/// [{"from","to","delay_ms"}]
DelayTable delays_from_json(const nlohmann::json& arr, bool use_default_delays);
/// {"min_throughput","max_delay","max_cost_rate","max_disruption","min_acceptable"}
QoSRequirement qos_from_json(const nlohmann::json& obj);

/// Host view as used by snapshot files.
HostContextView view_from_json(const nlohmann::json& obj);
ojson to_json(const HostContextView& view);

/// {"shape","rows","cols","entries"}; INFINITE entries are the string "inf".
ojson to_json(const CostMatrix& m);
ojson to_json(InterfacePair p);
ojson to_json(const Policy& p);

}  // namespace conman
