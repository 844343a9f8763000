#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "hazardchat/cypher/executor.hpp"
#include "hazardchat/graph.hpp"
#include "hazardchat/rag.hpp"

namespace hazardchat {

using Json = nlohmann::ordered_json;

/// Strings, numbers and null map to themselves; nodes become
/// {label, key, properties}; edges {type, from, to, properties}.
Json to_json(const cypher::Value& value, const graph::PropertyGraph& graph);

/// {columns: [...], rows: [[...], ...]}
Json to_json(const cypher::ResultTable& table, const graph::PropertyGraph& graph);

Json to_json(const rag::ChatResponse& response, const graph::PropertyGraph& graph,
             const std::optional<std::string>& trace_id = std::nullopt);

Json to_json(const graph::GraphSchema& schema);

}  // namespace hazardchat
