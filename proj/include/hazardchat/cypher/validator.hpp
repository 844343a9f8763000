#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hazardchat/cypher/ast.hpp"
#include "hazardchat/graph.hpp"

namespace hazardchat::cypher {

enum class DiagnosticCode {
    UnknownLabel,
    UnknownEdgeType,
    UnknownProperty,
    DirectionMismatch,
    EndpointMismatch,
    LabelConflict,
};

std::string_view to_string(DiagnosticCode code) noexcept;

struct Diagnostic {
    DiagnosticCode code;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Checks labels, relationship types, property keys and relationship
/// directions against the schema. Empty result means the query is valid.
std::vector<Diagnostic> validate(const Query& query, const graph::GraphSchema& schema);

}  // namespace hazardchat::cypher
