#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <compare>
#include <string>
#include <variant>
#include <vector>

#include "hazardchat/cypher/ast.hpp"
#include "hazardchat/graph.hpp"

namespace hazardchat::cypher {

struct NodeValue {
    graph::NodeId id;
    friend auto operator<=>(const NodeValue&, const NodeValue&) = default;
};

struct EdgeValue {
    graph::EdgeId id;
    friend auto operator<=>(const EdgeValue&, const EdgeValue&) = default;
};

struct Null {
    friend auto operator<=>(const Null&, const Null&) = default;
};

/// One cell of a result row. Variant order defines the cross-type sort order.
using Value = std::variant<Null, std::int64_t, double, std::string, NodeValue, EdgeValue>;

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;  // sorted ascending, tuple-wise

    friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

struct ExecutionLimits {
    std::size_t max_rows = 10'000;
    std::chrono::milliseconds time_budget{2000};
};

/// Runs a parsed query against a read-only graph. Throws
/// QueryError(ExecutionLimit) when the row cap or time budget is exceeded.
ResultTable execute(const Query& query, const graph::PropertyGraph& graph, const ExecutionLimits& limits = {});

/// Total order used for sorting and DISTINCT.
bool value_less(const Value& a, const Value& b);

/// Strings raw, numbers in shortest form, nodes as `(:Label {k: 'v', ...})`.
std::string render_value(const Value& value, const graph::PropertyGraph& graph);

/// Aligned plain-text table: header, dashed rule, one line per row.
std::string render_table(const ResultTable& table, const graph::PropertyGraph& graph);

}  // namespace hazardchat::cypher
