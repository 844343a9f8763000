#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hazardchat/cypher/ast.hpp"

namespace hazardchat::cypher {

enum class QueryErrorKind { SyntaxError, UnsupportedFeature, ExecutionLimit };

std::string_view to_string(QueryErrorKind kind) noexcept;

class QueryError : public std::runtime_error {
public:
    QueryError(QueryErrorKind kind, std::size_t position, const std::string& what)
        : std::runtime_error(what), kind_(kind), position_(position) {}

    QueryErrorKind kind() const noexcept { return kind_; }
    /// Byte offset into the query text.
    std::size_t position() const noexcept { return position_; }

private:
    QueryErrorKind kind_;
    std::size_t position_;
};

/// Parses the read-only subset described in docs/cypher_grammar.ebnf.
/// Throws QueryError (SyntaxError or UnsupportedFeature).
Query parse(std::string_view text);

}  // namespace hazardchat::cypher
