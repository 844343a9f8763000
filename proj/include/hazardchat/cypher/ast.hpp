#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hazardchat::cypher {

struct Literal {
    std::variant<std::string, std::int64_t, double> value;

    friend bool operator==(const Literal&, const Literal&) = default;
};

using PropertyMap = std::vector<std::pair<std::string, Literal>>;

struct NodePattern {
    std::string variable;  // empty when anonymous
    std::optional<std::string> label;
    PropertyMap properties;

    friend bool operator==(const NodePattern&, const NodePattern&) = default;
};

enum class RelDirection {
    Right,  // (a)-[]->(b)
    Left,   // (a)<-[]-(b)
    Both,   // (a)-[]-(b)
};

struct RelPattern {
    std::string variable;
    std::optional<std::string> type;
    RelDirection direction = RelDirection::Right;
    PropertyMap properties;

    friend bool operator==(const RelPattern&, const RelPattern&) = default;
};

/// A linear chain: nodes[i] -rels[i]- nodes[i+1].
struct PathPattern {
    std::vector<NodePattern> nodes;
    std::vector<RelPattern> rels;

    friend bool operator==(const PathPattern&, const PathPattern&) = default;
};

enum class CompareOp { Eq, Ne, Contains, Regex };

struct Expr {
    enum class Kind { Literal, Variable, Property, Function, Compare, And, Or, Xor, Not };

    Kind kind = Kind::Literal;
    Literal literal;       // Literal
    std::string name;      // Variable / Property: variable name; Function: canonical function name
    std::string property;  // Property
    CompareOp op = CompareOp::Eq;
    std::vector<Expr> args;  // operands, in source order

    bool is_predicate() const noexcept {
        return kind == Kind::Compare || kind == Kind::And || kind == Kind::Or || kind == Kind::Xor ||
               kind == Kind::Not;
    }

    static Expr literal_of(Literal value);
    static Expr variable(std::string var);
    static Expr property_of(std::string var, std::string key);
    static Expr function(std::string fn, std::vector<Expr> args);
    static Expr compare(CompareOp op, Expr lhs, Expr rhs);
    static Expr logical(Kind kind, std::vector<Expr> args);

    friend bool operator==(const Expr&, const Expr&) = default;
};

struct ReturnItem {
    Expr expr;
    std::optional<std::string> alias;

    friend bool operator==(const ReturnItem&, const ReturnItem&) = default;
};

struct Query {
    std::vector<PathPattern> patterns;
    std::optional<Expr> where;
    bool distinct = false;
    std::vector<ReturnItem> items;
    std::optional<std::int64_t> limit;

    friend bool operator==(const Query&, const Query&) = default;
};

/// Canonical single-line text; parse(to_cypher(q)) == q.
std::string to_cypher(const Query& query);
std::string to_cypher(const Expr& expr);

/// Column header for a RETURN item: the alias, else the printed expression.
std::string column_name(const ReturnItem& item);

}  // namespace hazardchat::cypher
