#include <array>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "hazardchat/cypher/ast.hpp"
#include "hazardchat/model.hpp"

namespace hazardchat::cypher {

Expr Expr::literal_of(Literal value) {
    Expr e;
    e.kind = Kind::Literal;
    e.literal = std::move(value);
    return e;
}

Expr Expr::variable(std::string var) {
    Expr e;
    e.kind = Kind::Variable;
    e.name = std::move(var);
    return e;
}

Expr Expr::property_of(std::string var, std::string key) {
    Expr e;
    e.kind = Kind::Property;
    e.name = std::move(var);
    e.property = std::move(key);
    return e;
}

Expr Expr::function(std::string fn, std::vector<Expr> args) {
    Expr e;
    e.kind = Kind::Function;
    e.name = std::move(fn);
    e.args = std::move(args);
    return e;
}

Expr Expr::compare(CompareOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Kind::Compare;
    e.op = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

Expr Expr::logical(Kind kind, std::vector<Expr> args) {
    Expr e;
    e.kind = kind;
    e.args = std::move(args);
    return e;
}

namespace {

const std::set<std::string> kNeedsQuoting{"match", "where", "return", "distinct", "limit", "and", "or",
                                          "xor",   "not",   "contains", "as",     "true",  "false", "null",
                                          "in",    "is",    "starts",   "ends",   "case",  "exists"};

std::string ident(const std::string& name) {
    bool plain = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
    for (char c : name) plain = plain && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
    if (plain && !kNeedsQuoting.count(to_lower_ascii(name))) return name;
    return "`" + name + "`";
}

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\'': out += "\\'"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    out.push_back('\'');
    return out;
}

std::string literal_text(const Literal& lit) {
    if (const auto* s = std::get_if<std::string>(&lit.value)) return quote(*s);
    if (const auto* i = std::get_if<std::int64_t>(&lit.value)) return std::to_string(*i);
    std::array<char, 64> buf{};
    const double d = std::get<double>(lit.value);
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
    std::string text(buf.data(), ptr);
    if (text.find_first_of(".e") == std::string::npos) text += ".0";
    return text;
}

std::string properties_text(const PropertyMap& props) {
    std::string out = "{";
    for (std::size_t i = 0; i < props.size(); ++i) {
        if (i) out += ", ";
        out += ident(props[i].first) + ": " + literal_text(props[i].second);
    }
    return out + "}";
}

int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Or: return 1;
        case Expr::Kind::Xor: return 2;
        case Expr::Kind::And: return 3;
        case Expr::Kind::Not: return 4;
        case Expr::Kind::Compare: return 5;
        default: return 6;
    }
}

void print(const Expr& e, std::ostringstream& out) {
    const auto child = [&](const Expr& c, bool right_operand) {
        const bool parens = precedence(c) < precedence(e) ||
                            (right_operand && precedence(c) == precedence(e) && c.kind != Expr::Kind::Not);
        if (parens) out << '(';
        print(c, out);
        if (parens) out << ')';
    };
    switch (e.kind) {
        case Expr::Kind::Literal: out << literal_text(e.literal); break;
        case Expr::Kind::Variable: out << ident(e.name); break;
        case Expr::Kind::Property: out << ident(e.name) << '.' << ident(e.property); break;
        case Expr::Kind::Function:
            out << e.name << '(';
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out << ", ";
                print(e.args[i], out);
            }
            out << ')';
            break;
        case Expr::Kind::Compare: {
            print(e.args[0], out);
            switch (e.op) {
                case CompareOp::Eq: out << " = "; break;
                case CompareOp::Ne: out << " <> "; break;
                case CompareOp::Contains: out << " CONTAINS "; break;
                case CompareOp::Regex: out << " =~ "; break;
            }
            print(e.args[1], out);
            break;
        }
        case Expr::Kind::Not:
            out << "NOT ";
            child(e.args[0], false);
            break;
        case Expr::Kind::And:
        case Expr::Kind::Or:
        case Expr::Kind::Xor: {
            const char* op = e.kind == Expr::Kind::And ? " AND " : e.kind == Expr::Kind::Or ? " OR " : " XOR ";
            child(e.args[0], false);
            out << op;
            child(e.args[1], true);
            break;
        }
    }
}

void print(const NodePattern& n, std::ostringstream& out) {
    out << '(';
    if (!n.variable.empty()) out << ident(n.variable);
    if (n.label) out << ':' << ident(*n.label);
    if (!n.properties.empty()) out << ((n.variable.empty() && !n.label) ? "" : " ") << properties_text(n.properties);
    out << ')';
}

void print(const RelPattern& r, std::ostringstream& out) {
    out << (r.direction == RelDirection::Left ? "<-" : "-");
    const bool bracket = !r.variable.empty() || r.type || !r.properties.empty();
    if (bracket) {
        out << '[';
        if (!r.variable.empty()) out << ident(r.variable);
        if (r.type) out << ':' << ident(*r.type);
        if (!r.properties.empty()) out << ((r.variable.empty() && !r.type) ? "" : " ") << properties_text(r.properties);
        out << ']';
    }
    out << (r.direction == RelDirection::Right ? "->" : "-");
}

}  // namespace

std::string to_cypher(const Expr& expr) {
    std::ostringstream out;
    print(expr, out);
    return out.str();
}

std::string column_name(const ReturnItem& item) { return item.alias ? *item.alias : to_cypher(item.expr); }

std::string to_cypher(const Query& q) {
    std::ostringstream out;
    out << "MATCH ";
    for (std::size_t p = 0; p < q.patterns.size(); ++p) {
        if (p) out << ", ";
        const auto& path = q.patterns[p];
        print(path.nodes[0], out);
        for (std::size_t i = 0; i < path.rels.size(); ++i) {
            print(path.rels[i], out);
            print(path.nodes[i + 1], out);
        }
    }
    if (q.where) {
        out << " WHERE ";
        print(*q.where, out);
    }
    out << " RETURN ";
    if (q.distinct) out << "DISTINCT ";
    for (std::size_t i = 0; i < q.items.size(); ++i) {
        if (i) out << ", ";
        print(q.items[i].expr, out);
        if (q.items[i].alias) out << " AS " << ident(*q.items[i].alias);
    }
    if (q.limit) out << " LIMIT " << *q.limit;
    return out.str();
}

}  // namespace hazardchat::cypher
