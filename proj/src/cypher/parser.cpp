#include "hazardchat/cypher/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <map>
#include <regex>
#include <set>

#include "hazardchat/model.hpp"

namespace hazardchat::cypher {

namespace {

enum class Tok { Ident, QuotedIdent, String, Integer, Float, Symbol, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;  // identifier/symbol text, decoded string value, or number text
    std::size_t pos = 0;
};

[[noreturn]] void syntax(std::size_t pos, const std::string& what) {
    throw QueryError(QueryErrorKind::SyntaxError, pos, what);
}

[[noreturn]] void unsupported(std::size_t pos, const std::string& what) {
    throw QueryError(QueryErrorKind::UnsupportedFeature, pos, what);
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            const auto end = src.find("*/", i + 2);
            if (end == std::string_view::npos) syntax(i, "unterminated comment");
            i = end + 2;
            continue;
        }
        const std::size_t start = i;
        if (ident_start(c)) {
            while (i < src.size() && ident_char(src[i])) ++i;
            out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), start});
            continue;
        }
        if (c == '`') {
            const auto end = src.find('`', i + 1);
            if (end == std::string_view::npos) syntax(i, "unterminated quoted identifier");
            if (end == i + 1) syntax(i, "empty quoted identifier");
            out.push_back({Tok::QuotedIdent, std::string(src.substr(i + 1, end - i - 1)), start});
            i = end + 1;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            bool is_float = false;
            if (i + 1 < src.size() && src[i] == '.' && std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
                is_float = true;
                ++i;
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
                if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
                    is_float = true;
                    i = j;
                    while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
                }
            }
            if (i < src.size() && ident_char(src[i])) syntax(i, "invalid number literal");
            out.push_back({is_float ? Tok::Float : Tok::Integer, std::string(src.substr(start, i - start)), start});
            continue;
        }
        if (c == '\'' || c == '"') {
            std::string value;
            ++i;
            bool closed = false;
            while (i < src.size()) {
                const char d = src[i++];
                if (d == c) {
                    closed = true;
                    break;
                }
                if (d != '\\') {
                    value.push_back(d);
                    continue;
                }
                if (i >= src.size()) break;
                const char e = src[i++];
                switch (e) {
                    case '\\': value.push_back('\\'); break;
                    case '\'': value.push_back('\''); break;
                    case '"': value.push_back('"'); break;
                    case 'n': value.push_back('\n'); break;
                    case 't': value.push_back('\t'); break;
                    case 'r': value.push_back('\r'); break;
                    default: syntax(i - 2, std::string("unknown escape \\") + e);
                }
            }
            if (!closed) syntax(start, "unterminated string literal");
            out.push_back({Tok::String, std::move(value), start});
            continue;
        }
        static constexpr std::array<std::string_view, 5> kTwoChar{"<>", "!=", "=~", "<=", ">="};
        bool matched = false;
        for (auto sym : kTwoChar) {
            if (src.substr(i, 2) == sym) {
                out.push_back({Tok::Symbol, std::string(sym), start});
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        static constexpr std::string_view kOneChar = "()[]{}:,.-<>=*|;+/%^!~$";
        if (kOneChar.find(c) != std::string_view::npos) {
            out.push_back({Tok::Symbol, std::string(1, c), start});
            ++i;
            continue;
        }
        syntax(i, std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, "", src.size()});
    return out;
}

const std::set<std::string> kUnsupportedClauses{
    "create", "merge", "delete", "detach", "set",  "remove", "with",   "unwind", "optional", "call",
    "order",  "skip",  "union",  "load",   "foreach", "drop", "use",   "show",   "start",    "yield"};

const std::set<std::string> kReserved{"match", "where", "return", "distinct", "limit", "and", "or",
                                      "xor",   "not",   "contains", "as",     "true",  "false", "null",
                                      "in",    "is",    "starts",   "ends",   "case",  "exists"};

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(lex(text)) {}

    Query parse_query() {
        Query q;
        if (!keyword("match")) {
            if (peek().kind == Tok::Ident && kUnsupportedClauses.count(lower(peek().text)))
                unsupported(peek().pos, "clause " + upper(peek().text) + " is outside the read-only subset");
            if (peek().kind == Tok::End) syntax(peek().pos, "empty query");
            syntax(peek().pos, "expected MATCH");
        }
        do {
            do {
                q.patterns.push_back(parse_path());
            } while (accept(","));
        } while (keyword("match"));

        if (keyword("where")) q.where = parse_predicate();
        if (!keyword("return")) reject_or_expect("RETURN");
        return_pos_ = tokens_[index_ - 1].pos;
        q.distinct = keyword("distinct");
        do {
            q.items.push_back(parse_return_item());
        } while (accept(","));
        if (keyword("limit")) {
            const Token& t = next();
            if (t.kind != Tok::Integer) syntax(t.pos, "LIMIT expects a non-negative integer");
            q.limit = to_int(t);
        }
        accept(";");
        if (peek().kind != Tok::End) reject_or_expect("end of query");
        check_variables(q);
        return q;
    }

private:
    // --- token helpers ---

    const Token& peek(std::size_t ahead = 0) const {
        return tokens_[std::min(index_ + ahead, tokens_.size() - 1)];
    }
    const Token& next() {
        const Token& t = peek();
        if (index_ < tokens_.size() - 1) ++index_;
        return t;
    }
    bool is_symbol(std::string_view s, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Symbol && peek(ahead).text == s;
    }
    bool accept(std::string_view s) {
        if (!is_symbol(s)) return false;
        next();
        return true;
    }
    void expect(std::string_view s) {
        if (!accept(s)) syntax(peek().pos, "expected '" + std::string(s) + "'" + found());
    }
    bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Ident && lower(peek(ahead).text) == kw;
    }
    bool keyword(std::string_view kw) {
        if (!is_keyword(kw)) return false;
        next();
        return true;
    }
    std::string found() const {
        return peek().kind == Tok::End ? " but the query ended" : " near '" + peek().text + "'";
    }
    [[noreturn]] void reject_or_expect(const std::string& what) {
        const Token& t = peek();
        if (t.kind == Tok::Ident && kUnsupportedClauses.count(lower(t.text)))
            unsupported(t.pos, "clause " + upper(t.text) + " is outside the read-only subset");
        syntax(t.pos, "expected " + what + found());
    }

    static std::string lower(std::string_view s) { return to_lower_ascii(s); }
    static std::string upper(std::string_view s) {
        std::string out(s);
        for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return out;
    }

    std::string identifier(const char* what) {
        const Token& t = peek();
        if (t.kind == Tok::QuotedIdent) return next().text;
        if (t.kind == Tok::Ident && !kReserved.count(lower(t.text))) return next().text;
        syntax(t.pos, std::string("expected ") + what + found());
    }

    std::int64_t to_int(const Token& t) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size()) syntax(t.pos, "integer out of range");
        return v;
    }

    // --- patterns ---

    PathPattern parse_path() {
        PathPattern path;
        if (peek().kind == Tok::Ident && peek(1).kind == Tok::Symbol && peek(1).text == "=")
            unsupported(peek().pos, "named paths are outside the subset");
        path.nodes.push_back(parse_node());
        while (is_symbol("-") || is_symbol("<")) {
            path.rels.push_back(parse_rel());
            path.nodes.push_back(parse_node());
        }
        return path;
    }

    NodePattern parse_node() {
        expect("(");
        NodePattern node;
        if (peek().kind == Tok::Ident || peek().kind == Tok::QuotedIdent) {
            bindings_.emplace_back(peek().pos);
            node.variable = identifier("variable");
        }
        if (accept(":")) {
            node.label = identifier("label");
            if (is_symbol(":")) unsupported(peek().pos, "multiple labels are outside the subset");
        }
        if (is_symbol("{")) node.properties = parse_property_map();
        expect(")");
        return node;
    }

    RelPattern parse_rel() {
        RelPattern rel;
        const std::size_t start = peek().pos;
        bool left_arrow = false;
        if (accept("<")) left_arrow = true;
        expect("-");
        if (accept("[")) {
            if (peek().kind == Tok::Ident || peek().kind == Tok::QuotedIdent) {
                bindings_.emplace_back(peek().pos);
                rel.variable = identifier("variable");
            }
            if (accept(":")) {
                rel.type = identifier("relationship type");
                if (is_symbol("|")) unsupported(peek().pos, "relationship type alternatives are outside the subset");
            }
            if (is_symbol("*")) unsupported(peek().pos, "variable-length relationships are outside the subset");
            if (is_symbol("{")) rel.properties = parse_property_map();
            expect("]");
        }
        expect("-");
        const bool right_arrow = accept(">");
        if (left_arrow && right_arrow) syntax(start, "relationship cannot point both ways");
        rel.direction = left_arrow ? RelDirection::Left : right_arrow ? RelDirection::Right : RelDirection::Both;
        return rel;
    }

    PropertyMap parse_property_map() {
        expect("{");
        PropertyMap props;
        if (accept("}")) return props;
        do {
            std::string key = identifier("property key");
            expect(":");
            const std::size_t at = peek().pos;
            auto value = parse_literal();
            if (!value) syntax(at, "inline property values must be literals");
            for (const auto& [k, _] : props)
                if (k == key) syntax(at, "duplicate property key '" + key + "'");
            props.emplace_back(std::move(key), std::move(*value));
        } while (accept(","));
        expect("}");
        return props;
    }

    std::optional<Literal> parse_literal() {
        bool negative = false;
        if (is_symbol("-") && (peek(1).kind == Tok::Integer || peek(1).kind == Tok::Float)) {
            negative = true;
            next();
        }
        const Token& t = peek();
        switch (t.kind) {
            case Tok::String:
                if (negative) return std::nullopt;
                return Literal{next().text};
            case Tok::Integer: {
                next();
                if (negative) {
                    std::int64_t v = 0;
                    const std::string text = "-" + t.text;
                    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
                    if (ec != std::errc() || ptr != text.data() + text.size()) syntax(t.pos, "integer out of range");
                    return Literal{v};
                }
                return Literal{to_int(t)};
            }
            case Tok::Float: {
                next();
                double v = 0;
                auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
                if (ec != std::errc()) syntax(t.pos, "float literal out of range");
                return Literal{negative ? -v : v};
            }
            default:
                if (t.kind == Tok::Ident) {
                    const auto kw = lower(t.text);
                    if (kw == "true" || kw == "false" || kw == "null")
                        unsupported(t.pos, upper(kw) + " literals are outside the subset");
                }
                return std::nullopt;
        }
    }

    // --- expressions ---

    Expr parse_predicate() {
        const std::size_t at = peek().pos;
        Expr e = parse_or();
        if (!e.is_predicate()) syntax(at, "expected a boolean condition");
        return e;
    }

    Expr require_predicate(Expr e, std::size_t at) {
        if (!e.is_predicate()) syntax(at, "boolean operators need conditions on both sides");
        return e;
    }

    Expr parse_or() {
        std::size_t at = peek().pos;
        Expr lhs = parse_xor();
        while (is_keyword("or")) {
            require_predicate(lhs, at);
            next();
            at = peek().pos;
            Expr rhs = require_predicate(parse_xor(), at);
            lhs = Expr::logical(Expr::Kind::Or, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    Expr parse_xor() {
        std::size_t at = peek().pos;
        Expr lhs = parse_and();
        while (is_keyword("xor")) {
            require_predicate(lhs, at);
            next();
            at = peek().pos;
            Expr rhs = require_predicate(parse_and(), at);
            lhs = Expr::logical(Expr::Kind::Xor, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    Expr parse_and() {
        std::size_t at = peek().pos;
        Expr lhs = parse_not();
        while (is_keyword("and")) {
            require_predicate(lhs, at);
            next();
            at = peek().pos;
            Expr rhs = require_predicate(parse_not(), at);
            lhs = Expr::logical(Expr::Kind::And, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    Expr parse_not() {
        if (keyword("not")) {
            const std::size_t at = peek().pos;
            return Expr::logical(Expr::Kind::Not, {require_predicate(parse_not(), at)});
        }
        return parse_comparison();
    }

    Expr parse_comparison() {
        if (is_symbol("(")) {
            // Parenthesised condition.
            next();
            const std::size_t at = peek().pos;
            Expr inner = parse_or();
            expect(")");
            if (!inner.is_predicate()) syntax(at, "parentheses must enclose a condition");
            return inner;
        }
        const std::size_t at = peek().pos;
        Expr lhs = parse_value();
        std::optional<CompareOp> op;
        const Token& t = peek();
        if (t.kind == Tok::Symbol) {
            if (t.text == "=") op = CompareOp::Eq;
            else if (t.text == "<>" || t.text == "!=") op = CompareOp::Ne;
            else if (t.text == "=~") op = CompareOp::Regex;
            else if (t.text == "<" || t.text == ">" || t.text == "<=" || t.text == ">=")
                unsupported(t.pos, "ordering comparisons are outside the subset");
        } else if (t.kind == Tok::Ident) {
            const auto kw = lower(t.text);
            if (kw == "contains") op = CompareOp::Contains;
            else if (kw == "starts" || kw == "ends" || kw == "in" || kw == "is")
                unsupported(t.pos, upper(kw) + " predicates are outside the subset");
        }
        if (!op) syntax(at, "expected a comparison (=, <>, CONTAINS, =~)" + found());
        next();
        const std::size_t rhs_at = peek().pos;
        Expr rhs = parse_value();
        if (*op == CompareOp::Regex) {
            if (rhs.kind != Expr::Kind::Literal || !std::holds_alternative<std::string>(rhs.literal.value))
                unsupported(rhs_at, "regular expressions must be string literals");
            check_regex(std::get<std::string>(rhs.literal.value), rhs_at);
        }
        const Token& after = peek();
        if (after.kind == Tok::Symbol &&
            (after.text == "=" || after.text == "<>" || after.text == "!=" || after.text == "=~"))
            syntax(after.pos, "chained comparisons are not allowed");
        if (after.kind == Tok::Ident && lower(after.text) == "contains")
            syntax(after.pos, "chained comparisons are not allowed");
        return Expr::compare(*op, std::move(lhs), std::move(rhs));
    }

    static void check_regex(const std::string& pattern, std::size_t at) {
        std::string body = pattern;
        auto flags = std::regex::ECMAScript;
        if (body.rfind("(?i)", 0) == 0) {
            body = body.substr(4);
            flags |= std::regex::icase;
        }
        try {
            std::regex re(body, flags);
        } catch (const std::regex_error& ex) {
            syntax(at, std::string("invalid regular expression: ") + ex.what());
        }
    }

    Expr parse_value() {
        const Token& t = peek();
        if (auto lit = parse_literal()) return Expr::literal_of(std::move(*lit));
        if (t.kind == Tok::Symbol && t.text == "(") syntax(t.pos, "parentheses are only allowed around conditions");
        if (t.kind == Tok::Symbol && t.text == "*") unsupported(t.pos, "RETURN * is outside the subset");
        if (t.kind == Tok::Symbol && (t.text == "[" || t.text == "{" || t.text == "$"))
            unsupported(t.pos, "lists, maps and parameters are outside the subset");
        if (t.kind != Tok::Ident && t.kind != Tok::QuotedIdent) syntax(t.pos, "expected a value" + found());

        if (t.kind == Tok::Ident && is_symbol("(", 1)) {
            const std::string fn = lower(t.text);
            if (fn != "tolower") unsupported(t.pos, "function " + t.text + "() is outside the subset");
            next();
            next();
            Expr arg = parse_value();
            if (is_symbol(",")) syntax(peek().pos, "toLower takes one argument");
            expect(")");
            return Expr::function("toLower", {std::move(arg)});
        }
        if (t.kind == Tok::Ident && lower(t.text) == "case") unsupported(t.pos, "CASE expressions are outside the subset");
        references_.emplace_back(t.text, t.pos);
        std::string var = identifier("variable");
        if (accept(".")) {
            std::string key = identifier("property key");
            return Expr::property_of(std::move(var), std::move(key));
        }
        return Expr::variable(std::move(var));
    }

    ReturnItem parse_return_item() {
        const std::size_t at = peek().pos;
        ReturnItem item{parse_value(), std::nullopt};
        if (item.expr.is_predicate()) syntax(at, "RETURN items must be values");
        if (keyword("as")) item.alias = identifier("alias");
        return item;
    }

    // --- semantic checks ---

    void check_variables(const Query& q) {
        std::map<std::string, bool> is_node;  // name -> node (true) / relationship (false)
        std::size_t binding = 0;
        for (const auto& path : q.patterns) {
            // Node and relationship bindings interleave in source order.
            for (std::size_t i = 0; i < path.nodes.size(); ++i) {
                if (i > 0 && !path.rels[i - 1].variable.empty()) {
                    const auto& r = path.rels[i - 1];
                    const auto pos = bindings_.at(binding++);
                    if (!is_node.emplace(r.variable, false).second)
                        syntax(pos, "relationship variable `" + r.variable + "` is bound more than once");
                }
                const auto& n = path.nodes[i];
                if (n.variable.empty()) continue;
                const auto pos = bindings_.at(binding++);
                auto [it, inserted] = is_node.emplace(n.variable, true);
                if (!inserted && !it->second)
                    syntax(pos, "variable `" + n.variable + "` is used for both a node and a relationship");
            }
        }
        for (const auto& [name, pos] : references_)
            if (!is_node.count(name)) syntax(pos, "variable `" + name + "` is not defined in MATCH");
        std::set<std::string> columns;
        for (const auto& item : q.items) {
            if (!columns.insert(column_name(item)).second)
                syntax(return_pos_, "duplicate RETURN column '" + column_name(item) + "'");
        }
    }

    std::vector<Token> tokens_;
    std::size_t index_ = 0;
    std::vector<std::size_t> bindings_;                          // pattern variable positions
    std::vector<std::pair<std::string, std::size_t>> references_;  // WHERE/RETURN variable uses
    std::size_t return_pos_ = 0;
};

}  // namespace

std::string_view to_string(QueryErrorKind kind) noexcept {
    switch (kind) {
        case QueryErrorKind::SyntaxError: return "SyntaxError";
        case QueryErrorKind::UnsupportedFeature: return "UnsupportedFeature";
        case QueryErrorKind::ExecutionLimit: return "ExecutionLimit";
    }
    return "?";
}

Query parse(std::string_view text) { return Parser(text).parse_query(); }

}  // namespace hazardchat::cypher
