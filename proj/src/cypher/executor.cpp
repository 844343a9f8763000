#include "hazardchat/cypher/executor.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <regex>
#include <sstream>

#include "hazardchat/cypher/parser.hpp"
#include "hazardchat/model.hpp"

namespace hazardchat::cypher {

namespace {

using graph::Edge;
using graph::EdgeId;
using graph::Node;
using graph::NodeId;
using graph::PropertyGraph;

enum class Truth { False, True, Unknown };

Truth from_bool(bool b) { return b ? Truth::True : Truth::False; }

Value literal_value(const Literal& lit) {
    return std::visit([](const auto& v) -> Value { return v; }, lit.value);
}

std::optional<double> as_number(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* s = std::get_if<std::string>(&v)) {
        double out = 0;
        const char* first = s->data();
        const char* last = first + s->size();
        if (first != last && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec == std::errc() && ptr == last && first != last) return out;
    }
    return std::nullopt;
}

bool is_number(const Value& v) { return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v); }

Truth equals(const Value& a, const Value& b) {
    if (std::holds_alternative<Null>(a) || std::holds_alternative<Null>(b)) return Truth::Unknown;
    if (is_number(a) || is_number(b)) {
        const auto x = as_number(a);
        const auto y = as_number(b);
        if (!x || !y) {
            // A number against a node/relationship is simply unequal; against
            // an unparsable string it is unknown.
            const bool string_side = std::holds_alternative<std::string>(a) || std::holds_alternative<std::string>(b);
            return string_side ? Truth::Unknown : Truth::False;
        }
        return from_bool(*x == *y);
    }
    if (a.index() != b.index()) return Truth::False;
    return from_bool(a == b);
}

struct Regex {
    std::regex re;
};

Regex compile_regex(const std::string& pattern) {
    std::string body = pattern;
    auto flags = std::regex::ECMAScript;
    if (body.rfind("(?i)", 0) == 0) {
        body = body.substr(4);
        flags |= std::regex::icase;
    }
    return Regex{std::regex(body, flags)};
}

struct Slot {
    bool is_node = true;
};

class Executor {
public:
    Executor(const Query& q, const PropertyGraph& g, const ExecutionLimits& limits)
        : query_(q), graph_(g), limits_(limits), deadline_(std::chrono::steady_clock::now() + limits.time_budget) {
        for (const auto& path : q.patterns) {
            for (const auto& n : path.nodes) slot_for(n.variable, true);
            for (const auto& r : path.rels) slot_for(r.variable, false);
        }
        // Anonymous elements get private slots, assigned in pattern order.
        for (const auto& path : q.patterns) {
            std::vector<std::size_t> node_slots, rel_slots;
            for (const auto& n : path.nodes) node_slots.push_back(n.variable.empty() ? new_slot(true) : named_.at(n.variable));
            for (const auto& r : path.rels) rel_slots.push_back(r.variable.empty() ? new_slot(false) : named_.at(r.variable));
            node_slots_.push_back(std::move(node_slots));
            rel_slots_.push_back(std::move(rel_slots));
        }
        binding_.assign(slots_.size(), kUnbound);
        prepare_regexes(q.where ? &*q.where : nullptr);
        for (const auto& item : q.items) prepare_regexes(&item.expr);
    }

    ResultTable run() {
        ResultTable table;
        for (const auto& item : query_.items) table.columns.push_back(column_name(item));
        match_pattern(0, table);
        std::sort(table.rows.begin(), table.rows.end());
        if (query_.distinct) table.rows.erase(std::unique(table.rows.begin(), table.rows.end()), table.rows.end());
        if (query_.limit) {
            const auto limit = static_cast<std::size_t>(std::max<std::int64_t>(0, *query_.limit));
            if (table.rows.size() > limit) table.rows.resize(limit);
        }
        return table;
    }

private:
    static constexpr std::int64_t kUnbound = -1;

    void slot_for(const std::string& name, bool is_node) {
        if (name.empty() || named_.count(name)) return;
        named_.emplace(name, new_slot(is_node));
    }

    std::size_t new_slot(bool is_node) {
        slots_.push_back(Slot{is_node});
        return slots_.size() - 1;
    }

    void prepare_regexes(const Expr* e) {
        if (!e) return;
        if (e->kind == Expr::Kind::Compare && e->op == CompareOp::Regex &&
            e->args[1].kind == Expr::Kind::Literal) {
            if (const auto* s = std::get_if<std::string>(&e->args[1].literal.value)) {
                try {
                    regexes_.emplace(e, compile_regex(*s));
                } catch (const std::regex_error&) {
                    // Left uncompiled; evaluates to unknown.
                }
            }
        }
        for (const auto& a : e->args) prepare_regexes(&a);
    }

    void tick() {
        if ((++steps_ & 0x3FF) == 0 && std::chrono::steady_clock::now() > deadline_)
            throw QueryError(QueryErrorKind::ExecutionLimit, 0, "query exceeded its time budget");
    }

    bool props_match(const graph::Properties& have, const PropertyMap& want) const {
        for (const auto& [key, lit] : want) {
            auto it = have.find(key);
            if (it == have.end()) return false;
            if (equals(Value{it->second}, literal_value(lit)) != Truth::True) return false;
        }
        return true;
    }

    bool node_fits(const NodePattern& p, std::size_t slot, NodeId id) const {
        const Node& n = graph_.node(id);
        if (p.label && graph::to_string(n.label) != *p.label) return false;
        if (binding_[slot] != kUnbound && binding_[slot] != static_cast<std::int64_t>(id)) return false;
        return props_match(n.properties, p.properties);
    }

    bool edge_used(EdgeId id) const {
        for (std::size_t s = 0; s < slots_.size(); ++s)
            if (!slots_[s].is_node && binding_[s] == static_cast<std::int64_t>(id)) return true;
        return false;
    }

    std::vector<NodeId> start_candidates(const NodePattern& p, std::size_t slot) const {
        if (binding_[slot] != kUnbound) return {static_cast<NodeId>(binding_[slot])};
        if (p.label) {
            const auto label = graph::parse_label(*p.label);
            if (!label) return {};
            const auto name_key = graph::name_property(*label);
            for (const auto& [key, lit] : p.properties) {
                if (key != name_key) continue;
                if (const auto* s = std::get_if<std::string>(&lit.value)) {
                    std::vector<NodeId> ids;
                    for (const auto* n : graph_.lookup_by_name(*label, *s, false)) ids.push_back(n->id);
                    return ids;
                }
            }
            return graph_.nodes_with_label(*label);
        }
        std::vector<NodeId> all(graph_.node_count());
        for (NodeId i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }

    // Estimated candidate count for starting the traversal at `index`.
    std::size_t start_cost(const PathPattern& path, const std::vector<std::size_t>& slots, std::size_t index) const {
        const auto& p = path.nodes[index];
        if (binding_[slots[index]] != kUnbound) return 0;
        if (p.label) {
            const auto label = graph::parse_label(*p.label);
            if (!label) return 0;
            for (const auto& [key, lit] : p.properties)
                if (key == graph::name_property(*label) && std::holds_alternative<std::string>(lit.value))
                    return graph_.lookup_by_name(*label, std::get<std::string>(lit.value), false).size();
            return graph_.nodes_with_label(*label).size();
        }
        return graph_.node_count() + 1;
    }

    void match_pattern(std::size_t pattern, ResultTable& table) {
        if (pattern == query_.patterns.size()) {
            emit(table);
            return;
        }
        const auto& path = query_.patterns[pattern];
        const auto& slots = node_slots_[pattern];
        std::size_t start = 0;
        std::size_t best = start_cost(path, slots, 0);
        for (std::size_t i = 1; i < path.nodes.size(); ++i) {
            const auto cost = start_cost(path, slots, i);
            if (cost < best) {
                best = cost;
                start = i;
            }
        }
        for (NodeId id : start_candidates(path.nodes[start], slots[start])) {
            tick();
            if (!node_fits(path.nodes[start], slots[start], id)) continue;
            const auto saved = binding_[slots[start]];
            binding_[slots[start]] = id;
            extend(pattern, start, start, table);
            binding_[slots[start]] = saved;
        }
    }

    // Bound positions [lo, hi]; grow right until the end, then left.
    void extend(std::size_t pattern, std::size_t lo, std::size_t hi, ResultTable& table) {
        const auto& path = query_.patterns[pattern];
        const bool grow_right = hi + 1 < path.nodes.size();
        if (!grow_right && lo == 0) {
            match_pattern(pattern + 1, table);
            return;
        }
        const std::size_t rel_index = grow_right ? hi : lo - 1;
        const std::size_t from_pos = grow_right ? hi : lo;
        const std::size_t to_pos = grow_right ? hi + 1 : lo - 1;
        const auto& rel = path.rels[rel_index];
        const auto rel_slot = rel_slots_[pattern][rel_index];
        const auto to_slot = node_slots_[pattern][to_pos];
        const auto from_id = static_cast<NodeId>(binding_[node_slots_[pattern][from_pos]]);

        // Edge orientation relative to the chain: Right means nodes[i] -> nodes[i+1].
        const bool edge_left_to_right = rel.direction == RelDirection::Right;
        const bool any_orientation = rel.direction == RelDirection::Both;
        // When growing right we stand on nodes[i]; an edge pointing right leaves us.
        const bool leaves_us = grow_right ? edge_left_to_right : !edge_left_to_right;

        const auto try_edge = [&](EdgeId eid, NodeId other) {
            tick();
            const Edge& e = graph_.edge(eid);
            if (rel.type && graph::to_string(e.type) != *rel.type) return;
            if (edge_used(eid)) return;
            if (!props_match(e.properties, rel.properties)) return;
            if (!node_fits(path.nodes[to_pos], to_slot, other)) return;
            const auto saved_node = binding_[to_slot];
            binding_[rel_slot] = eid;
            binding_[to_slot] = other;
            extend(pattern, grow_right ? lo : lo - 1, grow_right ? hi + 1 : hi, table);
            binding_[to_slot] = saved_node;
            binding_[rel_slot] = kUnbound;
        };

        if (any_orientation || leaves_us)
            for (EdgeId eid : graph_.out_edges(from_id)) try_edge(eid, graph_.edge(eid).to);
        if (any_orientation || !leaves_us)
            for (EdgeId eid : graph_.in_edges(from_id)) {
                const Edge& e = graph_.edge(eid);
                if (any_orientation && e.from == e.to) continue;  // already seen as outgoing
                try_edge(eid, e.from);
            }
    }

    Value eval(const Expr& e) const {
        switch (e.kind) {
            case Expr::Kind::Literal: return literal_value(e.literal);
            case Expr::Kind::Variable: {
                const auto slot = named_.at(e.name);
                const auto id = binding_[slot];
                if (slots_[slot].is_node) return NodeValue{static_cast<NodeId>(id)};
                return EdgeValue{static_cast<EdgeId>(id)};
            }
            case Expr::Kind::Property: {
                const auto slot = named_.at(e.name);
                const auto id = binding_[slot];
                const auto& props = slots_[slot].is_node ? graph_.node(static_cast<NodeId>(id)).properties
                                                         : graph_.edge(static_cast<EdgeId>(id)).properties;
                auto it = props.find(e.property);
                if (it == props.end()) return Null{};
                return it->second;
            }
            case Expr::Kind::Function: {
                const Value arg = eval(e.args[0]);
                if (const auto* s = std::get_if<std::string>(&arg)) return to_lower_ascii(*s);
                return Null{};
            }
            default: {
                const Truth t = test(e);
                // Predicates never appear as values in the subset grammar.
                return t == Truth::Unknown ? Value{Null{}} : Value{std::int64_t{t == Truth::True}};
            }
        }
    }

    Truth test(const Expr& e) const {
        switch (e.kind) {
            case Expr::Kind::Not: {
                const Truth t = test(e.args[0]);
                return t == Truth::Unknown ? t : from_bool(t == Truth::False);
            }
            case Expr::Kind::And: {
                const Truth a = test(e.args[0]);
                if (a == Truth::False) return a;
                const Truth b = test(e.args[1]);
                if (b == Truth::False) return b;
                return (a == Truth::Unknown || b == Truth::Unknown) ? Truth::Unknown : Truth::True;
            }
            case Expr::Kind::Or: {
                const Truth a = test(e.args[0]);
                if (a == Truth::True) return a;
                const Truth b = test(e.args[1]);
                if (b == Truth::True) return b;
                return (a == Truth::Unknown || b == Truth::Unknown) ? Truth::Unknown : Truth::False;
            }
            case Expr::Kind::Xor: {
                const Truth a = test(e.args[0]);
                const Truth b = test(e.args[1]);
                if (a == Truth::Unknown || b == Truth::Unknown) return Truth::Unknown;
                return from_bool(a != b);
            }
            case Expr::Kind::Compare: return compare(e);
            default: return Truth::Unknown;
        }
    }

    Truth compare(const Expr& e) const {
        const Value lhs = eval(e.args[0]);
        const Value rhs = eval(e.args[1]);
        switch (e.op) {
            case CompareOp::Eq: return equals(lhs, rhs);
            case CompareOp::Ne: {
                const Truth t = equals(lhs, rhs);
                return t == Truth::Unknown ? t : from_bool(t == Truth::False);
            }
            case CompareOp::Contains: {
                const auto* a = std::get_if<std::string>(&lhs);
                const auto* b = std::get_if<std::string>(&rhs);
                if (!a || !b) return Truth::Unknown;
                return from_bool(to_lower_ascii(*a).find(to_lower_ascii(*b)) != std::string::npos);
            }
            case CompareOp::Regex: {
                const auto* a = std::get_if<std::string>(&lhs);
                auto re = regexes_.find(&e);
                if (!a || re == regexes_.end()) return Truth::Unknown;
                return from_bool(std::regex_match(*a, re->second.re));
            }
        }
        return Truth::Unknown;
    }

    void emit(ResultTable& table) {
        if (query_.where && test(*query_.where) != Truth::True) return;
        if (table.rows.size() >= limits_.max_rows)
            throw QueryError(QueryErrorKind::ExecutionLimit, 0,
                             "query produced more than " + std::to_string(limits_.max_rows) + " rows");
        std::vector<Value> row;
        row.reserve(query_.items.size());
        for (const auto& item : query_.items) row.push_back(eval(item.expr));
        table.rows.push_back(std::move(row));
    }

    const Query& query_;
    const PropertyGraph& graph_;
    ExecutionLimits limits_;
    std::chrono::steady_clock::time_point deadline_;
    std::size_t steps_ = 0;

    std::vector<Slot> slots_;
    std::map<std::string, std::size_t> named_;
    std::vector<std::vector<std::size_t>> node_slots_;
    std::vector<std::vector<std::size_t>> rel_slots_;
    std::vector<std::int64_t> binding_;
    std::map<const Expr*, Regex> regexes_;
};

std::string number_text(double d) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
    return std::string(buf.data(), ptr);
}

}  // namespace

ResultTable execute(const Query& query, const graph::PropertyGraph& graph, const ExecutionLimits& limits) {
    return Executor(query, graph, limits).run();
}

bool value_less(const Value& a, const Value& b) { return a < b; }

std::string render_value(const Value& value, const graph::PropertyGraph& graph) {
    struct Visitor {
        const graph::PropertyGraph& g;
        std::string operator()(const Null&) const { return "null"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return number_text(d); }
        std::string operator()(const std::string& s) const { return s; }
        std::string props(const graph::Properties& p) const {
            std::string out;
            for (const auto& [k, v] : p) {
                out += out.empty() ? " {" : ", ";
                out += k + ": '" + v + "'";
            }
            return out.empty() ? out : out + "}";
        }
        std::string operator()(const NodeValue& n) const {
            const auto& node = g.node(n.id);
            return "(:" + std::string(graph::to_string(node.label)) + props(node.properties) + ")";
        }
        std::string operator()(const EdgeValue& e) const {
            const auto& edge = g.edge(e.id);
            return "[:" + std::string(graph::to_string(edge.type)) + props(edge.properties) + "]";
        }
    };
    return std::visit(Visitor{graph}, value);
}

std::string render_table(const ResultTable& table, const graph::PropertyGraph& graph) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width(table.columns.size(), 0);
    for (std::size_t c = 0; c < table.columns.size(); ++c) width[c] = table.columns[c].size();
    for (const auto& row : table.rows) {
        auto& line = cells.emplace_back();
        for (std::size_t c = 0; c < row.size(); ++c) {
            line.push_back(render_value(row[c], graph));
            width[c] = std::max(width[c], line.back().size());
        }
    }
    std::ostringstream out;
    const auto emit_line = [&](const std::vector<std::string>& fields) {
        std::string line;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c) line += " | ";
            line += fields[c];
            if (c + 1 < fields.size()) line.append(width[c] - fields[c].size(), ' ');
        }
        out << line << '\n';
    };
    emit_line(table.columns);
    std::string rule;
    for (std::size_t c = 0; c < width.size(); ++c) {
        if (c) rule += "-+-";
        rule.append(width[c], '-');
    }
    out << rule << '\n';
    for (const auto& line : cells) emit_line(line);
    return out.str();
}

}  // namespace hazardchat::cypher
