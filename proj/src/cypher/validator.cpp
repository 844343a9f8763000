#include "hazardchat/cypher/validator.hpp"

#include <map>
#include <set>

namespace hazardchat::cypher {

namespace {

using graph::EdgeType;
using graph::Label;

struct Checker {
    const graph::GraphSchema& schema;
    std::vector<Diagnostic> out;

    std::map<std::string, Label> declared;          // node variable -> label
    std::map<std::string, std::set<Label>> candidates;  // node variable -> labels it may carry
    std::map<std::string, std::optional<EdgeType>> rel_types;

    void report(DiagnosticCode code, std::string message) {
        Diagnostic d{code, std::move(message)};
        for (const auto& existing : out)
            if (existing == d) return;
        out.push_back(std::move(d));
    }

    std::optional<Label> label_of(const std::string& name) {
        auto label = graph::parse_label(name);
        if (!label || !schema.node_properties.count(*label))
            report(DiagnosticCode::UnknownLabel, "label `" + name + "` is not in the schema");
        return label;
    }

    std::optional<EdgeType> type_of(const std::string& name) {
        auto type = graph::parse_edge_type(name);
        if (!type || !schema.relationships.count(*type))
            report(DiagnosticCode::UnknownEdgeType, "relationship type `" + name + "` is not in the schema");
        return type;
    }

    void declare_labels(const Query& q) {
        for (const auto& path : q.patterns) {
            for (const auto& n : path.nodes) {
                if (n.variable.empty() || !n.label) continue;
                auto label = graph::parse_label(*n.label);
                if (!label) continue;
                auto [it, inserted] = declared.emplace(n.variable, *label);
                if (!inserted && it->second != *label)
                    report(DiagnosticCode::LabelConflict,
                           "variable `" + n.variable + "` is declared as both :" +
                               std::string(graph::to_string(it->second)) + " and :" + *n.label);
            }
        }
    }

    std::optional<Label> effective_label(const NodePattern& n) {
        if (n.label) return graph::parse_label(*n.label);
        if (!n.variable.empty()) {
            auto it = declared.find(n.variable);
            if (it != declared.end()) return it->second;
        }
        return std::nullopt;
    }

    static std::set<Label> all_labels() { return {graph::kAllLabels.begin(), graph::kAllLabels.end()}; }

    void narrow(const NodePattern& n, std::set<Label> allowed) {
        if (n.variable.empty()) return;
        auto& set = candidates.try_emplace(n.variable, all_labels()).first->second;
        std::set<Label> kept;
        for (auto l : set)
            if (allowed.count(l)) kept.insert(l);
        set = std::move(kept);
    }

    void check_node_properties(const NodePattern& n) {
        const auto label = effective_label(n);
        for (const auto& [key, _] : n.properties) {
            if (label && !schema.has_node_property(*label, key))
                report(DiagnosticCode::UnknownProperty, "property `" + key + "` does not exist on :" +
                                                           std::string(graph::to_string(*label)));
            else if (!label && !any_node_has(key))
                report(DiagnosticCode::UnknownProperty, "property `" + key + "` does not exist on any node label");
        }
    }

    bool any_node_has(const std::string& key) const {
        for (const auto& [label, keys] : schema.node_properties)
            if (keys.count(key)) return true;
        return false;
    }

    bool any_edge_has(const std::string& key) const {
        for (const auto& [type, keys] : schema.edge_properties)
            if (keys.count(key)) return true;
        return false;
    }

    void check_rel(const NodePattern& left, const RelPattern& rel, const NodePattern& right) {
        std::optional<EdgeType> type;
        if (rel.type) type = type_of(*rel.type);
        if (!rel.variable.empty()) rel_types[rel.variable] = type;

        for (const auto& [key, _] : rel.properties) {
            if (type && !schema.has_edge_property(*type, key))
                report(DiagnosticCode::UnknownProperty,
                       "property `" + key + "` does not exist on :" + std::string(graph::to_string(*type)));
            else if (!type && !any_edge_has(key))
                report(DiagnosticCode::UnknownProperty, "property `" + key + "` does not exist on any relationship");
        }
        if (!type) return;
        const auto sig = schema.relationships.at(*type);
        const auto l = effective_label(left);
        const auto r = effective_label(right);
        const auto fits = [](std::optional<Label> have, Label want) { return !have || *have == want; };

        if (rel.direction == RelDirection::Both) {
            const bool forward = fits(l, sig.from) && fits(r, sig.to);
            const bool backward = fits(l, sig.to) && fits(r, sig.from);
            if (!forward && !backward) endpoint_mismatch(*type, sig);
            narrow(left, {sig.from, sig.to});
            narrow(right, {sig.from, sig.to});
            return;
        }
        const auto& src = rel.direction == RelDirection::Right ? left : right;
        const auto& dst = rel.direction == RelDirection::Right ? right : left;
        const auto src_label = rel.direction == RelDirection::Right ? l : r;
        const auto dst_label = rel.direction == RelDirection::Right ? r : l;
        if (!(fits(src_label, sig.from) && fits(dst_label, sig.to))) {
            if (fits(src_label, sig.to) && fits(dst_label, sig.from))
                report(DiagnosticCode::DirectionMismatch,
                       "relationship :" + std::string(graph::to_string(*type)) + " points from :" +
                           std::string(graph::to_string(sig.from)) + " to :" +
                           std::string(graph::to_string(sig.to)) + "; the pattern traverses it the other way");
            else
                endpoint_mismatch(*type, sig);
        }
        narrow(src, {sig.from});
        narrow(dst, {sig.to});
    }

    void endpoint_mismatch(EdgeType type, graph::EdgeSignature sig) {
        report(DiagnosticCode::EndpointMismatch, "relationship :" + std::string(graph::to_string(type)) +
                                                     " only connects :" + std::string(graph::to_string(sig.from)) +
                                                     " to :" + std::string(graph::to_string(sig.to)));
    }

    void check_expr(const Expr& e) {
        if (e.kind == Expr::Kind::Property) {
            if (auto rt = rel_types.find(e.name); rt != rel_types.end()) {
                const auto& type = rt->second;
                if (type ? !schema.has_edge_property(*type, e.property) : !any_edge_has(e.property))
                    report(DiagnosticCode::UnknownProperty,
                           "property `" + e.property + "` does not exist on relationship `" + e.name + "`");
            } else {
                std::set<Label> labels = all_labels();
                if (auto d = declared.find(e.name); d != declared.end()) labels = {d->second};
                else if (auto c = candidates.find(e.name); c != candidates.end()) labels = c->second;
                bool found = false;
                for (auto l : labels) found = found || schema.has_node_property(l, e.property);
                if (!found)
                    report(DiagnosticCode::UnknownProperty,
                           "property `" + e.property + "` does not exist on `" + e.name + "`");
            }
        }
        for (const auto& a : e.args) check_expr(a);
    }
};

}  // namespace

std::string_view to_string(DiagnosticCode code) noexcept {
    switch (code) {
        case DiagnosticCode::UnknownLabel: return "UnknownLabel";
        case DiagnosticCode::UnknownEdgeType: return "UnknownEdgeType";
        case DiagnosticCode::UnknownProperty: return "UnknownProperty";
        case DiagnosticCode::DirectionMismatch: return "DirectionMismatch";
        case DiagnosticCode::EndpointMismatch: return "EndpointMismatch";
        case DiagnosticCode::LabelConflict: return "LabelConflict";
    }
    return "?";
}

std::vector<Diagnostic> validate(const Query& query, const graph::GraphSchema& schema) {
    Checker c{schema, {}, {}, {}, {}};
    for (const auto& path : query.patterns)
        for (const auto& n : path.nodes)
            if (n.label) c.label_of(*n.label);
    c.declare_labels(query);
    for (const auto& path : query.patterns) {
        for (const auto& n : path.nodes) c.check_node_properties(n);
        for (std::size_t i = 0; i < path.rels.size(); ++i) c.check_rel(path.nodes[i], path.rels[i], path.nodes[i + 1]);
    }
    if (query.where) c.check_expr(*query.where);
    for (const auto& item : query.items) c.check_expr(item.expr);
    return c.out;
}

}  // namespace hazardchat::cypher
