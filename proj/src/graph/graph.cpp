#include "hazardchat/graph.hpp"

#include <algorithm>
#include <sstream>

#include "hazardchat/model.hpp"

namespace hazardchat::graph {

std::string_view to_string(Label label) noexcept {
    switch (label) {
        case Label::Substance: return "Substance";
        case Label::Disease: return "Disease";
        case Label::Organ: return "Organ";
        case Label::HazardClass: return "HazardClass";
        case Label::ProductCategory: return "ProductCategory";
    }
    return "?";
}

std::string_view to_string(EdgeType type) noexcept {
    switch (type) {
        case EdgeType::related_to_disease: return "related_to_disease";
        case EdgeType::target_organ: return "target_organ";
        case EdgeType::has_hazard_class: return "has_hazard_class";
        case EdgeType::in_product_category: return "in_product_category";
    }
    return "?";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
    for (auto label : kAllLabels)
        if (to_string(label) == text) return label;
    return std::nullopt;
}

std::optional<EdgeType> parse_edge_type(std::string_view text) noexcept {
    for (auto type : kAllEdgeTypes)
        if (to_string(type) == text) return type;
    return std::nullopt;
}

std::string_view name_property(Label label) noexcept {
    switch (label) {
        case Label::Substance: return "name";
        case Label::Disease: return "DiseaseName";
        case Label::Organ: return "Organ";
        case Label::HazardClass: return "HazardClass";
        case Label::ProductCategory: return "ProductCategory";
    }
    return "name";
}

EdgeSignature signature(EdgeType type) noexcept {
    switch (type) {
        case EdgeType::related_to_disease: return {Label::Substance, Label::Disease};
        case EdgeType::target_organ: return {Label::Substance, Label::Organ};
        case EdgeType::has_hazard_class: return {Label::Substance, Label::HazardClass};
        case EdgeType::in_product_category: return {Label::Substance, Label::ProductCategory};
    }
    return {Label::Substance, Label::Substance};
}

const std::string* Node::property(std::string_view name) const {
    auto it = properties.find(std::string(name));
    return it == properties.end() ? nullptr : &it->second;
}

std::size_t GraphStats::count(Label label) const {
    auto it = nodes.find(label);
    return it == nodes.end() ? 0 : it->second;
}

std::size_t GraphStats::count(EdgeType type) const {
    auto it = edges.find(type);
    return it == edges.end() ? 0 : it->second;
}

std::size_t GraphStats::total_nodes() const {
    std::size_t n = 0;
    for (const auto& [_, c] : nodes) n += c;
    return n;
}

std::size_t GraphStats::total_edges() const {
    std::size_t n = 0;
    for (const auto& [_, c] : edges) n += c;
    return n;
}

bool GraphSchema::has_node_property(Label label, std::string_view key) const {
    auto it = node_properties.find(label);
    return it != node_properties.end() && it->second.count(std::string(key)) != 0;
}

bool GraphSchema::has_edge_property(EdgeType type, std::string_view key) const {
    auto it = edge_properties.find(type);
    return it != edge_properties.end() && it->second.count(std::string(key)) != 0;
}

std::string GraphSchema::render() const {
    std::ostringstream out;
    out << "Node properties:\n";
    for (const auto& [label, keys] : node_properties) {
        out << to_string(label) << " {";
        bool first = true;
        for (const auto& key : keys) {
            out << (first ? "" : ", ") << key << ": STRING";
            first = false;
        }
        out << "}\n";
    }
    out << "Relationship properties:\n";
    for (const auto& [type, keys] : edge_properties) {
        if (keys.empty()) continue;
        out << to_string(type) << " {";
        bool first = true;
        for (const auto& key : keys) {
            out << (first ? "" : ", ") << key << ": STRING";
            first = false;
        }
        out << "}\n";
    }
    out << "The relationships:\n";
    for (const auto& [type, sig] : relationships)
        out << "(:" << to_string(sig.from) << ")-[:" << to_string(type) << "]->(:" << to_string(sig.to) << ")\n";
    return out.str();
}

GraphSchema static_schema() {
    GraphSchema schema;
    schema.node_properties[Label::Substance] = {"name", "key", "EC", "CAS"};
    schema.node_properties[Label::Disease] = {"DiseaseName", "DiseaseID"};
    schema.node_properties[Label::Organ] = {"Organ"};
    schema.node_properties[Label::HazardClass] = {"HazardClass"};
    schema.node_properties[Label::ProductCategory] = {"ProductCategory"};
    schema.edge_properties[EdgeType::related_to_disease] = {"min_exposure"};
    schema.edge_properties[EdgeType::target_organ] = {};
    schema.edge_properties[EdgeType::has_hazard_class] = {"hazard_phrase"};
    schema.edge_properties[EdgeType::in_product_category] = {};
    for (auto type : kAllEdgeTypes) schema.relationships[type] = signature(type);
    return schema;
}

std::size_t PropertyGraph::KeyHash::operator()(const std::pair<Label, std::string>& k) const noexcept {
    return std::hash<std::string>{}(k.second) * 31u + static_cast<std::size_t>(k.first);
}

NodeId PropertyGraph::add_node(Label label, std::string key, Properties properties) {
    if (auto it = by_key_.find({label, key}); it != by_key_.end()) {
        Node& existing = nodes_[it->second];
        const bool had_name = existing.property(name_property(label)) != nullptr;
        for (auto& [k, v] : properties) existing.properties.emplace(k, std::move(v));
        if (!had_name) {
            if (const auto* name = existing.property(name_property(label))) {
                by_lower_name_[{label, to_lower_ascii(*name)}].push_back(existing.id);
                by_name_[{label, *name}].push_back(existing.id);
            }
        }
        return it->second;
    }
    const auto id = static_cast<NodeId>(nodes_.size());
    by_key_.emplace(std::pair{label, key}, id);
    nodes_.push_back(Node{id, label, std::move(key), std::move(properties)});
    out_.emplace_back();
    in_.emplace_back();
    by_label_[static_cast<std::size_t>(label)].push_back(id);
    if (const auto* name = nodes_.back().property(name_property(label))) {
        by_lower_name_[{label, to_lower_ascii(*name)}].push_back(id);
        by_name_[{label, *name}].push_back(id);
    }
    return id;
}

EdgeId PropertyGraph::add_edge(NodeId from, NodeId to, EdgeType type, Properties properties) {
    if (from >= nodes_.size() || to >= nodes_.size())
        throw SchemaViolation("edge " + std::string(to_string(type)) + " refers to a missing node");
    const auto sig = signature(type);
    if (nodes_[from].label != sig.from || nodes_[to].label != sig.to) {
        throw SchemaViolation("edge " + std::string(to_string(type)) + " cannot connect " +
                              std::string(to_string(nodes_[from].label)) + " to " +
                              std::string(to_string(nodes_[to].label)));
    }
    const auto id = static_cast<EdgeId>(edges_.size());
    edges_.push_back(Edge{id, from, to, type, std::move(properties)});
    out_[from].push_back(id);
    in_[to].push_back(id);
    return id;
}

const Node& PropertyGraph::node(NodeId id) const {
    if (id >= nodes_.size()) throw UnknownNode("unknown node id " + std::to_string(id));
    return nodes_[id];
}

std::optional<NodeId> PropertyGraph::find(Label label, std::string_view key) const {
    auto it = by_key_.find({label, std::string(key)});
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
}

std::vector<const Node*> PropertyGraph::lookup_by_name(Label label, std::string_view name,
                                                       bool case_insensitive) const {
    std::vector<const Node*> out;
    const auto& index = case_insensitive ? by_lower_name_ : by_name_;
    const std::string probe = case_insensitive ? to_lower_ascii(name) : std::string(name);
    if (auto it = index.find({label, probe}); it != index.end()) {
        out.reserve(it->second.size());
        for (auto id : it->second) out.push_back(&nodes_[id]);
    }
    return out;
}

std::vector<std::pair<const Edge*, const Node*>> PropertyGraph::neighbors(NodeId node, EdgeType type,
                                                                          Direction direction) const {
    if (node >= nodes_.size()) throw UnknownNode("unknown node id " + std::to_string(node));
    std::vector<std::pair<const Edge*, const Node*>> out;
    const auto& incident = direction == Direction::Out ? out_[node] : in_[node];
    for (auto eid : incident) {
        const Edge& e = edges_[eid];
        if (e.type != type) continue;
        out.emplace_back(&e, &nodes_[direction == Direction::Out ? e.to : e.from]);
    }
    return out;
}

const std::vector<NodeId>& PropertyGraph::nodes_with_label(Label label) const {
    return by_label_[static_cast<std::size_t>(label)];
}

GraphStats PropertyGraph::stats() const {
    GraphStats s;
    for (auto label : kAllLabels) s.nodes[label] = nodes_with_label(label).size();
    for (auto type : kAllEdgeTypes) s.edges[type] = 0;
    for (const auto& e : edges_) ++s.edges[e.type];
    return s;
}

GraphSchema PropertyGraph::schema() const {
    GraphSchema s = static_schema();
    for (const auto& n : nodes_)
        for (const auto& [k, _] : n.properties) s.node_properties[n.label].insert(k);
    for (const auto& e : edges_)
        for (const auto& [k, _] : e.properties) s.edge_properties[e.type].insert(k);
    return s;
}

PropertyGraph apply(const GraphBuildPlan& plan) {
    PropertyGraph g;
    for (const auto& n : plan.nodes) g.add_node(n.label, n.key, n.properties);
    for (const auto& e : plan.edges) {
        const auto from = g.find(e.from.label, e.from.key);
        const auto to = g.find(e.to.label, e.to.key);
        if (!from || !to) {
            throw SchemaViolation("plan edge " + std::string(to_string(e.type)) + " refers to missing node " +
                                  std::string(to_string(from ? e.to.label : e.from.label)) + ":" +
                                  (from ? e.to.key : e.from.key));
        }
        g.add_edge(*from, *to, e.type, e.properties);
    }
    return g;
}

GraphStats stats(const PropertyGraph& graph) { return graph.stats(); }

CanonicalForm canonical_form(const PropertyGraph& graph) {
    CanonicalForm form;
    form.nodes.reserve(graph.node_count());
    for (const auto& n : graph.nodes()) form.nodes.push_back({n.label, n.key, n.properties});
    form.edges.reserve(graph.edge_count());
    for (const auto& e : graph.edges()) {
        const auto& a = graph.node(e.from);
        const auto& b = graph.node(e.to);
        form.edges.push_back({e.type, {a.label, a.key}, {b.label, b.key}, e.properties});
    }
    std::sort(form.nodes.begin(), form.nodes.end());
    std::sort(form.edges.begin(), form.edges.end());
    return form;
}

CanonicalForm canonical_form(const GraphBuildPlan& plan) {
    CanonicalForm form{plan.nodes, plan.edges};
    std::sort(form.nodes.begin(), form.nodes.end());
    std::sort(form.edges.begin(), form.edges.end());
    return form;
}

}  // namespace hazardchat::graph
