#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hazardchat::graph {

enum class Label { Substance, Disease, Organ, HazardClass, ProductCategory };
enum class EdgeType { related_to_disease, target_organ, has_hazard_class, in_product_category };
enum class Direction { Out, In };

inline constexpr std::array<Label, 5> kAllLabels{Label::Substance, Label::Disease, Label::Organ,
                                                  Label::HazardClass, Label::ProductCategory};
inline constexpr std::array<EdgeType, 4> kAllEdgeTypes{EdgeType::related_to_disease, EdgeType::target_organ,
                                                       EdgeType::has_hazard_class,
                                                       EdgeType::in_product_category};

std::string_view to_string(Label label) noexcept;
std::string_view to_string(EdgeType type) noexcept;
std::optional<Label> parse_label(std::string_view text) noexcept;
std::optional<EdgeType> parse_edge_type(std::string_view text) noexcept;

/// Property that holds the human-readable name of a node, e.g. `Organ` for Organ nodes.
std::string_view name_property(Label label) noexcept;

struct EdgeSignature {
    Label from;
    Label to;
};

/// Static schema table: every stored edge must match its type's signature.
EdgeSignature signature(EdgeType type) noexcept;

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using Properties = std::map<std::string, std::string>;

struct Node {
    NodeId id = 0;
    Label label = Label::Substance;
    std::string key;  // natural key, unique per label
    Properties properties;

    const std::string* property(std::string_view name) const;
};

struct Edge {
    EdgeId id = 0;
    NodeId from = 0;
    NodeId to = 0;
    EdgeType type = EdgeType::related_to_disease;
    Properties properties;
};

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaViolation : public GraphError {
public:
    using GraphError::GraphError;
};

class UnknownNode : public GraphError {
public:
    using GraphError::GraphError;
};

struct NodeRef {
    Label label;
    std::string key;

    friend bool operator==(const NodeRef&, const NodeRef&) = default;
    friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

struct PlanNode {
    Label label;
    std::string key;
    Properties properties;

    friend bool operator==(const PlanNode&, const PlanNode&) = default;
    friend auto operator<=>(const PlanNode&, const PlanNode&) = default;
};

struct PlanEdge {
    EdgeType type;
    NodeRef from;
    NodeRef to;
    Properties properties;

    friend bool operator==(const PlanEdge&, const PlanEdge&) = default;
    friend auto operator<=>(const PlanEdge&, const PlanEdge&) = default;
};

/// What ingestion hands to the store: nodes by natural key, edges by endpoint keys.
struct GraphBuildPlan {
    std::vector<PlanNode> nodes;
    std::vector<PlanEdge> edges;

    friend bool operator==(const GraphBuildPlan&, const GraphBuildPlan&) = default;
};

struct GraphStats {
    std::map<Label, std::size_t> nodes;
    std::map<EdgeType, std::size_t> edges;

    std::size_t count(Label label) const;
    std::size_t count(EdgeType type) const;
    std::size_t total_nodes() const;
    std::size_t total_edges() const;

    friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

struct GraphSchema {
    std::map<Label, std::set<std::string>> node_properties;
    std::map<EdgeType, std::set<std::string>> edge_properties;
    std::map<EdgeType, EdgeSignature> relationships;

    bool has_node_property(Label label, std::string_view key) const;
    bool has_edge_property(EdgeType type, std::string_view key) const;

    /// Text block injected into prompts: node properties, relationship
    /// properties and relationship signatures.
    std::string render() const;
};

/// The static schema: known labels, edge types and their property keys.
GraphSchema static_schema();

/// In-memory property graph. Built once (apply / load) and then read-only, so a
/// `const PropertyGraph` can be shared by any number of concurrent readers.
class PropertyGraph {
public:
    /// Inserts a node, or merges properties into the existing node with the same
    /// (label, key). Existing property values win.
    NodeId add_node(Label label, std::string key, Properties properties = {});

    /// Throws SchemaViolation for missing endpoints or a signature mismatch.
    EdgeId add_edge(NodeId from, NodeId to, EdgeType type, Properties properties = {});

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    const Node& node(NodeId id) const;
    const Edge& edge(EdgeId id) const { return edges_.at(id); }
    std::optional<NodeId> find(Label label, std::string_view key) const;

    /// Nodes whose name property equals `name` (ASCII case-folded when asked).
    std::vector<const Node*> lookup_by_name(Label label, std::string_view name, bool case_insensitive) const;

    std::vector<std::pair<const Edge*, const Node*>> neighbors(NodeId node, EdgeType type, Direction direction) const;

    /// Incident edge ids, unfiltered.
    const std::vector<EdgeId>& out_edges(NodeId node) const { return out_.at(node); }
    const std::vector<EdgeId>& in_edges(NodeId node) const { return in_.at(node); }

    const std::vector<NodeId>& nodes_with_label(Label label) const;

    GraphStats stats() const;

    /// Static schema plus any extra property keys observed in the data.
    GraphSchema schema() const;

private:
    struct KeyHash {
        std::size_t operator()(const std::pair<Label, std::string>& k) const noexcept;
    };

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> out_;
    std::vector<std::vector<EdgeId>> in_;
    std::unordered_map<std::pair<Label, std::string>, NodeId, KeyHash> by_key_;
    std::unordered_map<std::pair<Label, std::string>, std::vector<NodeId>, KeyHash> by_lower_name_;
    std::unordered_map<std::pair<Label, std::string>, std::vector<NodeId>, KeyHash> by_name_;
    std::array<std::vector<NodeId>, kAllLabels.size()> by_label_;
};

/// Builds a graph from an ingest plan. Throws SchemaViolation when an edge refers
/// to a node absent from the plan or its endpoints do not fit the schema.
PropertyGraph apply(const GraphBuildPlan& plan);

GraphStats stats(const PropertyGraph& graph);

/// Node and edge descriptions keyed by natural key, so two graphs can be compared
/// regardless of internal ids.
struct CanonicalForm {
    std::vector<PlanNode> nodes;
    std::vector<PlanEdge> edges;

    friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;
};

CanonicalForm canonical_form(const PropertyGraph& graph);
CanonicalForm canonical_form(const GraphBuildPlan& plan);

}  // namespace hazardchat::graph
