#include "hazardchat/json_render.hpp"

namespace hazardchat {

namespace {

Json properties_json(const graph::Properties& props) {
    Json out = Json::object();
    for (const auto& [k, v] : props) out[k] = v;
    return out;
}

}  // namespace

Json to_json(const cypher::Value& value, const graph::PropertyGraph& graph) {
    struct Visitor {
        const graph::PropertyGraph& g;
        Json operator()(const cypher::Null&) const { return nullptr; }
        Json operator()(std::int64_t i) const { return i; }
        Json operator()(double d) const { return d; }
        Json operator()(const std::string& s) const { return s; }
        Json operator()(const cypher::NodeValue& n) const {
            const auto& node = g.node(n.id);
            return Json{{"label", graph::to_string(node.label)},
                        {"key", node.key},
                        {"properties", properties_json(node.properties)}};
        }
        Json operator()(const cypher::EdgeValue& e) const {
            const auto& edge = g.edge(e.id);
            return Json{{"type", graph::to_string(edge.type)},
                        {"from", g.node(edge.from).key},
                        {"to", g.node(edge.to).key},
                        {"properties", properties_json(edge.properties)}};
        }
    };
    return std::visit(Visitor{graph}, value);
}

Json to_json(const cypher::ResultTable& table, const graph::PropertyGraph& graph) {
    Json rows = Json::array();
    for (const auto& row : table.rows) {
        Json cells = Json::array();
        for (const auto& v : row) cells.push_back(to_json(v, graph));
        rows.push_back(std::move(cells));
    }
    return Json{{"columns", table.columns}, {"rows", std::move(rows)}};
}

Json to_json(const rag::ChatResponse& r, const graph::PropertyGraph& graph, const std::optional<std::string>& trace_id) {
    Json out;
    out["answer"] = r.answer;
    out["cypher"] = r.cypher ? Json(*r.cypher) : Json(nullptr);
    if (r.rows) {
        const Json table = to_json(*r.rows, graph);
        out["columns"] = table["columns"];
        out["rows"] = table["rows"];
    } else {
        out["columns"] = nullptr;
        out["rows"] = nullptr;
    }
    out["refused"] = r.refused;
    out["error"] = r.error ? Json(*r.error) : Json(nullptr);
    out["trace_id"] = trace_id ? Json(*trace_id) : Json(nullptr);
    Json trace = Json::array();
    for (const auto& s : r.trace) trace.push_back(Json{{"step", s.step}, {"status", s.status}, {"detail", s.detail}});
    out["trace"] = std::move(trace);
    return out;
}

Json to_json(const graph::GraphSchema& schema) {
    Json labels = Json::object();
    for (const auto& [label, keys] : schema.node_properties) labels[std::string(graph::to_string(label))] = keys;
    Json rels = Json::array();
    for (const auto& [type, sig] : schema.relationships) {
        const auto props = schema.edge_properties.find(type);
        rels.push_back(Json{{"type", graph::to_string(type)},
                            {"from", graph::to_string(sig.from)},
                            {"to", graph::to_string(sig.to)},
                            {"properties", props == schema.edge_properties.end() ? Json::array() : Json(props->second)}});
    }
    return Json{{"labels", std::move(labels)}, {"relationships", std::move(rels)}, {"text", schema.render()}};
}

}  // namespace hazardchat
