#include <algorithm>
#include <cstdio>
#include <ostream>

#include "hazardchat/cypher/parser.hpp"
#include "hazardchat/cypher/validator.hpp"
#include "hazardchat/json_render.hpp"
#include "hazardchat/llm.hpp"
#include "hazardchat/service.hpp"
#include "hazardchat/snapshot.hpp"

namespace hazardchat::service {

void JsonlLogger::write(const std::string& record) {
    if (!out_) return;
    std::lock_guard lock(mutex_);
    *out_ << record << '\n';
    out_->flush();
}

std::string error_body(std::string_view code, std::string_view message) {
    return Json{{"code", code}, {"message", message}}.dump();
}

namespace {

HttpResult error(int status, std::string_view code, std::string_view message, Json extra = Json::object()) {
    Json body{{"code", code}, {"message", message}};
    for (auto& [k, v] : extra.items()) body[k] = v;
    return {status, body.dump()};
}

std::optional<Json> parse_body(std::string_view body) {
    try {
        Json j = Json::parse(body);
        if (j.is_object()) return j;
    } catch (const Json::parse_error&) {
    }
    return std::nullopt;
}

}  // namespace

Service::Service(graph::PropertyGraph graph, std::unique_ptr<rag::Embedder> embedder,
                 std::unique_ptr<rag::LlmClient> llm, std::unique_ptr<rag::Summarizer> summarizer,
                 std::vector<rag::Exemplar> exemplars, cypher::ExecutionLimits limits, JsonlLogger* logger)
    : graph_(std::move(graph)),
      embedder_(std::move(embedder)),
      llm_(std::move(llm)),
      summarizer_(std::move(summarizer)),
      store_(std::move(exemplars)),
      limits_(limits),
      checksum_(graph::snapshot_checksum(graph_)),
      logger_(logger) {}

std::unique_ptr<Service> Service::from_config(const ServiceConfig& config, JsonlLogger* logger) {
    auto graph = graph::load_snapshot(config.snapshot);
    std::unique_ptr<rag::Embedder> embedder;
    if (config.embedding_mode == EmbeddingMode::Remote) embedder = std::make_unique<rag::RemoteEmbedder>(config.embedding);
    else embedder = std::make_unique<rag::HashingEmbedder>();
    auto store = rag::ExemplarStore::load(config.exemplars, graph.schema(), *embedder);

    std::unique_ptr<rag::LlmClient> llm;
    std::unique_ptr<rag::Summarizer> summarizer;
    if (config.llm_mode == LlmMode::Stub) {
        llm = std::make_unique<rag::ScriptedLlmClient>(rag::ScriptedLlmClient::load(config.stub_script));
        summarizer = std::make_unique<rag::TemplateSummarizer>();
    } else {
        llm = std::make_unique<rag::RemoteChatClient>(config.llm);
        summarizer = std::make_unique<rag::LlmSummarizer>(*llm);
    }
    cypher::ExecutionLimits limits{config.max_rows, config.time_budget};
    return std::make_unique<Service>(std::move(graph), std::move(embedder), std::move(llm), std::move(summarizer),
                                     store.exemplars(), limits, logger);
}

std::string Service::next_trace_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "turn-%06llu", static_cast<unsigned long long>(++turns_));
    return buf;
}

HttpResult Service::chat(std::string_view body) {
    const auto request = parse_body(body);
    if (!request || !request->contains("question") || !(*request)["question"].is_string())
        return error(400, "BadRequest", "expected a JSON object with a string field `question`");

    const std::string trace_id = next_trace_id();
    rag::Pipeline pipeline{graph_, store_, *embedder_, *llm_, *summarizer_, rag::kDefaultShots, limits_};
    const auto response = rag::answer_turn((*request)["question"].get<std::string>(), pipeline);

    if (logger_)
        for (const auto& s : response.trace)
            logger_->write(Json{{"event", "chat_step"},
                                {"trace_id", trace_id},
                                {"step", s.step},
                                {"status", s.status},
                                {"detail", s.detail}}
                               .dump());

    if (response.error) {
        int status = 500;
        if (*response.error == "InvalidInput") status = 400;
        else if (*response.error == "BackendUnavailable") status = 502;
        else if (*response.error == "ExecutionLimit") status = 422;
        return error(status, *response.error, response.answer, Json{{"trace_id", trace_id}});
    }
    return {200, to_json(response, graph_, trace_id).dump()};
}

HttpResult Service::query(std::string_view body) const {
    const auto request = parse_body(body);
    if (!request || !request->contains("cypher") || !(*request)["cypher"].is_string())
        return error(400, "BadRequest", "expected a JSON object with a string field `cypher`");
    const std::string text = (*request)["cypher"].get<std::string>();
    try {
        const auto q = cypher::parse(text);
        const auto diags = cypher::validate(q, graph_.schema());
        if (!diags.empty()) {
            Json list = Json::array();
            for (const auto& d : diags) list.push_back(Json{{"code", cypher::to_string(d.code)}, {"message", d.message}});
            return error(422, "SchemaMismatch", diags.front().message, Json{{"diagnostics", std::move(list)}});
        }
        return {200, to_json(cypher::execute(q, graph_, limits_), graph_).dump()};
    } catch (const cypher::QueryError& e) {
        const std::string code(cypher::to_string(e.kind()));
        Json diag{{"code", code}, {"message", e.what()}, {"position", e.position()}};
        return error(422, code, e.what(), Json{{"position", e.position()}, {"diagnostics", Json::array({diag})}});
    }
}

HttpResult Service::schema() const { return {200, to_json(graph_.schema()).dump()}; }

HttpResult Service::substance(std::string_view key) const {
    const auto id = graph_.find(graph::Label::Substance, key);
    if (!id) return error(404, "NotFound", "no substance with key `" + std::string(key) + "`");
    const auto& node = graph_.node(*id);
    Json props = Json::object();
    for (const auto& [k, v] : node.properties) props[k] = v;
    Json neighbors = Json::object();
    for (auto type : graph::kAllEdgeTypes) {
        auto list = graph_.neighbors(*id, type, graph::Direction::Out);
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.second->key < b.second->key; });
        Json items = Json::array();
        for (const auto& [edge, other] : list) {
            const auto* name = other->property(graph::name_property(other->label));
            Json edge_props = Json::object();
            for (const auto& [k, v] : edge->properties) edge_props[k] = v;
            items.push_back(Json{{"label", graph::to_string(other->label)},
                                 {"key", other->key},
                                 {"name", name ? Json(*name) : Json(nullptr)},
                                 {"edge_properties", std::move(edge_props)}});
        }
        neighbors[std::string(graph::to_string(type))] = std::move(items);
    }
    return {200, Json{{"key", node.key}, {"properties", std::move(props)}, {"neighbors", std::move(neighbors)}}.dump()};
}

HttpResult Service::healthz() const {
    return {200, Json{{"status", "ok"},
                      {"snapshot_checksum", checksum_},
                      {"nodes", graph_.node_count()},
                      {"edges", graph_.edge_count()}}
                     .dump()};
}

}  // namespace hazardchat::service
