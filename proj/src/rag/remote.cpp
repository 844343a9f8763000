#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "hazardchat/llm.hpp"
#include "hazardchat/model.hpp"

namespace hazardchat::rag {

namespace {

struct Target {
    std::string origin;  // scheme://host[:port]
    std::string base;    // path prefix without trailing slash
};

Target split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw RagError(RagErrorKind::BackendUnavailable, "endpoint url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    Target t;
    t.origin = url.substr(0, path_start);
    t.base = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!t.base.empty() && t.base.back() == '/') t.base.pop_back();
    return t;
}

nlohmann::json post(const RemoteEndpoint& endpoint, const std::string& path, const nlohmann::json& body) {
    const char* key = std::getenv(endpoint.api_key_env.c_str());
    if (!key || !*key)
        throw RagError(RagErrorKind::BackendUnavailable, "environment variable " + endpoint.api_key_env + " is not set");
    const Target target = split_url(endpoint.url);
    httplib::Client client(target.origin);
    if (!client.is_valid())
        throw RagError(RagErrorKind::BackendUnavailable, "unsupported endpoint " + endpoint.url);
    client.set_connection_timeout(endpoint.timeout_seconds, 0);
    client.set_read_timeout(endpoint.timeout_seconds, 0);
    client.set_write_timeout(endpoint.timeout_seconds, 0);
    const httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
    auto res = client.Post(target.base + path, headers, body.dump(), "application/json");
    if (!res)
        throw RagError(RagErrorKind::BackendUnavailable,
                       "request to " + endpoint.url + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw RagError(RagErrorKind::BackendUnavailable,
                       "backend answered HTTP " + std::to_string(res->status));
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
        throw RagError(RagErrorKind::BackendUnavailable, "backend reply is not JSON");
    }
}

}  // namespace

std::string RemoteChatClient::complete(const std::vector<ChatMessage>& messages) const {
    nlohmann::json body{{"model", endpoint_.model}, {"temperature", 0}};
    auto& list = body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) list.push_back({{"role", m.role}, {"content", m.content}});
    const auto reply = post(endpoint_, "/v1/chat/completions", body);
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw RagError(RagErrorKind::BackendUnavailable, "backend reply has no message content");
    }
}

Embedding RemoteEmbedder::embed(std::string_view text) const {
    const std::string input = trim(text);
    if (input.empty()) throw RagError(RagErrorKind::InvalidInput, "cannot embed blank text");
    const auto reply = post(endpoint_, "/v1/embeddings", {{"model", endpoint_.model}, {"input", input}});
    Embedding v;
    try {
        v = reply.at("data").at(0).at("embedding").get<Embedding>();
    } catch (const nlohmann::json::exception&) {
        throw RagError(RagErrorKind::BackendUnavailable, "backend reply has no embedding");
    }
    double norm = 0;
    for (double x : v) norm += x * x;
    if (v.empty() || norm == 0) throw RagError(RagErrorKind::BackendUnavailable, "backend returned a zero embedding");
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

}  // namespace hazardchat::rag
