#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hazardchat/graph.hpp"
#include "hazardchat/rag.hpp"

namespace hazardchat::service {

enum class ConfigErrorKind { Syntax, MissingPath };

class ConfigError : public std::runtime_error {
public:
    ConfigError(ConfigErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ConfigErrorKind kind() const noexcept { return kind_; }

private:
    ConfigErrorKind kind_;
};

enum class LlmMode { Stub, Remote };
enum class EmbeddingMode { Offline, Remote };

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> corpus_dir;
    std::filesystem::path snapshot;
    std::filesystem::path exemplars;
    LlmMode llm_mode = LlmMode::Stub;
    std::filesystem::path stub_script;
    rag::RemoteEndpoint llm;
    EmbeddingMode embedding_mode = EmbeddingMode::Offline;
    rag::RemoteEndpoint embedding;
    std::size_t max_rows = 10'000;
    std::chrono::milliseconds time_budget{2000};
    std::vector<std::string> cors_allow;
    std::optional<std::filesystem::path> log_path;
};

/// Parses the `key = value` format of docs/config.md. Relative paths resolve
/// against `base_dir`. Throws ConfigError(Syntax).
ServiceConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// parse_config on a file, then checks that every configured path exists.
/// Throws ConfigError.
ServiceConfig load_config(const std::filesystem::path& path);

/// Newline-delimited JSON records, one per call; safe to share across threads.
class JsonlLogger {
public:
    explicit JsonlLogger(std::ostream* out) : out_(out) {}
    void write(const std::string& record);

private:
    std::ostream* out_;
    std::mutex mutex_;
};

struct HttpResult {
    int status = 200;
    std::string body;  // JSON
};

/// Everything the HTTP handlers need, built atomically from a config: the
/// snapshot is loaded and validated before any request can be served.
class Service {
public:
    Service(graph::PropertyGraph graph, std::unique_ptr<rag::Embedder> embedder, std::unique_ptr<rag::LlmClient> llm,
            std::unique_ptr<rag::Summarizer> summarizer, std::vector<rag::Exemplar> exemplars,
            cypher::ExecutionLimits limits, JsonlLogger* logger = nullptr);

    /// Throws graph::IoFailure, graph::CorruptSnapshot or rag::RagError.
    static std::unique_ptr<Service> from_config(const ServiceConfig& config, JsonlLogger* logger = nullptr);

    HttpResult chat(std::string_view body);
    HttpResult query(std::string_view body) const;
    HttpResult schema() const;
    HttpResult substance(std::string_view key) const;
    HttpResult healthz() const;

    const graph::PropertyGraph& graph() const noexcept { return graph_; }

private:
    std::string next_trace_id();

    graph::PropertyGraph graph_;
    std::unique_ptr<rag::Embedder> embedder_;
    std::unique_ptr<rag::LlmClient> llm_;
    std::unique_ptr<rag::Summarizer> summarizer_;
    rag::ExemplarStore store_;
    cypher::ExecutionLimits limits_;
    std::string checksum_;
    JsonlLogger* logger_;
    std::atomic<std::uint64_t> turns_{0};
};

/// {code, message} plus optional extra fields.
std::string error_body(std::string_view code, std::string_view message);

/// HTTP front end over a Service.
class HttpServer {
public:
    HttpServer(Service& service, std::vector<std::string> cors_allow, JsonlLogger* logger = nullptr);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Exit codes: 0 ok, 1 usage, 2 io, 3 data.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in);

}  // namespace hazardchat::service
