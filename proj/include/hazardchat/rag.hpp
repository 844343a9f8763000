#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hazardchat/cypher/ast.hpp"
#include "hazardchat/cypher/executor.hpp"
#include "hazardchat/graph.hpp"

namespace hazardchat::rag {

enum class RagErrorKind { BackendUnavailable, NoQueryInReply, EmptyStore, InvalidInput, BadStore };

std::string_view to_string(RagErrorKind kind) noexcept;

class RagError : public std::runtime_error {
public:
    RagError(RagErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    RagErrorKind kind() const noexcept { return kind_; }

private:
    RagErrorKind kind_;
};

using Embedding = std::vector<double>;

class Embedder {
public:
    virtual ~Embedder() = default;
    /// Unit-length vector. Throws RagError(InvalidInput) on blank text.
    virtual Embedding embed(std::string_view text) const = 0;
};

/// Offline embedder: lower-cased character trigrams hashed into 256 buckets.
class HashingEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDimensions = 256;
    Embedding embed(std::string_view text) const override;
};

struct RemoteEndpoint {
    std::string url;  // scheme://host[:port][/base]
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_seconds = 30;
};

/// OpenAI-style `/v1/embeddings` client. Throws RagError(BackendUnavailable).
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    Embedding embed(std::string_view text) const override;

private:
    RemoteEndpoint endpoint_;
};

/// Cosine similarity; 0 when either vector is zero.
double cosine(const Embedding& a, const Embedding& b);

struct Exemplar {
    std::string id;
    std::string question;
    std::string cypher;
    std::string result_digest;
    Embedding embedding;
};

/// Read-only after load.
class ExemplarStore {
public:
    ExemplarStore() = default;
    explicit ExemplarStore(std::vector<Exemplar> exemplars) : exemplars_(std::move(exemplars)) {}

    /// Parses the record format of docs/exemplars.md, checks every query against
    /// `schema` and embeds every question. Throws RagError(BadStore).
    static ExemplarStore parse(std::string_view text, const graph::GraphSchema& schema, const Embedder& embedder);
    static ExemplarStore load(const std::filesystem::path& path, const graph::GraphSchema& schema,
                              const Embedder& embedder);

    const std::vector<Exemplar>& exemplars() const noexcept { return exemplars_; }
    std::size_t size() const noexcept { return exemplars_.size(); }

private:
    std::vector<Exemplar> exemplars_;
};

inline constexpr std::size_t kDefaultShots = 4;

/// Top-k by cosine similarity, ties by ascending id. Throws RagError(EmptyStore).
std::vector<Exemplar> select_few_shots(const Embedding& question, const std::vector<Exemplar>& store,
                                       std::size_t k = kDefaultShots);
std::vector<Exemplar> select_few_shots(std::string_view question, const ExemplarStore& store,
                                       const Embedder& embedder, std::size_t k = kDefaultShots);

struct PromptContext {
    std::string persona;
    std::string schema_text;
    std::string instructions;
    std::vector<Exemplar> exemplars;
    std::string question;

    std::string render() const;
};

inline constexpr std::string_view kRefusalSentence = "If you do not know the answer, just say I don't know.";
inline constexpr std::string_view kRefusalAnswer = "I don't know.";

PromptContext build_prompt(std::string_view question, const graph::GraphSchema& schema,
                           std::vector<Exemplar> exemplars);

struct ChatMessage {
    std::string role;
    std::string content;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// Returns the assistant reply. Throws RagError(BackendUnavailable).
    virtual std::string complete(const std::vector<ChatMessage>& messages) const = 0;
};

/// First fenced block, else the first line-isolated MATCH ... RETURN block.
/// Throws RagError(NoQueryInReply).
std::string extract_query(std::string_view reply);

std::string generate_query(const PromptContext& context, const LlmClient& llm);

struct ValidatedQuery {
    std::string text;
    cypher::Query query;
};

struct Refusal {
    std::string answer{kRefusalAnswer};
    std::string reason;
};

std::variant<ValidatedQuery, Refusal> validate_or_refuse(std::string_view candidate,
                                                         const graph::GraphSchema& schema);

class Summarizer {
public:
    virtual ~Summarizer() = default;
    virtual std::string summarize(std::string_view question, const ValidatedQuery& query,
                                  const cypher::ResultTable& rows, const graph::PropertyGraph& graph) const = 0;
};

/// Deterministic sentence built from the query's substance and organ and the row values.
class TemplateSummarizer final : public Summarizer {
public:
    std::string summarize(std::string_view question, const ValidatedQuery& query, const cypher::ResultTable& rows,
                          const graph::PropertyGraph& graph) const override;
};

/// Second model call that turns rows into prose.
class LlmSummarizer final : public Summarizer {
public:
    explicit LlmSummarizer(const LlmClient& llm) : llm_(llm) {}
    std::string summarize(std::string_view question, const ValidatedQuery& query, const cypher::ResultTable& rows,
                          const graph::PropertyGraph& graph) const override;

private:
    const LlmClient& llm_;
};

struct TraceStep {
    std::string step;    // embed, select, prompt, generate, validate, execute, summarize
    std::string status;  // ok, refused, failed
    std::string detail;
};

struct ChatResponse {
    std::string answer;
    std::optional<std::string> cypher;
    std::optional<cypher::ResultTable> rows;
    bool refused = false;
    std::optional<std::string> error;  // failed turn: RagErrorKind or QueryErrorKind name
    std::vector<TraceStep> trace;

    bool failed() const noexcept { return error.has_value(); }
    std::size_t executions() const;
};

struct Pipeline {
    const graph::PropertyGraph& graph;
    const ExemplarStore& store;
    const Embedder& embedder;
    const LlmClient& llm;
    const Summarizer& summarizer;
    std::size_t shots = kDefaultShots;
    cypher::ExecutionLimits limits{};
};

ChatResponse answer_turn(std::string_view question, const Pipeline& pipeline);

/// Stable single-line JSON: fixed key order, no whitespace.
std::string render_json(const ChatResponse& response, const graph::PropertyGraph& graph,
                        std::optional<std::string> trace_id = std::nullopt);

}  // namespace hazardchat::rag
