#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hazardchat/rag.hpp"

namespace hazardchat::rag {

/// OpenAI-style `/v1/chat/completions` client. The key is read from the
/// environment variable named in the endpoint on every call.
class RemoteChatClient final : public LlmClient {
public:
    explicit RemoteChatClient(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::string complete(const std::vector<ChatMessage>& messages) const override;

private:
    RemoteEndpoint endpoint_;
};

/// Replays canned replies from a script file (docs/stub_script.md).
class ScriptedLlmClient final : public LlmClient {
public:
    enum class Match { Question, Contains, Default, Unavailable };

    struct Rule {
        Match match = Match::Default;
        std::string pattern;
        std::string reply;
    };

    ScriptedLlmClient() = default;
    explicit ScriptedLlmClient(std::vector<Rule> rules) : rules_(std::move(rules)) {}

    /// Throws RagError(BadStore) on malformed scripts.
    static ScriptedLlmClient parse(std::string_view text);
    static ScriptedLlmClient load(const std::filesystem::path& path);

    /// First matching rule wins; no match replies "I don't know.".
    std::string complete(const std::vector<ChatMessage>& messages) const override;

    const std::vector<Rule>& rules() const noexcept { return rules_; }

private:
    std::vector<Rule> rules_;
};

/// Text after the last "User input:" marker of the last message, trimmed.
std::string user_input_of(const std::vector<ChatMessage>& messages);

}  // namespace hazardchat::rag
